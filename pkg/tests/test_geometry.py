import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teleadjust.geometry import (
    LARGE,
    SMALL,
    Direction,
    GeometryError,
    Position2,
    ProxemicZone,
    RangeKind,
    adjust_destination,
    build_layout,
    clamp_magnitude,
    proxemic_correction,
)

coord = st.floats(-50, 50, allow_nan=False)


def test_adjust_backward_small():
    assert adjust_destination((0, 0), (2.5, 0), Direction.BACKWARD, 1.0) == pytest.approx((1.5, 0))


def test_adjust_forward_large():
    assert adjust_destination((0, 0), (0, 9), Direction.FORWARD, 0.98) == pytest.approx((0, 9.98))


def test_backward_clamps_at_origin():
    assert adjust_destination((0, 0), (2.5, 0), Direction.BACKWARD, 3.0) == (0.0, 0.0)
    assert clamp_magnitude((0, 0), (2.5, 0), Direction.BACKWARD, 3.0, LARGE) == 2.5


def test_degenerate_direction():
    with pytest.raises(GeometryError):
        adjust_destination((1, 1), (1, 1), Direction.FORWARD, 0.5)
    with pytest.raises(GeometryError):
        proxemic_correction((1, 1), (1, 1), (2, 2), 1.0, ProxemicZone.PERSONAL)


def test_negative_magnitude_rejected():
    with pytest.raises(ValueError):
        adjust_destination((0, 0), (1, 0), Direction.FORWARD, -0.1)


@pytest.mark.parametrize("selected, direction, magnitude, rk, expected", [
    ((2.5, 0), Direction.BACKWARD, 4.0, SMALL, 2.5),
    ((9, 0), Direction.FORWARD, 5.0, LARGE, 3.5),
    ((9, 0), Direction.BACKWARD, 0.0, LARGE, 0.0),
    ((2.0, 0), Direction.BACKWARD, 2.4, SMALL, 2.0),
    ((2.0, 0), Direction.FORWARD, 2.4, SMALL, 2.4),
])
def test_clamp_magnitude(selected, direction, magnitude, rk, expected):
    assert clamp_magnitude((0, 0), selected, direction, magnitude, rk) == pytest.approx(expected)


@pytest.mark.parametrize("rk, side", [(SMALL, 13.54), (LARGE, 22.72)])
def test_layout_side_lengths(rk, side):
    assert build_layout(rk).side_length == pytest.approx(side, abs=0.01)


def test_layout_symmetry_and_wall_clearance():
    layout = build_layout(SMALL)
    dists = [c.norm() for c in layout.zone_centers]
    assert dists == pytest.approx([2.5] * 4)
    half = layout.side_length / 2
    for c in layout.zone_centers:
        rotated = Position2(-c.y, c.x)
        assert any(rotated.dist(o) < 1e-12 for o in layout.zone_centers)
        nearest_wall = half - max(abs(c.x), abs(c.y))
        assert nearest_wall - layout.zone_radius == pytest.approx(4.5)


def test_zone_radius_is_configurable():
    wide = SMALL.with_zone_radius(1.0)
    assert build_layout(wide).side_length == pytest.approx(build_layout(SMALL).side_length + 1.0)
    with pytest.raises(ValueError):
        RangeKind("bad", center_distance=0.5, max_adjustment=1.0, zone_radius=0.5)


def test_proxemic_zone_bounds_increase():
    zones = list(ProxemicZone)
    assert [z.inner for z in zones] == sorted(z.inner for z in zones)
    assert all(z.inner < z.outer for z in zones)
    assert ProxemicZone.from_name("Personal") is ProxemicZone.PERSONAL


class TestProxemicCorrection:
    def test_reaches_personal_boundary(self):
        c = proxemic_correction((0, 0), (2.8, 0), (3.0, 0), 1.33, ProxemicZone.PERSONAL)
        assert c.attained
        assert c.magnitude == pytest.approx(0.25)
        assert c.position.dist((3.0, 0)) == pytest.approx(0.45)

    def test_no_op_when_far_enough(self):
        c = proxemic_correction((0, 0), (1.0, 0), (3.0, 0), 1.33, ProxemicZone.PERSONAL)
        assert c.position == Position2(1.0, 0.0)
        assert c.magnitude == 0 and c.attained

    def test_best_effort_when_budget_too_small(self):
        c = proxemic_correction((0, 0), (2.9, 0), (3.0, 0), 0.75, ProxemicZone.SOCIAL)
        assert not c.attained
        assert c.magnitude == pytest.approx(0.75)
        # brute force: no magnitude within the budget (1 mm steps) gets to 1.2 m
        sel, partner = np.array([2.9, 0.0]), np.array([3.0, 0.0])
        reach = max(np.linalg.norm(sel - [m, 0] - partner) for m in np.arange(0, 0.7505, 0.001))
        assert reach < 1.2

    def test_overshoot_past_partner(self):
        c = proxemic_correction((0, 0), (3.1, 0), (3.0, 0), 1.33, ProxemicZone.PERSONAL)
        assert c.attained
        assert c.position.x == pytest.approx(2.55)

    def test_intimate_target_never_moves(self):
        c = proxemic_correction((0, 0), (2.99, 0), (3.0, 0), 1.33, ProxemicZone.INTIMATE)
        assert c.magnitude == 0

    @settings(max_examples=200)
    @given(coord, coord, coord, coord, coord, coord, st.floats(0, 3),
           st.sampled_from(list(ProxemicZone)))
    def test_minimality(self, ox, oy, sx, sy, px, py, budget, zone):
        if math.hypot(sx - ox, sy - oy) < 1e-3:
            return
        c = proxemic_correction((ox, oy), (sx, sy), (px, py), budget, zone)
        assert 0 <= c.magnitude <= budget + 1e-12
        if c.attained:
            assert c.position.dist((px, py)) >= zone.inner - 1e-9
            # slightly less correction would not be enough
            if c.magnitude > 1e-6:
                less = adjust_destination((ox, oy), (sx, sy), Direction.BACKWARD,
                                          c.magnitude - 1e-6)
                assert less.dist((px, py)) < zone.inner + 1e-9


@settings(max_examples=300)
@given(coord, coord, coord, coord, st.floats(0, 10), st.sampled_from(list(Direction)),
       st.sampled_from([SMALL, LARGE]))
def test_adjustment_properties(ox, oy, sx, sy, magnitude, direction, rk):
    origin, selected = Position2(ox, oy), Position2(sx, sy)
    if selected.dist(origin) < 1e-3:
        return
    m = clamp_magnitude(origin, selected, direction, magnitude, rk)
    out = adjust_destination(origin, selected, direction, m)
    d1, d2 = selected - origin, out - origin
    assert abs(d1.x * d2.y - d1.y * d2.x) <= 1e-9 * max(1.0, d1.norm() * d2.norm())
    assert out.dist(selected) == pytest.approx(m, abs=1e-9)
    sign = 1 if direction is Direction.FORWARD else -1
    assert out.dist(origin) == pytest.approx(selected.dist(origin) + sign * m, abs=1e-9)
