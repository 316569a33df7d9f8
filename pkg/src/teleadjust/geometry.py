"""Planar teleport geometry: zones, room layout, destination adjustment and
the proxemic correction policy built on measured backward thresholds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

WALL_CLEARANCE = 4.5


class GeometryError(ValueError):
    """Raised for degenerate teleport geometry (origin equals selection)."""


class Position2(NamedTuple):
    x: float
    y: float

    def __sub__(self, other):  # type: ignore[override]
        return Position2(self.x - other[0], self.y - other[1])

    def __add__(self, other):  # type: ignore[override]
        return Position2(self.x + other[0], self.y + other[1])

    def scaled(self, k: float) -> "Position2":
        return Position2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class RangeKind:
    """A teleport range: zone placement distance, zone size and adjustment cap."""

    name: str
    center_distance: float
    max_adjustment: float
    zone_radius: float = 0.5

    def __post_init__(self):
        if not self.center_distance > self.zone_radius > 0:
            raise ValueError(
                f"range {self.name!r}: need center_distance > zone_radius > 0"
            )
        if self.max_adjustment <= 0:
            raise ValueError(f"range {self.name!r}: max_adjustment must be > 0")

    def with_zone_radius(self, radius: float) -> "RangeKind":
        return replace(self, zone_radius=radius)

    @staticmethod
    def from_name(name: str) -> "RangeKind":
        try:
            return RANGES[name.lower()]
        except KeyError:
            raise ValueError(f"unknown range {name!r}; expected small or large") from None


SMALL = RangeKind("small", center_distance=2.5, max_adjustment=2.5)
LARGE = RangeKind("large", center_distance=9.0, max_adjustment=3.5)
RANGES = {"small": SMALL, "large": LARGE}


class ProxemicZone(enum.Enum):
    """Hall's interpersonal distance bands as (inner, outer) bounds in meters."""

    INTIMATE = (0.0, 0.45)
    PERSONAL = (0.45, 1.2)
    SOCIAL = (1.2, 3.6)

    @property
    def inner(self) -> float:
        return self.value[0]

    @property
    def outer(self) -> float:
        return self.value[1]

    @classmethod
    def from_name(cls, name: str) -> "ProxemicZone":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(
                f"unknown zone {name!r}; expected intimate, personal or social"
            ) from None


@dataclass(frozen=True)
class RoomLayout:
    side_length: float
    zone_centers: tuple[Position2, Position2, Position2, Position2]
    zone_radius: float
    wall_clearance: float = WALL_CLEARANCE


@dataclass(frozen=True)
class Correction:
    """Outcome of :func:`proxemic_correction`."""

    position: Position2
    magnitude: float
    attained: bool


def _unit(origin, selected) -> tuple[Position2, float]:
    d = Position2(selected[0] - origin[0], selected[1] - origin[1])
    length = d.norm()
    if length == 0.0:
        raise GeometryError("origin and selected destination coincide; no teleport direction")
    return d.scaled(1.0 / length), length


def adjust_destination(origin, selected, direction: Direction, magnitude: float) -> Position2:
    """Shift ``selected`` along the origin->selected ray by ``magnitude``.

    Backward shifts are clamped so the result never passes behind the origin.
    """
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    u, length = _unit(origin, selected)
    if direction is Direction.FORWARD:
        return Position2(selected[0] + u.x * magnitude, selected[1] + u.y * magnitude)
    if magnitude >= length:
        return Position2(float(origin[0]), float(origin[1]))
    return Position2(selected[0] - u.x * magnitude, selected[1] - u.y * magnitude)


def clamp_magnitude(origin, selected, direction: Direction, magnitude: float,
                    range_kind: RangeKind) -> float:
    """Effective adjustment: the min of the request, the range cap and, for
    backward moves, the distance back to the origin."""
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    m = min(magnitude, range_kind.max_adjustment)
    if direction is Direction.BACKWARD:
        m = min(m, math.hypot(selected[0] - origin[0], selected[1] - origin[1]))
    return max(m, 0.0)


def build_layout(range_kind: RangeKind, wall_clearance: float = WALL_CLEARANCE) -> RoomLayout:
    """Square room centred on the origin with the four zones on its diagonals."""
    c = range_kind.center_distance / math.sqrt(2.0)
    centers = (
        Position2(c, c),
        Position2(-c, c),
        Position2(-c, -c),
        Position2(c, -c),
    )
    side = 2.0 * (c + range_kind.zone_radius + wall_clearance)
    return RoomLayout(side, centers, range_kind.zone_radius, wall_clearance)


def proxemic_correction(origin, selected, partner, backward_threshold: float,
                        target: ProxemicZone) -> Correction:
    """Pull a teleport back far enough to leave ``partner`` at least at the
    inner edge of ``target``, spending at most ``backward_threshold``.

    When the budget cannot reach the boundary the full budget is applied and
    ``attained`` is False.
    """
    if backward_threshold < 0:
        raise ValueError("backward_threshold must be non-negative")
    u, length = _unit(origin, selected)
    selected = Position2(float(selected[0]), float(selected[1]))
    radius = target.inner
    w = selected - partner
    if w.norm() >= radius:
        return Correction(selected, 0.0, True)

    # smallest m >= 0 with |w - m u| = radius; 0 lies strictly between the roots
    wu = w.x * u.x + w.y * u.y
    needed = wu + math.sqrt(max(wu * wu - (w.x * w.x + w.y * w.y) + radius * radius, 0.0))
    budget = min(backward_threshold, length)
    if needed <= budget:
        return Correction(adjust_destination(origin, selected, Direction.BACKWARD, needed),
                          needed, True)
    return Correction(adjust_destination(origin, selected, Direction.BACKWARD, budget),
                      budget, False)
