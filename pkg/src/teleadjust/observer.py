"""Simulated participants.

An :class:`ObserverModel` answers "did you land where you selected?" with a
cumulative-Gaussian psychometric function carrying a false-alarm floor
(``false_alarm_gamma``) and a lapse ceiling (``lapse_lambda``). Populations of
observers are drawn from a Gaussian copula so that trait scores can carry a
chosen correlation with individual thresholds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy import optimize, stats

from .geometry import Direction, Position2

CONDITIONS = (
    (Direction.FORWARD, "small"),
    (Direction.FORWARD, "large"),
    (Direction.BACKWARD, "small"),
    (Direction.BACKWARD, "large"),
)

PAPER_PSE_MEANS = {
    (Direction.BACKWARD, "large"): 1.64,
    (Direction.BACKWARD, "small"): 1.33,
    (Direction.FORWARD, "large"): 0.98,
    (Direction.FORWARD, "small"): 0.75,
}


class TrialKind(enum.Enum):
    TRAINING = "training"
    CATCH = "catch"
    STAIRCASE_FORWARD = "staircase_forward"
    STAIRCASE_BACKWARD = "staircase_backward"

    @property
    def direction(self) -> Direction | None:
        return {
            TrialKind.STAIRCASE_FORWARD: Direction.FORWARD,
            TrialKind.STAIRCASE_BACKWARD: Direction.BACKWARD,
        }.get(self)


class Responder(Protocol):
    """Anything that can stand in for a participant during a block."""

    def select_destination(self, center: Position2, radius: float,
                           rng: np.random.Generator) -> Position2: ...

    def respond(self, kind: TrialKind, condition, magnitude: float,
                rng: np.random.Generator) -> bool: ...


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def uniform_disc(center, radius: float, rng: np.random.Generator) -> Position2:
    """Area-uniform point in a disc."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    u, theta = rng.random(2)
    r = radius * math.sqrt(u)
    theta *= 2.0 * math.pi
    return Position2(center[0] + r * math.cos(theta), center[1] + r * math.sin(theta))


@dataclass(frozen=True)
class ObserverModel:
    pse: dict = field(default_factory=lambda: dict(PAPER_PSE_MEANS))
    slope_sigma: float = 0.25
    false_alarm_gamma: float = 0.02
    lapse_lambda: float = 0.02
    vr_experience: int = 3
    sbsod: float = 4.0
    sot_error: float = 30.0

    def __post_init__(self):
        if self.slope_sigma <= 0:
            raise ValueError("slope_sigma must be > 0")
        g, lam = self.false_alarm_gamma, self.lapse_lambda
        if g < 0 or lam < 0 or g + lam >= 1:
            raise ValueError("need 0 <= gamma, lambda and gamma + lambda < 1")
        if any(v < 0 for v in self.pse.values()):
            raise ValueError("pse values must be >= 0")

    def select_destination(self, center, radius, rng):
        return select_destination(self, center, radius, rng)

    def respond(self, kind, condition, magnitude, rng):
        return respond(self, kind, condition, magnitude, rng)

    def target_point(self, condition) -> float:
        """Stimulus detected with probability 0.5 (what 1-up-1-down tracks)."""
        g, lam = self.false_alarm_gamma, self.lapse_lambda
        q = (0.5 - g) / (1.0 - g - lam)
        if not 0.0 < q < 1.0:
            raise ValueError("psychometric function never crosses 0.5")
        return self.pse[condition] + self.slope_sigma * float(stats.norm.ppf(q))


def detect_probability(model: ObserverModel, condition, magnitude: float) -> float:
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    g, lam = model.false_alarm_gamma, model.lapse_lambda
    z = (magnitude - model.pse[condition]) / model.slope_sigma
    return g + (1.0 - g - lam) * std_normal_cdf(z)


def respond(model: ObserverModel, kind: TrialKind, condition, magnitude: float,
            rng: np.random.Generator) -> bool:
    """One yes/no answer; True means the adjustment was detected."""
    if kind.direction is None:
        p = model.false_alarm_gamma
    else:
        p = detect_probability(model, condition, magnitude)
    return bool(rng.random() < p)


def select_destination(model: ObserverModel, center, radius: float,
                       rng: np.random.Generator) -> Position2:
    return uniform_disc(center, radius, rng)


@dataclass(frozen=True)
class StepResponder:
    """Noise-free observer: detects iff the adjustment exceeds ``threshold``.

    Never reports catch or training trials as adjusted unless
    ``always_detect`` is set.
    """

    threshold: float
    always_detect: bool = False

    def select_destination(self, center, radius, rng):
        return uniform_disc(center, radius, rng)

    def respond(self, kind, condition, magnitude, rng):
        if self.always_detect:
            return True
        if kind.direction is None:
            return False
        return magnitude > self.threshold


# ---------------------------------------------------------------- population

def _truncnorm_loc_for_mean(mean: float, sd: float) -> float:
    """Location of a normal(loc, sd) truncated at 0 whose mean is ``mean``."""
    def gap(loc):
        return stats.truncnorm.mean((0.0 - loc) / sd, np.inf, loc=loc, scale=sd) - mean
    if mean <= 0:
        raise ValueError("truncated-at-zero mean must be positive")
    return optimize.brentq(gap, mean - 20 * sd, mean, xtol=1e-12)


_GRID = np.linspace(-8.0, 8.0, 32001)
_PHI = stats.norm.pdf(_GRID)


def _linear_loading(transform) -> float:
    """corr(f(Z), Z) for standard normal Z, by quadrature on a fine grid."""
    f = transform(_GRID)
    w = _PHI / np.trapezoid(_PHI, _GRID)
    mean = np.trapezoid(f * w, _GRID)
    var = np.trapezoid((f - mean) ** 2 * w, _GRID)
    return float(np.trapezoid((f - mean) * _GRID * w, _GRID) / math.sqrt(var))


@dataclass(frozen=True)
class Population:
    """Gaussian-copula distribution over :class:`ObserverModel`.

    ``trait_correlations`` maps ``(trait, condition)`` to the Pearson
    correlation wanted between the trait score and the condition's PSE;
    cells not listed are uncorrelated. Latent correlations are scaled by
    each marginal's linear loading so the observed Pearson r matches.
    """

    pse_means: dict = field(default_factory=lambda: dict(PAPER_PSE_MEANS))
    pse_sd: float = 0.4
    condition_correlation: float = 0.0
    trait_correlations: dict = field(default_factory=lambda: {
        ("sot_error", (Direction.BACKWARD, "large")): 0.49,
        ("vr_experience", (Direction.BACKWARD, "small")): -0.49,
    })
    slope_sigma: float = 0.25
    false_alarm_gamma: float = 0.02
    lapse_lambda: float = 0.02
    sot_mean: float = 30.0
    sot_sd: float = 15.0
    sbsod_mean: float = 4.3
    sbsod_sd: float = 1.0
    vr_experience_probs: tuple = (0.2, 0.25, 0.25, 0.2, 0.1)

    TRAITS = ("sot_error", "sbsod", "vr_experience")

    def __post_init__(self):
        if self.pse_sd <= 0:
            raise ValueError("pse_sd must be > 0")
        if not -1.0 / 3.0 < self.condition_correlation < 1.0:
            raise ValueError("condition_correlation must lie in (-1/3, 1)")
        probs = np.asarray(self.vr_experience_probs, dtype=float)
        if probs.shape != (5,) or np.any(probs < 0) or not math.isclose(probs.sum(), 1.0):
            raise ValueError("vr_experience_probs must be 5 non-negative weights summing to 1")
        for (trait, cond), r in self.trait_correlations.items():
            if trait not in self.TRAITS or cond not in self.pse_means:
                raise ValueError(f"unknown trait correlation cell {(trait, cond)!r}")
            if not -1 < r < 1:
                raise ValueError("trait correlations must lie in (-1, 1)")
        ObserverModel(dict(self.pse_means), self.slope_sigma, self.false_alarm_gamma,
                      self.lapse_lambda)
        self._latent_correlation()  # fail early on an infeasible matrix

    # marginal transforms from a standard-normal latent variable
    def _pse_transform(self, cond):
        sd = self.pse_sd
        loc = _truncnorm_loc_for_mean(self.pse_means[cond], sd)
        a = -loc / sd
        return lambda z: stats.truncnorm.ppf(stats.norm.cdf(z), a, np.inf, loc=loc, scale=sd)

    def _sot_transform(self):
        a = (0.0 - self.sot_mean) / self.sot_sd
        b = (180.0 - self.sot_mean) / self.sot_sd
        return lambda z: stats.truncnorm.ppf(stats.norm.cdf(z), a, b,
                                             loc=self.sot_mean, scale=self.sot_sd)

    def _sbsod_transform(self):
        a = (1.0 - self.sbsod_mean) / self.sbsod_sd
        b = (7.0 - self.sbsod_mean) / self.sbsod_sd
        return lambda z: stats.truncnorm.ppf(stats.norm.cdf(z), a, b,
                                             loc=self.sbsod_mean, scale=self.sbsod_sd)

    def _vr_transform(self):
        cuts = stats.norm.ppf(np.cumsum(self.vr_experience_probs)[:-1])
        return lambda z: 1 + np.searchsorted(cuts, z, side="right")

    def _transforms(self):
        cached = self.__dict__.get("_transform_cache")
        if cached is not None:
            return cached
        out = [self._pse_transform(c) for c in CONDITIONS]
        out += [self._sot_transform(), self._sbsod_transform(), self._vr_transform()]
        object.__setattr__(self, "_transform_cache", out)
        return out

    def _latent_correlation(self) -> np.ndarray:
        cached = self.__dict__.get("_corr_cache")
        if cached is not None:
            return cached
        k = len(CONDITIONS)
        corr = np.eye(k + 3)
        corr[:k, :k] = self.condition_correlation
        np.fill_diagonal(corr, 1.0)
        transforms = self._transforms()
        for (trait, cond), r in self.trait_correlations.items():
            i = CONDITIONS.index(cond)
            j = k + self.TRAITS.index(trait)
            latent = r / (_linear_loading(transforms[i]) * _linear_loading(transforms[j]))
            corr[i, j] = corr[j, i] = latent
        if np.linalg.eigvalsh(corr).min() <= 0:
            raise ValueError("requested correlations are not jointly attainable")
        object.__setattr__(self, "_corr_cache", corr)
        return corr

    def sample(self, n: int, rng: np.random.Generator) -> list[ObserverModel]:
        corr = self._latent_correlation()
        z = rng.standard_normal((n, corr.shape[0])) @ np.linalg.cholesky(corr).T
        columns = [f(z[:, i]) for i, f in enumerate(self._transforms())]
        k = len(CONDITIONS)
        models = []
        for row in range(n):
            pse = {c: float(max(columns[i][row], 0.0)) for i, c in enumerate(CONDITIONS)}
            models.append(ObserverModel(
                pse=pse,
                slope_sigma=self.slope_sigma,
                false_alarm_gamma=self.false_alarm_gamma,
                lapse_lambda=self.lapse_lambda,
                sot_error=float(columns[k][row]),
                sbsod=float(columns[k + 1][row]),
                vr_experience=int(columns[k + 2][row]),
            ))
        return models


def paper_population(**overrides) -> Population:
    """Population centred on the published per-condition thresholds."""
    return Population(**overrides)
