"""Interleaved 1-up-1-down dual staircase.

Two inner staircases (one started above, one below the expected threshold)
run on the same configuration. Each response moves the stimulus one step:
down after a detection, up after a miss. During quick start the step is
doubled until the staircase's first reversal. A staircase is done after
``reversals_to_converge`` reversals; the threshold is the mean of the last
``reversals_to_average`` reversal values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# stimulus values are snapped to this many decimals so additive steps stay on the lattice
_DECIMALS = 9


class StaircaseError(RuntimeError):
    """Illegal operation for the current staircase state."""


class ConfigError(ValueError):
    """Invalid staircase or block configuration."""


class StaircaseId(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class Move(enum.Enum):
    NONE = 0
    UP = 1
    DOWN = -1


class Averaging(enum.Enum):
    PER_STAIRCASE = "per_staircase"  # last k of each inner staircase, 2k values
    POOLED = "pooled"  # last k reversals across both staircases in time order


CONVERGED = None


@dataclass(frozen=True)
class StaircaseConfig:
    start_upper: float = 2.0
    start_lower: float = 0.8
    base_step: float = 0.2
    reversals_to_converge: int = 5
    reversals_to_average: int = 3
    quick_start: bool = True
    stimulus_floor: float = 0.0
    stimulus_ceiling: float = 2.5
    averaging: Averaging = Averaging.PER_STAIRCASE

    def validate(self) -> None:
        if not self.start_upper > self.start_lower >= 0:
            raise ConfigError("start_upper must exceed start_lower, which must be >= 0")
        if self.base_step <= 0:
            raise ConfigError("base_step must be > 0")
        if self.reversals_to_average < 1 or self.reversals_to_converge < 1:
            raise ConfigError("reversal counts must be >= 1")
        if self.reversals_to_average > self.reversals_to_converge:
            raise ConfigError("reversals_to_average must not exceed reversals_to_converge")
        if not self.stimulus_floor <= self.start_lower:
            raise ConfigError("start_lower lies below stimulus_floor")
        if not self.start_upper <= self.stimulus_ceiling:
            raise ConfigError("start_upper lies above stimulus_ceiling")


@dataclass
class InnerStaircase:
    id: StaircaseId
    current_stimulus: float
    in_quick_start: bool
    last_move: Move = Move.NONE
    reversals: list[float] = field(default_factory=list)
    # pair-level sequence numbers of the reversals, for pooled averaging
    reversal_order: list[int] = field(default_factory=list)
    trial_count: int = 0
    history: list[float] = field(default_factory=list)

    def converged(self, config: StaircaseConfig) -> bool:
        return len(self.reversals) >= config.reversals_to_converge


@dataclass(frozen=True)
class ThresholdEstimate:
    value: float
    per_staircase_means: tuple[float, float]
    reversal_values_used: tuple[float, ...]


@dataclass
class StaircasePair:
    config: StaircaseConfig
    upper: InnerStaircase
    lower: InnerStaircase
    _sequence: int = 0

    def __getitem__(self, sid: StaircaseId) -> InnerStaircase:
        return self.upper if sid is StaircaseId.UPPER else self.lower

    @property
    def converged(self) -> bool:
        return self.upper.converged(self.config) and self.lower.converged(self.config)

    @property
    def trial_count(self) -> int:
        return self.upper.trial_count + self.lower.trial_count

    def pending(self) -> list[StaircaseId]:
        return [s.id for s in (self.upper, self.lower) if not s.converged(self.config)]


def init_pair(config: StaircaseConfig) -> StaircasePair:
    config.validate()
    return StaircasePair(
        config,
        InnerStaircase(StaircaseId.UPPER, config.start_upper, config.quick_start),
        InnerStaircase(StaircaseId.LOWER, config.start_lower, config.quick_start),
    )


def next_stimulus(pair: StaircasePair, rng: np.random.Generator):
    """Pick an unfinished inner staircase uniformly at random.

    Returns ``(staircase_id, stimulus)``, or ``CONVERGED`` (None) when both
    staircases are done. No random number is consumed when only one
    staircase remains.
    """
    pending = pair.pending()
    if not pending:
        return CONVERGED
    sid = pending[0] if len(pending) == 1 else pending[int(rng.integers(2))]
    return sid, pair[sid].current_stimulus


def record_response(pair: StaircasePair, sid: StaircaseId, detected: bool) -> bool:
    """Apply one response to the named staircase in place.

    Returns True when the response logged a reversal.
    """
    cfg = pair.config
    s = pair[sid]
    if s.converged(cfg):
        raise StaircaseError(f"{sid.value} staircase has already converged")

    move = Move.DOWN if detected else Move.UP
    reversal = s.last_move is not Move.NONE and move is not s.last_move
    pre_move = s.current_stimulus
    if reversal:
        s.reversals.append(pre_move)
        s.reversal_order.append(pair._sequence)
        s.in_quick_start = False

    step = cfg.base_step * 2.0 if s.in_quick_start else cfg.base_step
    new = pre_move + move.value * step
    s.current_stimulus = round(min(max(new, cfg.stimulus_floor), cfg.stimulus_ceiling), _DECIMALS)
    s.last_move = move
    s.trial_count += 1
    s.history.append(pre_move)
    pair._sequence += 1
    return reversal


def estimate_from_reversals(upper: list[float], lower: list[float], config: StaircaseConfig,
                            upper_order=None, lower_order=None) -> ThresholdEstimate:
    """Threshold from the reversal lists of a finished pair.

    ``*_order`` gives the chronological position of each reversal and is only
    needed for pooled averaging.
    """
    k = config.reversals_to_average
    if len(upper) < k or len(lower) < k:
        raise StaircaseError("not enough reversals to estimate a threshold")
    up_used, lo_used = upper[-k:], lower[-k:]
    means = (float(np.mean(up_used)), float(np.mean(lo_used)))
    if config.averaging is Averaging.PER_STAIRCASE:
        used = tuple(up_used) + tuple(lo_used)
    else:
        if upper_order is None or lower_order is None:
            raise StaircaseError("pooled averaging needs the reversal order")
        tagged = sorted(list(zip(upper_order, upper)) + list(zip(lower_order, lower)))
        used = tuple(v for _, v in tagged[-k:])
    return ThresholdEstimate(float(np.mean(used)), means, used)


def estimate_threshold(pair: StaircasePair) -> ThresholdEstimate:
    if not pair.converged:
        raise StaircaseError("both inner staircases must converge before estimating")
    return estimate_from_reversals(pair.upper.reversals, pair.lower.reversals, pair.config,
                                   pair.upper.reversal_order, pair.lower.reversal_order)
