"""Block and experiment orchestration.

A block opens with training teleports, then draws each trial uniformly from
whichever of {forward staircase pair, backward staircase pair, catch trial}
still has work left. The participant always teleports from the room centre
into one of four zones picked uniformly per trial.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import CONDITION_KEYS, DatasetRow, ExperimentDataset, condition_key
from .geometry import (
    LARGE,
    SMALL,
    Direction,
    Position2,
    RangeKind,
    adjust_destination,
    build_layout,
    clamp_magnitude,
)
from .observer import Population, Responder, TrialKind
from .staircase import (
    ConfigError,
    StaircaseConfig,
    StaircaseId,
    StaircasePair,
    ThresholdEstimate,
    estimate_threshold,
    init_pair,
    next_stimulus,
    record_response,
)

log = logging.getLogger(__name__)

ORIGIN = Position2(0.0, 0.0)


class SessionError(RuntimeError):
    """A responder failed while a block was running."""


@dataclass(frozen=True)
class BlockConfig:
    range: RangeKind
    training_trials: int = 10
    catch_trials: int = 10
    catch_pass_fraction: float = 0.70
    staircase_config: StaircaseConfig | None = None
    trial_cap: int = 400

    def __post_init__(self):
        if self.training_trials < 0 or self.catch_trials < 0:
            raise ConfigError("trial counts must be >= 0")
        if not 0 < self.catch_pass_fraction <= 1:
            raise ConfigError("catch_pass_fraction must lie in (0, 1]")
        if self.trial_cap < 1:
            raise ConfigError("trial_cap must be >= 1")
        if self.staircase_config is None:
            sc = StaircaseConfig(stimulus_ceiling=self.range.max_adjustment)
            object.__setattr__(self, "staircase_config", sc)
        self.staircase_config.validate()


@dataclass(frozen=True)
class TrialRecord:
    participant_id: int
    block_index: int
    block_range: str
    trial_index: int
    kind: TrialKind
    staircase_id: StaircaseId | None
    zone_index: int
    origin: Position2
    selected: Position2
    adjusted: Position2
    commanded_magnitude: float
    effective_magnitude: float
    response_detected: bool
    reversal_logged: bool
    rng_cursor: tuple = ()

    @property
    def direction(self) -> Direction | None:
        return self.kind.direction


@dataclass
class BlockResult:
    range: RangeKind
    thresholds: dict  # Direction -> ThresholdEstimate, or None when not converged
    catch_correct: int
    catch_total: int
    excluded: bool
    trials: list[TrialRecord] = field(default_factory=list)
    pairs: dict = field(default_factory=dict)  # Direction -> final StaircasePair

    @property
    def converged(self) -> bool:
        return all(t is not None for t in self.thresholds.values())


def rng_cursor(rng: np.random.Generator) -> tuple:
    """Snapshot of the generator position; :func:`restore_cursor` rewinds to it."""
    st = rng.bit_generator.state
    inner = st["state"]
    return (st["bit_generator"], inner["state"], inner["inc"], st["has_uint32"], st["uinteger"])


def restore_cursor(cursor: tuple) -> np.random.Generator:
    name, state, inc, has_uint32, uinteger = cursor
    bitgen = getattr(np.random, name)()
    bitgen.state = {"bit_generator": name, "state": {"state": state, "inc": inc},
                    "has_uint32": has_uint32, "uinteger": uinteger}
    return np.random.Generator(bitgen)


def evaluate_catch(records, pass_fraction: float = 0.70) -> tuple[int, bool]:
    """Score catch trials; a catch answer is correct when nothing was detected."""
    records = list(records)
    if not records:
        raise ValueError("no catch trials to score")
    if any(r.kind is not TrialKind.CATCH for r in records):
        raise ValueError("evaluate_catch accepts catch-trial records only")
    correct = sum(not r.response_detected for r in records)
    return correct, correct / len(records) < pass_fraction


def run_block(config: BlockConfig, responder: Responder, rng: np.random.Generator,
              participant_id: int = 0, block_index: int = 0) -> BlockResult:
    rk = config.range
    layout = build_layout(rk)
    pairs: dict[Direction, StaircasePair] = {
        Direction.FORWARD: init_pair(config.staircase_config),
        Direction.BACKWARD: init_pair(config.staircase_config),
    }
    trials: list[TrialRecord] = []
    catch_left = config.catch_trials

    def teleport(kind, sid=None, commanded=0.0):
        cursor = rng_cursor(rng)
        zone = int(rng.integers(4))
        direction = kind.direction
        try:
            selected = responder.select_destination(layout.zone_centers[zone], rk.zone_radius, rng)
            selected = Position2(float(selected[0]), float(selected[1]))
            if direction is None:
                effective, adjusted = 0.0, selected
            else:
                effective = clamp_magnitude(ORIGIN, selected, direction, commanded, rk)
                adjusted = adjust_destination(ORIGIN, selected, direction, effective)
            detected = bool(responder.respond(kind, (direction, rk.name), effective, rng))
        except Exception as exc:
            raise SessionError(
                f"responder failed on trial {len(trials)} of block {block_index}: {exc}"
            ) from exc
        reversal = False
        if direction is not None:
            reversal = record_response(pairs[direction], sid, detected)
        trials.append(TrialRecord(
            participant_id, block_index, rk.name, len(trials), kind, sid, zone, ORIGIN,
            selected, adjusted, float(commanded), effective, detected, reversal, cursor,
        ))

    for _ in range(config.training_trials):
        if len(trials) >= config.trial_cap:
            break
        teleport(TrialKind.TRAINING)

    while len(trials) < config.trial_cap:
        kinds = []
        if not pairs[Direction.FORWARD].converged:
            kinds.append(TrialKind.STAIRCASE_FORWARD)
        if not pairs[Direction.BACKWARD].converged:
            kinds.append(TrialKind.STAIRCASE_BACKWARD)
        if catch_left > 0:
            kinds.append(TrialKind.CATCH)
        if not kinds:
            break
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind is TrialKind.CATCH:
            catch_left -= 1
            teleport(kind)
        else:
            sid, stimulus = next_stimulus(pairs[kind.direction], rng)
            teleport(kind, sid, stimulus)

    catches = [t for t in trials if t.kind is TrialKind.CATCH]
    if catches:
        correct, excluded = evaluate_catch(catches, config.catch_pass_fraction)
    else:
        correct, excluded = 0, False
    thresholds: dict[Direction, ThresholdEstimate | None] = {}
    for direction, pair in pairs.items():
        thresholds[direction] = estimate_threshold(pair) if pair.converged else None
    if any(t is None for t in thresholds.values()):
        log.info("block %d of participant %d hit the %d-trial cap", block_index,
                 participant_id, config.trial_cap)
    return BlockResult(rk, thresholds, correct, len(catches), excluded, trials, pairs)


@dataclass
class ParticipantResult:
    participant_id: int
    observer: object
    small_first: bool
    blocks: list[BlockResult]

    @property
    def catch_excluded(self) -> bool:
        return any(b.excluded for b in self.blocks)

    def thresholds(self) -> dict[str, float]:
        out = {}
        for block in self.blocks:
            for direction, est in block.thresholds.items():
                out[condition_key(direction, block.range.name)] = (
                    float("nan") if est is None else est.value)
        return out


def default_block_configs(**overrides) -> dict[str, BlockConfig]:
    return {rk.name: BlockConfig(rk, **overrides) for rk in (SMALL, LARGE)}


def participant_rng(seed: int, participant_id: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1, participant_id])


def run_participants(n_participants: int, population: Population, seed: int,
                     block_configs: dict[str, BlockConfig] | None = None
                     ) -> list[ParticipantResult]:
    """Simulate every participant with a private seed stream.

    Even-indexed participants run the small block first, odd-indexed the
    large block first.
    """
    if n_participants < 1:
        raise ValueError("need at least one participant")
    configs = block_configs or default_block_configs()
    observers = population.sample(n_participants, np.random.default_rng([seed, 0]))
    results = []
    for pid, observer in enumerate(observers):
        rng = participant_rng(seed, pid)
        small_first = pid % 2 == 0
        order = ("small", "large") if small_first else ("large", "small")
        blocks = [run_block(configs[name], observer, rng, pid, b) for b, name in enumerate(order)]
        results.append(ParticipantResult(pid, observer, small_first, blocks))
    return results


def dataset_from_results(results: list[ParticipantResult]) -> ExperimentDataset:
    rows = []
    for res in results:
        thresholds = res.thresholds()
        complete = all(np.isfinite(thresholds.get(k, np.nan)) for k in CONDITION_KEYS)
        obs = res.observer
        rows.append(DatasetRow(
            participant_id=res.participant_id,
            included=complete and not res.catch_excluded,
            thresholds=thresholds,
            sot_error=float(getattr(obs, "sot_error", np.nan)),
            sbsod=float(getattr(obs, "sbsod", np.nan)),
            vr_experience=int(getattr(obs, "vr_experience", 0)),
            small_first=res.small_first,
            catch_excluded=res.catch_excluded,
        ))
    return ExperimentDataset(rows)


def run_experiment(n_participants: int, population: Population, seed: int,
                   block_configs: dict[str, BlockConfig] | None = None) -> ExperimentDataset:
    return dataset_from_results(run_participants(n_participants, population, seed, block_configs))


def with_staircase(config: BlockConfig, **changes) -> BlockConfig:
    """Copy of ``config`` with staircase fields replaced."""
    return replace(config, staircase_config=replace(config.staircase_config, **changes))
