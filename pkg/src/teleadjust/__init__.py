"""Adjusted teleportation: destination geometry, detection-threshold
staircases, simulated observers and the statistics used to analyse them."""

from .analysis import (
    ExperimentDataset,
    art_anova,
    bh_fdr,
    correlation_table,
    descriptives,
    pearson,
    rm_anova_2x2,
)
from .geometry import (
    LARGE,
    SMALL,
    Correction,
    Direction,
    GeometryError,
    Position2,
    ProxemicZone,
    RangeKind,
    RoomLayout,
    adjust_destination,
    build_layout,
    clamp_magnitude,
    proxemic_correction,
)
from .observer import ObserverModel, Population, StepResponder, TrialKind, paper_population
from .session import BlockConfig, BlockResult, TrialRecord, run_block, run_experiment
from .staircase import StaircaseConfig, StaircaseId, init_pair, estimate_threshold

__version__ = "0.1.0"
