"""Statistics for simulated (or real) threshold datasets.

Thresholds are handled as an ``(n, 2, 2)`` array indexed by
``[participant, direction, size]`` with direction 0 = forward, 1 = backward
and size 0 = small, 1 = large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .geometry import Direction

DIRECTIONS = (Direction.FORWARD, Direction.BACKWARD)
SIZES = ("small", "large")
EFFECTS = ("direction", "size", "interaction")
TRAITS = ("sot_error", "sbsod", "vr_experience")


class AnalysisError(ValueError):
    pass


def condition_key(direction: Direction, size: str) -> str:
    return f"{direction.value}_{size}"


CONDITION_KEYS = tuple(condition_key(d, s) for d in DIRECTIONS for s in SIZES)


@dataclass
class DatasetRow:
    participant_id: int
    included: bool
    thresholds: dict  # condition_key -> meters (nan when a staircase never converged)
    sot_error: float
    sbsod: float
    vr_experience: int
    small_first: bool = True
    catch_excluded: bool = False


@dataclass
class ExperimentDataset:
    rows: list[DatasetRow] = field(default_factory=list)

    def included(self) -> list[DatasetRow]:
        return [r for r in self.rows if r.included]

    def threshold_table(self, included_only: bool = True) -> np.ndarray:
        rows = self.included() if included_only else self.rows
        table = np.empty((len(rows), 2, 2))
        for n, row in enumerate(rows):
            for i, d in enumerate(DIRECTIONS):
                for j, s in enumerate(SIZES):
                    key = condition_key(d, s)
                    if key not in row.thresholds:
                        raise AnalysisError(
                            f"participant {row.participant_id} is missing condition {key}")
                    table[n, i, j] = row.thresholds[key]
        return table

    def column(self, name: str, included_only: bool = True) -> np.ndarray:
        rows = self.included() if included_only else self.rows
        if name in CONDITION_KEYS:
            return np.array([r.thresholds[name] for r in rows], dtype=float)
        return np.array([getattr(r, name) for r in rows], dtype=float)


# ------------------------------------------------------------- descriptives

@dataclass(frozen=True)
class Descriptives:
    n: int
    mean: float
    sd: float
    q1: float
    median: float
    q3: float
    low_fence: float
    high_fence: float
    outliers: tuple[int, ...]  # indices into the column


def describe(values, fence: float = 3.0) -> Descriptives:
    """Mean, sample SD, type-7 quartiles and ``fence`` x IQR outlier flags."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise AnalysisError("cannot describe an empty column")
    if np.all(x == x[0]):
        c = float(x[0])
        return Descriptives(int(x.size), c, 0.0, c, c, c, c, c, ())
    q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
    iqr = q3 - q1
    lo, hi = q1 - fence * iqr, q3 + fence * iqr
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    outliers = tuple(int(i) for i in np.flatnonzero((x < lo) | (x > hi)))
    return Descriptives(int(x.size), float(x.mean()), sd, float(q1), float(med), float(q3),
                        float(lo), float(hi), outliers)


def descriptives(dataset: ExperimentDataset) -> dict[str, Descriptives]:
    if not dataset.included():
        raise AnalysisError("dataset has no included participants")
    return {key: describe(dataset.column(key)) for key in CONDITION_KEYS}


# ------------------------------------------------------------------- ANOVA

@dataclass(frozen=True)
class EffectResult:
    F: float
    df: tuple[int, int]
    p: float
    partial_eta_sq: float
    degenerate: bool = False


@dataclass(frozen=True)
class AnovaResult:
    direction: EffectResult
    size: EffectResult
    interaction: EffectResult

    def __getitem__(self, effect: str) -> EffectResult:
        return getattr(self, effect)


def _as_table(data) -> np.ndarray:
    y = np.asarray(data, dtype=float)
    if y.ndim != 3 or y.shape[1:] != (2, 2):
        raise AnalysisError("expected an (n, 2, 2) table of participant x direction x size")
    if not np.all(np.isfinite(y)):
        raise AnalysisError("table has missing (non-finite) cells")
    return y


# per-participant contrast weights for each effect of a 2x2 design
_CONTRASTS = {
    "direction": np.array([[-1.0, -1.0], [1.0, 1.0]]) / 2.0,
    "size": np.array([[-1.0, 1.0], [-1.0, 1.0]]) / 2.0,
    "interaction": np.array([[1.0, -1.0], [-1.0, 1.0]]) / 2.0,
}


def _effect_from_ss(ss_effect: float, ss_error: float, n: int, scale: float) -> EffectResult:
    df = (1, n - 1)
    if ss_error <= 1e-12 * scale:
        if ss_effect <= 1e-12 * scale:
            return EffectResult(0.0, df, 1.0, 0.0, degenerate=True)
        return EffectResult(math.inf, df, 0.0, 1.0, degenerate=True)
    F = ss_effect / (ss_error / df[1])
    p = float(stats.f.sf(F, *df))
    return EffectResult(float(F), df, p, float(ss_effect / (ss_effect + ss_error)))


def rm_anova_2x2(data) -> AnovaResult:
    """Two-way within-subject ANOVA for a 2x2 design.

    Each single-df effect is tested against its effect-by-participant
    interaction; with one df per effect this reduces to a one-sample test on
    the per-participant contrast scores.
    """
    y = _as_table(data)
    n = y.shape[0]
    if n < 2:
        raise AnalysisError("need at least two participants")
    within = y - y.mean(axis=(1, 2), keepdims=True)
    scale = max(float(np.sum(within ** 2)), np.finfo(float).tiny)
    out = {}
    for effect, w in _CONTRASTS.items():
        d = np.einsum("nij,ij->n", y, w)
        # contrast rows have squared norm 1, so these are the usual sums of squares
        ss_effect = n * d.mean() ** 2
        ss_error = float(np.sum((d - d.mean()) ** 2))
        out[effect] = _effect_from_ss(ss_effect, ss_error, n, scale)
    return AnovaResult(**out)


def _midranks(values: np.ndarray) -> np.ndarray:
    return stats.rankdata(values, method="average")


def aligned_values(data) -> dict[str, np.ndarray]:
    """Responses stripped of every estimated fixed effect except one.

    For each effect the value is the residual from the cell mean plus that
    effect's own estimate, so each aligned array sums to zero.
    """
    y = _as_table(data)
    grand = y.mean()
    cell = y.mean(axis=0)
    a = cell.mean(axis=1) - grand
    b = cell.mean(axis=0) - grand
    ab = cell - a[:, None] - b[None, :] - grand
    residual = y - cell[None, :, :]
    return {
        "direction": residual + a[None, :, None],
        "size": residual + b[None, None, :],
        "interaction": residual + ab[None, :, :],
    }


def align_rank_transform(data) -> dict[str, np.ndarray]:
    """Aligned responses for each effect, midranked over all ``4n`` values.

    Aligned values are compared at 11 significant digits of the data scale so
    that values equal up to rounding noise share a midrank.
    """
    y = _as_table(data)
    scale = max(float(np.abs(y).max()), np.finfo(float).tiny)
    return {effect: _midranks(np.round(v.ravel() / scale, 11)).reshape(v.shape)
            for effect, v in aligned_values(y).items()}


def art_anova(data) -> AnovaResult:
    """ART ANOVA: each effect is read off the RM-ANOVA of its own aligned ranks."""
    ranked = align_rank_transform(data)
    return AnovaResult(**{e: rm_anova_2x2(ranked[e])[e] for e in EFFECTS})


# ------------------------------------------------------------ correlations

def pearson(x, y) -> tuple[float, float]:
    """Product-moment correlation with a two-sided t-test p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("pearson needs two equal-length vectors")
    n = x.size
    if n < 3:
        raise AnalysisError("pearson needs at least three observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise AnalysisError("correlation undefined for a zero-variance input")
    r = float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, float(2.0 * stats.t.sf(abs(t), n - 2))


def bh_fdr(p_values) -> np.ndarray:
    """Benjamini-Hochberg adjusted p-values, in the input order."""
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1:
        raise AnalysisError("p_values must be one-dimensional")
    if np.any((p < 0) | (p > 1)):
        raise AnalysisError("p-values must lie in [0, 1]")
    m = p.size
    if m == 0:
        return p.copy()
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    adjusted = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adjusted, 1.0)
    return out


@dataclass(frozen=True)
class CorrelationCell:
    trait: str
    condition: str
    r: float | None
    p: float | None
    p_adjusted: float | None

    @property
    def significant(self) -> bool:
        return self.p_adjusted is not None and self.p_adjusted < 0.05


def correlation_table(dataset: ExperimentDataset) -> list[CorrelationCell]:
    """Trait x condition Pearson correlations with BH-FDR over all defined cells."""
    if len(dataset.included()) < 3:
        raise AnalysisError("need at least three included participants for correlations")
    raw = []
    for trait in TRAITS:
        t = dataset.column(trait)
        for key in CONDITION_KEYS:
            try:
                r, p = pearson(t, dataset.column(key))
            except AnalysisError:
                r = p = None
            raw.append((trait, key, r, p))
    defined = [i for i, c in enumerate(raw) if c[3] is not None]
    adjusted = dict(zip(defined, bh_fdr([raw[i][3] for i in defined])))
    return [CorrelationCell(tr, k, r, p, None if p is None else float(adjusted[i]))
            for i, (tr, k, r, p) in enumerate(raw)]


# ------------------------------------------------------------ trait scoring

def sbsod_score(responses, reverse_mask) -> float:
    """Mean of 15 Likert items (1-7), reverse-keyed items mapped r -> 8 - r."""
    r = np.asarray(responses)
    mask = np.asarray(reverse_mask, dtype=bool)
    if r.shape != (15,) or mask.shape != (15,):
        raise AnalysisError("SBSOD needs 15 responses and a 15-entry reverse mask")
    if np.any((r < 1) | (r > 7)) or np.any(r != np.round(r)):
        raise AnalysisError("SBSOD responses must be integers from 1 to 7")
    return float(np.where(mask, 8 - r, r).mean())


def sot_error(responses, correct) -> float:
    """Mean absolute angular error in degrees, wrapping at 360."""
    a = np.asarray(responses, dtype=float)
    b = np.asarray(correct, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise AnalysisError("SOT responses and answers must be equal-length vectors")
    if a.size == 0:
        raise AnalysisError("SOT needs at least one item")
    d = np.mod(np.abs(a - b), 360.0)
    return float(np.minimum(d, 360.0 - d).mean())
