"""Result reports and staircase traces."""

from __future__ import annotations

import math

from .analysis import (
    CONDITION_KEYS,
    EFFECTS,
    TRAITS,
    AnalysisError,
    ExperimentDataset,
    art_anova,
    correlation_table,
    descriptives,
)
from .geometry import Direction
from .staircase import StaircaseConfig, StaircaseError, StaircaseId, estimate_from_reversals

COLUMN_TITLES = {
    "forward_small": "Forward (Small)",
    "forward_large": "Forward (Large)",
    "backward_small": "Back (Small)",
    "backward_large": "Back (Large)",
}
TRAIT_TITLES = {"sot_error": "SOT", "sbsod": "SBSOD", "vr_experience": "VR Experience"}


def _num(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf"
    return round(float(x), 6)


def build_report(dataset: ExperimentDataset) -> dict:
    """JSON-ready summary: descriptives, ART ANOVA and the trait correlation table."""
    included = dataset.included()
    report: dict = {"n_participants": len(dataset.rows), "n_included": len(included)}

    try:
        desc = descriptives(dataset)
        report["descriptives"] = {
            k: {"n": d.n, "mean": _num(d.mean), "sd": _num(d.sd), "q1": _num(d.q1),
                "median": _num(d.median), "q3": _num(d.q3),
                "outliers": [included[i].participant_id for i in d.outliers]}
            for k, d in desc.items()}
    except AnalysisError as exc:
        report["descriptives"] = {"notice": str(exc)}

    try:
        anova = art_anova(dataset.threshold_table())
        effects = {}
        for e in EFFECTS:
            r = anova[e]
            effects[e] = {"F": _num(r.F), "df": list(r.df), "p": _num(r.p),
                          "partial_eta_sq": _num(r.partial_eta_sq),
                          "significant": r.p < 0.05, "degenerate": r.degenerate}
        report["anova"] = {"method": "aligned rank transform, repeated measures",
                           "degenerate": any(anova[e].degenerate for e in EFFECTS),
                           "effects": effects}
    except AnalysisError as exc:
        report["anova"] = {"notice": str(exc)}

    if len(included) < 3:
        report["correlations"] = {"notice": "insufficient n: correlations need at least 3 "
                                            "included participants"}
    else:
        cells = correlation_table(dataset)
        report["correlations"] = {
            "adjustment": "benjamini-hochberg",
            "cells": [{"trait": c.trait, "condition": c.condition, "r": _num(c.r),
                       "p": _num(c.p), "p_adjusted": _num(c.p_adjusted),
                       "significant": c.significant} for c in cells],
        }
    return report


def format_report(report: dict) -> str:
    lines = [f"participants: {report['n_included']} included of {report['n_participants']}", ""]

    desc = report["descriptives"]
    lines.append("thresholds (m)")
    if "notice" in desc:
        lines.append(f"  {desc['notice']}")
    else:
        lines.append(f"  {'condition':<16}{'n':>4}{'mean':>9}{'sd':>9}{'Q1':>9}"
                     f"{'median':>9}{'Q3':>9}  outliers")
        for k in CONDITION_KEYS:
            d = desc[k]
            out = ",".join(str(i) for i in d["outliers"]) or "-"
            lines.append(f"  {COLUMN_TITLES[k]:<16}{d['n']:>4}{d['mean']:>9.3f}{d['sd']:>9.3f}"
                         f"{d['q1']:>9.3f}{d['median']:>9.3f}{d['q3']:>9.3f}  {out}")
    lines.append("")

    anova = report["anova"]
    lines.append("ART repeated-measures ANOVA")
    if "notice" in anova:
        lines.append(f"  {anova['notice']}")
    else:
        if anova["degenerate"]:
            lines.append("  DEGENERATE: zero error variance in at least one effect")
        for e in EFFECTS:
            r = anova["effects"][e]
            F = "inf" if r["F"] == "inf" else f"{r['F']:.2f}"
            p = "p < 0.001" if r["p"] < 0.001 else f"p = {r['p']:.3f}"
            tag = "" if r["significant"] else " (n.s.)"
            lines.append(f"  {e}: F({r['df'][0]},{r['df'][1]}) = {F}, {p}, "
                         f"partial eta^2 = {r['partial_eta_sq']:.2f}{tag}")
    lines.append("")

    corr = report["correlations"]
    lines.append("Pearson correlations (* = FDR-adjusted p < 0.05)")
    if "notice" in corr:
        lines.append(f"  {corr['notice']}")
    else:
        cells = {(c["trait"], c["condition"]): c for c in corr["cells"]}
        lines.append(f"  {'':<15}" + "".join(f"{COLUMN_TITLES[k]:>17}" for k in CONDITION_KEYS))
        for trait in TRAITS:
            row = f"  {TRAIT_TITLES[trait]:<15}"
            for k in CONDITION_KEYS:
                c = cells[(trait, k)]
                txt = "n/a" if c["r"] is None else f"{c['r']:.2f}" + ("*" if c["significant"] else "")
                row += f"{txt:>17}"
            lines.append(row)
    return "\n".join(lines) + "\n"


def staircase_trace(records, participant: int, block: int, direction: Direction,
                    staircase: StaircaseId, config: StaircaseConfig | None = None):
    """Stimulus series of one inner staircase, plus the pair's threshold if it converged.

    Returns ``(series, estimate)`` where ``series`` is a list of
    ``(trial_index, stimulus)`` and ``estimate`` is a ThresholdEstimate or None.
    """
    config = config or StaircaseConfig()
    block_rows = [r for r in records if r.participant_id == participant and r.block_index == block]
    if not block_rows:
        raise LookupError(f"no trials for participant {participant}, block {block}")
    pair_rows = [r for r in block_rows if r.direction is direction]
    series = [(r.trial_index, r.commanded_magnitude) for r in pair_rows
              if r.staircase_id is staircase]
    if not series:
        raise LookupError(f"no {direction.value}:{staircase.value} staircase trials "
                          f"for participant {participant}, block {block}")
    revs = {sid: [(r.trial_index, r.commanded_magnitude) for r in pair_rows
                  if r.staircase_id is sid and r.reversal_logged] for sid in StaircaseId}
    up, lo = revs[StaircaseId.UPPER], revs[StaircaseId.LOWER]
    estimate = None
    if min(len(up), len(lo)) >= config.reversals_to_converge:
        try:
            estimate = estimate_from_reversals([v for _, v in up], [v for _, v in lo], config,
                                               [i for i, _ in up], [i for i, _ in lo])
        except StaircaseError:
            estimate = None
    return series, estimate


def format_trace(series, estimate) -> str:
    lines = ["trial_index,stimulus"]
    lines += [f"{i},{v:.6f}" for i, v in series]
    if estimate is None:
        lines.append("# threshold: not converged")
    else:
        lines.append(f"# threshold: {estimate.value:.6f}")
    return "\n".join(lines) + "\n"
