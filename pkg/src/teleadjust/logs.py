"""CSV persistence for trial logs and participant datasets.

Decimals are written with exactly six fractional digits and booleans as
0/1, so two runs with the same configuration produce identical bytes.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .analysis import CONDITION_KEYS, DatasetRow, ExperimentDataset
from .geometry import Position2
from .observer import TrialKind
from .session import TrialRecord
from .staircase import StaircaseId

TRIAL_LOG_COLUMNS = (
    "participant_id", "block_index", "block_range", "trial_index", "kind", "staircase_id",
    "direction", "zone_index", "origin_x", "origin_y", "selected_x", "selected_y",
    "adjusted_x", "adjusted_y", "commanded_magnitude", "effective_magnitude",
    "response_detected", "reversal_logged",
)

DATASET_COLUMNS = (
    "participant_id", "included", "catch_excluded", "small_first", *CONDITION_KEYS,
    "sot_error", "sbsod", "vr_experience",
)


class ParseError(ValueError):
    def __init__(self, path, row: int, message: str):
        super().__init__(f"{path}: row {row}: {message}")
        self.row = row


def fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _bool(flag: bool) -> str:
    return "1" if flag else "0"


def trial_row(t: TrialRecord) -> list[str]:
    return [
        str(t.participant_id), str(t.block_index), t.block_range, str(t.trial_index),
        t.kind.value, t.staircase_id.value if t.staircase_id else "",
        t.direction.value if t.direction else "", str(t.zone_index),
        fmt(t.origin.x), fmt(t.origin.y), fmt(t.selected.x), fmt(t.selected.y),
        fmt(t.adjusted.x), fmt(t.adjusted.y), fmt(t.commanded_magnitude),
        fmt(t.effective_magnitude), _bool(t.response_detected), _bool(t.reversal_logged),
    ]


def write_trial_log(path, trials) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIAL_LOG_COLUMNS)
        for t in trials:
            writer.writerow(trial_row(t))


def _parse_bool(value: str) -> bool:
    if value not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, got {value!r}")
    return value == "1"


def _read(path, columns):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != columns:
            raise ParseError(path, 1, "header does not match the expected columns")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise ParseError(path, lineno, f"expected {len(columns)} fields, got {len(row)}")
            yield lineno, dict(zip(columns, row))


def read_trial_log(path) -> list[TrialRecord]:
    out = []
    for lineno, r in _read(path, TRIAL_LOG_COLUMNS):
        try:
            kind = TrialKind(r["kind"])
            sid = StaircaseId(r["staircase_id"]) if r["staircase_id"] else None
            if (r["direction"] or None) != (kind.direction.value if kind.direction else None):
                raise ValueError("direction does not match trial kind")
            out.append(TrialRecord(
                participant_id=int(r["participant_id"]),
                block_index=int(r["block_index"]),
                block_range=r["block_range"],
                trial_index=int(r["trial_index"]),
                kind=kind,
                staircase_id=sid,
                zone_index=int(r["zone_index"]),
                origin=Position2(float(r["origin_x"]), float(r["origin_y"])),
                selected=Position2(float(r["selected_x"]), float(r["selected_y"])),
                adjusted=Position2(float(r["adjusted_x"]), float(r["adjusted_y"])),
                commanded_magnitude=float(r["commanded_magnitude"]),
                effective_magnitude=float(r["effective_magnitude"]),
                response_detected=_parse_bool(r["response_detected"]),
                reversal_logged=_parse_bool(r["reversal_logged"]),
            ))
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return out


def write_dataset(path, dataset: ExperimentDataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for row in dataset.rows:
            writer.writerow([
                str(row.participant_id), _bool(row.included), _bool(row.catch_excluded),
                _bool(row.small_first),
                *(fmt(row.thresholds.get(k, math.nan)) for k in CONDITION_KEYS),
                fmt(row.sot_error), fmt(row.sbsod), str(row.vr_experience),
            ])


def read_dataset(path) -> ExperimentDataset:
    rows = []
    seen = set()
    for lineno, r in _read(path, DATASET_COLUMNS):
        try:
            pid = int(r["participant_id"])
            if pid in seen:
                raise ValueError(f"duplicate participant_id {pid}")
            seen.add(pid)
            thresholds = {k: float(r[k]) for k in CONDITION_KEYS}
            included = _parse_bool(r["included"])
            if included and any(not (v >= 0) for v in thresholds.values()):
                raise ValueError("included participant needs four non-negative thresholds")
            rows.append(DatasetRow(
                participant_id=pid,
                included=included,
                thresholds=thresholds,
                sot_error=float(r["sot_error"]),
                sbsod=float(r["sbsod"]),
                vr_experience=int(r["vr_experience"]),
                small_first=_parse_bool(r["small_first"]),
                catch_excluded=_parse_bool(r["catch_excluded"]),
            ))
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return ExperimentDataset(rows)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
