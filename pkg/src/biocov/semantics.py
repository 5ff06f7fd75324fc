"""Semantic constraint checks and repairs for input layers.

Two constraints are supported: nonnegativity of a single layer, and the
ascending order of a (min, mean/avg, max) triple.  Repair preserves the
per-cell multiset of values (it sorts, never clamps); strict mode raises
instead so audit runs can reject corrupt sources.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConstraintViolationError, GridAlignmentError
from .grid import Raster, require_same_grid

REPAIR = "repair"
STRICT = "strict"


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of one constraint check over one layer (or triple)."""

    constraint_name: str
    violations: int
    repaired: int
    max_violation_magnitude: float

    def __post_init__(self):
        if self.violations < 0 or self.repaired < 0:
            raise ValueError("violation counts must be nonnegative")
        if self.repaired > self.violations:
            raise ValueError("cannot repair more cells than violate")


def check_nonnegative(r: Raster, name: str = "nonnegative") -> ConstraintReport:
    """Count finite cells below zero.  Never mutates."""
    v = r.values
    neg = np.isfinite(v) & (v < 0)
    count = int(neg.sum())
    worst = float(-v[neg].min()) if count else 0.0
    return ConstraintReport(name, count, 0, worst)


def repair_ordered_triple(
    lo: Raster,
    mid: Raster,
    hi: Raster,
    mode: str = REPAIR,
    name: str = "ordered_triple",
) -> tuple[Raster, Raster, Raster, ConstraintReport]:
    """Force lo <= mid <= hi per cell by sorting the triple.

    In ``repair`` mode the three values at each violating cell are replaced
    by their ascending sort; in ``strict`` mode any violation raises
    ConstraintViolationError.  The three inputs must share grid and NaN mask.
    """
    if mode not in (REPAIR, STRICT):
        raise ValueError(f"mode must be '{REPAIR}' or '{STRICT}', got {mode!r}")
    spec = require_same_grid(lo, mid, hi)
    mask = lo.nan_mask
    if not (np.array_equal(mask, mid.nan_mask) and np.array_equal(mask, hi.nan_mask)):
        raise GridAlignmentError(f"{name}: NaN masks differ across the triple")

    stacked = np.stack([lo.values, mid.values, hi.values])
    bad = (stacked[0] > stacked[1]) | (stacked[1] > stacked[2])
    violations = int(bad.sum())
    worst = 0.0
    if violations:
        gaps = np.maximum(stacked[0] - stacked[1], stacked[1] - stacked[2])
        worst = float(gaps[bad].max())

    if mode == STRICT and violations:
        report = ConstraintReport(name, violations, 0, worst)
        raise ConstraintViolationError(
            f"{name}: {violations} cells violate lo <= mid <= hi "
            f"(worst gap {worst:g})",
            report=report,
        )

    ordered = np.sort(stacked, axis=0)
    report = ConstraintReport(name, violations, violations, worst)
    return (
        Raster(spec, ordered[0]),
        Raster(spec, ordered[1]),
        Raster(spec, ordered[2]),
        report,
    )


def repair_nonnegative(
    r: Raster,
    mode: str = REPAIR,
    name: str = "nonnegative",
) -> tuple[Raster, ConstraintReport]:
    """Clamp finite negative cells to 0, or raise in strict mode.

    Negative precipitation has no physical reading, so unlike the triple
    repair this one cannot preserve values; the report records how far
    below zero the worst cell sat.
    """
    if mode not in (REPAIR, STRICT):
        raise ValueError(f"mode must be '{REPAIR}' or '{STRICT}', got {mode!r}")
    audit = check_nonnegative(r, name)
    if not audit.violations:
        return r, audit
    if mode == STRICT:
        raise ConstraintViolationError(
            f"{name}: {audit.violations} finite cells below zero "
            f"(worst {audit.max_violation_magnitude:g})",
            report=audit,
        )
    repaired = np.where(np.isfinite(r.values) & (r.values < 0), 0.0, r.values)
    report = ConstraintReport(name, audit.violations, audit.violations,
                              audit.max_violation_magnitude)
    return r.with_values(repaired), report


def write_reports_csv(reports, path) -> None:
    """Serialize reports, one CSV row per constraint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["constraint_name", "violations", "repaired", "max_violation_magnitude"]
        )
        for rep in reports:
            writer.writerow(
                [rep.constraint_name, rep.violations, rep.repaired,
                 f"{rep.max_violation_magnitude:.10g}"]
            )
