"""Focal, block-aggregation and stack-reduction operators.

Determinism contract: every operator accumulates in a fixed left-to-right,
top-to-bottom order, so results are bit-identical for any worker count and
any row-band partition.  Workers only split *output* rows; each band is a
pure function of the (shared, immutable) input array.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import GridError
from .grid import MonthlyStack, Raster


def _row_bands(n_rows: int, workers: int) -> list[tuple[int, int]]:
    """Split ``range(n_rows)`` into at most ``workers`` contiguous bands."""
    workers = max(1, min(int(workers), n_rows))
    edges = np.linspace(0, n_rows, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_row_bands(fn, n_rows: int, workers: int) -> None:
    """Run ``fn(row_start, row_stop)`` over disjoint row bands.

    ``fn`` must write only to its own output rows; bands never overlap, so
    concurrent execution cannot race.
    """
    bands = _row_bands(n_rows, workers)
    if len(bands) == 1:
        fn(*bands[0])
        return
    with ThreadPoolExecutor(max_workers=len(bands)) as pool:
        futures = [pool.submit(fn, a, b) for a, b in bands]
        for f in futures:
            f.result()


def focal_mean_3x3(r: Raster, workers: int = 1) -> Raster:
    """Mean of the non-NaN values in each centered 3x3 window.

    Cells on the grid rim use the available sub-window.  A cell is NaN in
    the output iff it is NaN in the input: NaN neighbors are skipped, NaN
    centers stay NaN (the water mask must survive every derivation).
    """
    v = r.values
    nr, nc = v.shape
    padded = np.full((nr + 2, nc + 2), np.nan)
    padded[1:-1, 1:-1] = v
    out = np.empty_like(v)

    def band(r0: int, r1: int) -> None:
        h = r1 - r0
        acc = np.zeros((h, nc))
        cnt = np.zeros((h, nc), dtype=np.int64)
        for dr in range(3):
            for dc in range(3):
                w = padded[r0 + dr:r0 + dr + h, dc:dc + nc]
                miss = np.isnan(w)
                acc += np.where(miss, 0.0, w)
                cnt += ~miss
        with np.errstate(invalid="ignore"):
            res = acc / cnt
        res[np.isnan(v[r0:r1])] = np.nan
        out[r0:r1] = res

    run_row_bands(band, nr, workers)
    return r.with_values(out)


def block_mean_aggregate(r: Raster, factor: int = 4) -> Raster:
    """Aggregate by an integer factor, averaging the non-NaN cells per block.

    An output cell is NaN iff every input cell in its factor x factor block
    is NaN.  The output grid keeps the extent and multiplies the cell size.
    """
    if factor < 1:
        raise GridError(f"aggregation factor must be >= 1, got {factor}")
    v = r.values
    nr, nc = v.shape
    if nr % factor or nc % factor:
        raise GridError(
            f"grid {nr}x{nc} not divisible by aggregation factor {factor}"
        )
    acc = np.zeros((nr // factor, nc // factor))
    cnt = np.zeros_like(acc, dtype=np.int64)
    for dr in range(factor):
        for dc in range(factor):
            w = v[dr::factor, dc::factor]
            miss = np.isnan(w)
            acc += np.where(miss, 0.0, w)
            cnt += ~miss
    with np.errstate(invalid="ignore"):
        out = acc / cnt
    out[cnt == 0] = np.nan
    return Raster(r.spec.coarsen(factor), out)


def stack_sum(s: MonthlyStack) -> Raster:
    """Per-cell sum of the 12 months; any NaN month makes the cell NaN."""
    acc = s.months[0].values.copy()
    for m in s.months[1:]:
        acc += m.values
    return Raster(s.spec, acc)


def stack_min(s: MonthlyStack) -> Raster:
    acc = s.months[0].values.copy()
    for m in s.months[1:]:
        acc = np.minimum(acc, m.values)
    return Raster(s.spec, acc)


def stack_max(s: MonthlyStack) -> Raster:
    acc = s.months[0].values.copy()
    for m in s.months[1:]:
        acc = np.maximum(acc, m.values)
    return Raster(s.spec, acc)


def stack_mean(s: MonthlyStack) -> Raster:
    return Raster(s.spec, stack_sum(s).values / 12.0)


def stack_argmin(s: MonthlyStack) -> Raster:
    """1-based month attaining the per-cell minimum (first month on ties).

    NaN where the stack is NaN.
    """
    return _stack_arg(s, np.less)


def stack_argmax(s: MonthlyStack) -> Raster:
    """1-based month attaining the per-cell maximum (first month on ties)."""
    return _stack_arg(s, np.greater)


def _stack_arg(s: MonthlyStack, better) -> Raster:
    best = s.months[0].values.copy()
    arg = np.where(np.isnan(best), np.nan, 1.0)
    for m, r in enumerate(s.months[1:], start=2):
        take = better(r.values, best)
        best = np.where(take, r.values, best)
        arg = np.where(take, float(m), arg)
    return Raster(s.spec, arg)
