"""Seeded synthetic input datasets.

Builds a physically plausible stand-in for the real inputs: four monthly
climate stacks, a coarse elevation triple and a fine mean DEM, all under
one shared water mask, written as GeoTIFFs with a manifest.  Everything
derives from one seeded generator, so a dataset is reproducible from
(seed, shape) alone.  Optional corruption knobs inject the ordering and
sign violations the semantic checks exist to catch.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .geotiff import ROLE_UNITS, LayerManifest, sha256_file, write_manifest, write_raster
from .grid import GridSpec, Raster


def _box_blur(a: np.ndarray) -> np.ndarray:
    p = np.pad(a, 1, mode="edge")
    acc = np.zeros_like(a)
    for dr in range(3):
        for dc in range(3):
            acc += p[dr:dr + a.shape[0], dc:dc + a.shape[1]]
    return acc / 9.0


def _smooth_field(rng: np.random.Generator, shape: tuple[int, int],
                  block: int) -> np.ndarray:
    """Zero-mean, unit-variance field with features ~block cells wide."""
    nr, nc = shape
    # at least two blocks per axis, or the visible window is constant
    block = max(1, min(block, nr // 2, nc // 2))
    coarse = rng.standard_normal((nr // block + 2, nc // block + 2))
    up = np.kron(coarse, np.ones((block, block)))[:nr, :nc]
    for _ in range(3):
        up = _box_blur(up)
    return (up - up.mean()) / up.std()


def synthetic_dataset(root: str, seed: int = 0, n_rows: int = 100,
                      n_cols: int = 100, cell_size: float = 30.0,
                      west: float = 5.0, north: float = 50.0,
                      mask_fraction: float = 0.05, fine_factor: int = 4,
                      order_violations: int = 0,
                      negative_precip_cells: int = 0) -> str:
    """Write a complete synthetic input tree; returns the manifest path.

    order_violations swaps t_min/t_max at that many unmasked cells of one
    month; negative_precip_cells forces negative precipitation values.
    Both default to 0 (clean data).
    """
    cs_deg = cell_size / 3600.0
    spec = GridSpec.from_extent(west, west + n_cols * cs_deg,
                                north - n_rows * cs_deg, north, cell_size)
    fine_spec = spec.refine(fine_factor)
    rng = np.random.default_rng(seed)
    shape = (n_rows, n_cols)
    lats = spec.cell_center_lats()[:, None]

    base_t = 11.0 - 0.45 * (lats - lats.mean()) + 2.0 * _smooth_field(rng, shape, 8)
    season_amp = 8.5 + 1.5 * _smooth_field(rng, shape, 10)
    spread = 3.0 + 1.2 * np.abs(_smooth_field(rng, shape, 6))
    p_base = 55.0 + 18.0 * _smooth_field(rng, shape, 9)
    p_season = 22.0 + 6.0 * _smooth_field(rng, shape, 11)

    dem_mean = 350.0 + 300.0 * _smooth_field(rng, shape, 7)
    dem_mean = np.maximum(dem_mean, 1.0)
    relief = 60.0 + 45.0 * np.abs(_smooth_field(rng, shape, 5))
    dem_min = dem_mean - relief
    dem_max = dem_mean + 1.1 * relief

    detail = _smooth_field(rng, fine_spec.shape, 2 * fine_factor)
    dem_fine = np.kron(dem_mean, np.ones((fine_factor, fine_factor))) + 35.0 * detail

    t_avg, t_min, t_max, precip = [], [], [], []
    for m in range(1, 13):
        phase = math.cos(2.0 * math.pi * (m - 7) / 12.0)
        ta = base_t + season_amp * phase + 0.4 * rng.standard_normal(shape)
        t_avg.append(ta)
        t_min.append(ta - spread - 0.3 * np.abs(rng.standard_normal(shape)))
        t_max.append(ta + spread + 0.3 * np.abs(rng.standard_normal(shape)))
        pm = (p_base + p_season * math.sin(2.0 * math.pi * (m - 10) / 12.0)
              + 6.0 * rng.standard_normal(shape))
        precip.append(np.maximum(pm, 0.0))

    mask = rng.random(shape) < mask_fraction
    fine_mask = np.kron(mask, np.ones((fine_factor, fine_factor), dtype=bool))
    clear = np.flatnonzero(~mask)

    if order_violations:
        cells = rng.choice(clear, size=min(order_violations, clear.size),
                           replace=False)
        r, c = np.unravel_index(cells, shape)
        month = int(rng.integers(0, 12))
        t_min[month][r, c], t_max[month][r, c] = (t_max[month][r, c],
                                                  t_min[month][r, c])
    if negative_precip_cells:
        cells = rng.choice(clear, size=min(negative_precip_cells, clear.size),
                           replace=False)
        r, c = np.unravel_index(cells, shape)
        precip[0][r, c] = -abs(precip[0][r, c]) - 1.0

    def masked(a: np.ndarray, m: np.ndarray) -> np.ndarray:
        out = a.copy()
        out[m] = np.nan
        return out

    inputs_dir = os.path.join(root, "inputs")
    os.makedirs(inputs_dir, exist_ok=True)
    entries: list[LayerManifest] = []

    def emit(name: str, role: str, month: int | None, values: np.ndarray,
             grid: GridSpec, m: np.ndarray) -> None:
        path = os.path.join(inputs_dir, name)
        write_raster(Raster(grid, masked(values, m)), path)
        entries.append(LayerManifest(
            path=os.path.join("inputs", name), role=role, month=month,
            checksum=sha256_file(path), units=ROLE_UNITS[role]))

    for role, stack in (("t_avg", t_avg), ("t_min", t_min),
                        ("t_max", t_max), ("precip", precip)):
        for m in range(1, 13):
            emit(f"{role}_{m:02d}.tif", role, m, stack[m - 1], spec, mask)
    emit("dem_min.tif", "dem_min", None, dem_min, spec, mask)
    emit("dem_mean.tif", "dem_mean", None, dem_mean, spec, mask)
    emit("dem_max.tif", "dem_max", None, dem_max, spec, mask)
    emit("dem_fine.tif", "dem_fine", None, dem_fine, fine_spec, fine_mask)

    manifest_path = os.path.join(root, "manifest.csv")
    write_manifest(entries, manifest_path)
    return manifest_path
