"""Grid model: georeferencing contract, raster container, monthly stacks.

Everything downstream operates on plain WGS84 geographic grids with NaN as
the single missing-data representation.  Values are held as float64 for
computation; file storage is float32 (see :mod:`biocov.geotiff`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GridAlignmentError, GridError

# Mean-sphere metric used for all cell-size-in-meters conversions.
EARTH_RADIUS_M = 6371000.0
METERS_PER_DEGREE = np.pi * EARTH_RADIUS_M / 180.0

# Relative tolerance for "the extent is an integer number of cells".
_SHAPE_RTOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Georeferencing contract for one raster grid.

    Attributes:
        west, east, south, north: extent in degrees (cell edges, not centers).
        cell_size: cell size in arc-seconds (square cells).
        n_rows, n_cols: grid dimensions; row 0 is the northernmost row.
        crs: identifier string; only geographic WGS84 is supported.
    """

    west: float
    east: float
    south: float
    north: float
    cell_size: float
    n_rows: int
    n_cols: int
    crs: str = "EPSG:4326"

    def __post_init__(self):
        if not (self.west < self.east and self.south < self.north):
            raise GridError(
                f"degenerate extent: west={self.west} east={self.east} "
                f"south={self.south} north={self.north}"
            )
        if self.cell_size <= 0:
            raise GridError(f"cell_size must be positive, got {self.cell_size}")
        if self.n_rows < 1 or self.n_cols < 1:
            raise GridError(f"bad dimensions {self.n_rows}x{self.n_cols}")
        cs = self.cell_size_deg
        for n, span, axis in (
            (self.n_cols, self.east - self.west, "columns"),
            (self.n_rows, self.north - self.south, "rows"),
        ):
            if abs(n - span / cs) > _SHAPE_RTOL * n:
                raise GridError(
                    f"extent is not an integer number of cells along {axis}: "
                    f"{span} deg / {cs} deg = {span / cs}, declared {n}"
                )

    @property
    def cell_size_deg(self) -> float:
        return self.cell_size / 3600.0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @classmethod
    def from_extent(cls, west, east, south, north, cell_size, crs="EPSG:4326"):
        """Build a spec, deriving the grid dimensions from the extent."""
        if cell_size <= 0:
            raise GridError(f"cell_size must be positive, got {cell_size}")
        cs = cell_size / 3600.0
        n_cols = int(round((east - west) / cs))
        n_rows = int(round((north - south) / cs))
        return cls(west, east, south, north, cell_size, n_rows, n_cols, crs)

    def cell_center_lats(self) -> np.ndarray:
        """Latitudes of cell centers, row 0 first (northernmost)."""
        cs = self.cell_size_deg
        return self.north - (np.arange(self.n_rows) + 0.5) * cs

    def cell_center_lons(self) -> np.ndarray:
        cs = self.cell_size_deg
        return self.west + (np.arange(self.n_cols) + 0.5) * cs

    def cell_index(self, lon: float, lat: float) -> tuple[int, int]:
        """Return the (row, col) of the cell containing a point.

        Raises GridError if the point lies outside the extent.
        """
        if not (self.west <= lon <= self.east and self.south <= lat <= self.north):
            raise GridError(f"point ({lon}, {lat}) outside extent")
        cs = self.cell_size_deg
        col = min(int((lon - self.west) / cs), self.n_cols - 1)
        row = min(int((self.north - lat) / cs), self.n_rows - 1)
        return row, col

    def coarsen(self, factor: int) -> "GridSpec":
        """Spec of this grid aggregated by an integer factor."""
        if self.n_rows % factor or self.n_cols % factor:
            raise GridError(
                f"{self.n_rows}x{self.n_cols} grid not divisible by {factor}"
            )
        return GridSpec(
            self.west, self.east, self.south, self.north,
            self.cell_size * factor,
            self.n_rows // factor, self.n_cols // factor, self.crs,
        )

    def refine(self, factor: int) -> "GridSpec":
        """Spec of this grid subdivided by an integer factor."""
        return GridSpec(
            self.west, self.east, self.south, self.north,
            self.cell_size / factor,
            self.n_rows * factor, self.n_cols * factor, self.crs,
        )

    def matches(self, other: "GridSpec", tol_deg: float = 1e-6) -> bool:
        """True when extent and cell size agree within ``tol_deg`` degrees."""
        return (
            self.shape == other.shape
            and abs(self.west - other.west) <= tol_deg
            and abs(self.east - other.east) <= tol_deg
            and abs(self.south - other.south) <= tol_deg
            and abs(self.north - other.north) <= tol_deg
            and abs(self.cell_size_deg - other.cell_size_deg) <= tol_deg
        )


#: Default working extent: Europe to the Urals at 30 arc-seconds.
EUROPE_30S = GridSpec.from_extent(west=-25.0, east=75.0, south=28.0,
                                  north=72.0, cell_size=30.0)


@dataclass(frozen=True)
class Raster:
    """One 2-D floating grid; NaN marks missing cells.

    Values are coerced to an immutable float64 array so operators can share
    them freely across worker threads.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.spec.shape:
            raise GridError(
                f"values shape {v.shape} does not match grid {self.spec.shape}"
            )
        if v is self.values and v.flags.writeable:
            v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def nan_mask(self) -> np.ndarray:
        return np.isnan(self.values)

    def with_values(self, values: np.ndarray) -> "Raster":
        """New raster on the same grid."""
        return Raster(self.spec, values)


def require_same_grid(*rasters: Raster) -> GridSpec:
    """Validate that all rasters share one GridSpec and return it."""
    spec = rasters[0].spec
    for r in rasters[1:]:
        if r.spec != spec:
            raise GridAlignmentError(
                f"grids differ: {r.spec} vs {spec}"
            )
    return spec


@dataclass(frozen=True)
class MonthlyStack:
    """Twelve monthly rasters (January..December) on one grid.

    All months must share the GridSpec and the exact per-cell NaN mask;
    both are validated at construction.
    """

    months: tuple[Raster, ...]
    spec: GridSpec = field(init=False)

    def __post_init__(self):
        months = tuple(self.months)
        if len(months) != 12:
            raise GridError(f"a monthly stack needs 12 rasters, got {len(months)}")
        spec = require_same_grid(*months)
        mask = months[0].nan_mask
        for m, r in enumerate(months[1:], start=2):
            if not np.array_equal(mask, r.nan_mask):
                raise GridAlignmentError(
                    f"NaN mask of month {m} differs from month 1"
                )
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "spec", spec)

    def month(self, m: int) -> Raster:
        """Raster for month ``m`` in 1..12."""
        if not 1 <= m <= 12:
            raise GridError(f"month {m} out of range 1..12")
        return self.months[m - 1]

    @property
    def nan_mask(self) -> np.ndarray:
        return self.months[0].nan_mask

    @classmethod
    def from_arrays(cls, spec: GridSpec, arrays: Sequence[np.ndarray]) -> "MonthlyStack":
        return cls(tuple(Raster(spec, a) for a in arrays))
