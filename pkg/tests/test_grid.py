import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biocov import (
    EUROPE_30S,
    GridAlignmentError,
    GridError,
    GridSpec,
    MonthlyStack,
    Raster,
    require_same_grid,
)
from conftest import make_raster, make_spec


class TestGridSpec:
    def test_default_continental_grid_shape(self):
        assert EUROPE_30S.shape == (5280, 12000)
        assert EUROPE_30S.cell_size == 30.0
        assert EUROPE_30S.west == -25.0
        assert EUROPE_30S.north == 72.0

    def test_from_extent_round_trip(self):
        spec = GridSpec.from_extent(-25.0, 75.0, 28.0, 72.0, 30.0)
        assert spec.n_rows == 5280 and spec.n_cols == 12000
        assert spec == EUROPE_30S

    def test_inconsistent_shape_rejected(self):
        with pytest.raises(GridError):
            GridSpec(west=0.0, east=1.0, south=0.0, north=1.0,
                     cell_size=30.0, n_rows=120, n_cols=121)

    def test_degenerate_extent_rejected(self):
        with pytest.raises(GridError):
            GridSpec.from_extent(5.0, 5.0, 40.0, 50.0, 30.0)
        with pytest.raises(GridError):
            GridSpec.from_extent(5.0, 6.0, 50.0, 40.0, 30.0)

    def test_nonpositive_cell_size_rejected(self):
        with pytest.raises(GridError):
            GridSpec.from_extent(5.0, 6.0, 40.0, 50.0, 0.0)

    def test_cell_centers(self):
        spec = make_spec(n_rows=4, n_cols=3, cell_size=30.0, west=5.0, north=50.0)
        cs = 30.0 / 3600.0
        lats = spec.cell_center_lats()
        lons = spec.cell_center_lons()
        assert lats.shape == (4,) and lons.shape == (3,)
        # rows run north to south
        assert lats[0] == pytest.approx(50.0 - cs / 2, abs=1e-12)
        assert np.all(np.diff(lats) < 0)
        assert lons[0] == pytest.approx(5.0 + cs / 2, abs=1e-12)
        assert np.all(np.diff(lons) > 0)

    def test_cell_index_corners(self):
        spec = make_spec(n_rows=4, n_cols=3)
        cs = spec.cell_size_deg
        assert spec.cell_index(spec.west + 0.1 * cs, spec.north - 0.1 * cs) == (0, 0)
        assert spec.cell_index(spec.east - 0.1 * cs, spec.south + 0.1 * cs) == (3, 2)

    def test_cell_index_boundary_points_stay_in_grid(self):
        spec = make_spec(n_rows=4, n_cols=3)
        r, c = spec.cell_index(spec.east, spec.south)
        assert (r, c) == (3, 2)
        r, c = spec.cell_index(spec.west, spec.north)
        assert (r, c) == (0, 0)

    def test_cell_index_outside_raises(self):
        spec = make_spec()
        with pytest.raises(GridError):
            spec.cell_index(spec.west - 1.0, spec.north - 0.001)
        with pytest.raises(GridError):
            spec.cell_index(spec.west + 0.001, spec.north + 1.0)

    def test_coarsen_refine_inverse(self):
        fine = make_spec(n_rows=16, n_cols=12, cell_size=7.5)
        coarse = fine.coarsen(4)
        assert coarse.cell_size == 30.0
        assert coarse.shape == (4, 3)
        assert coarse.refine(4) == fine

    def test_coarsen_requires_divisible_shape(self):
        spec = make_spec(n_rows=5, n_cols=8)
        with pytest.raises(GridError):
            spec.coarsen(4)

    def test_matches_tolerance(self):
        spec = make_spec()
        shifted = GridSpec(west=spec.west + 1e-8, east=spec.east + 1e-8,
                           south=spec.south, north=spec.north,
                           cell_size=spec.cell_size,
                           n_rows=spec.n_rows, n_cols=spec.n_cols)
        assert spec.matches(shifted)
        far = GridSpec(west=spec.west + 1e-3, east=spec.east + 1e-3,
                       south=spec.south, north=spec.north,
                       cell_size=spec.cell_size,
                       n_rows=spec.n_rows, n_cols=spec.n_cols)
        assert not spec.matches(far)

    @given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
    @settings(max_examples=50, deadline=None)
    def test_cell_index_recovers_containing_cell(self, fx, fy):
        spec = make_spec(n_rows=6, n_cols=9)
        lon = spec.west + fx * (spec.east - spec.west)
        lat = spec.south + fy * (spec.north - spec.south)
        row, col = spec.cell_index(lon, lat)
        assert 0 <= row < spec.n_rows and 0 <= col < spec.n_cols
        # the returned cell's center is within half a cell of the query point
        assert abs(spec.cell_center_lons()[col] - lon) <= spec.cell_size_deg / 2 + 1e-12
        assert abs(spec.cell_center_lats()[row] - lat) <= spec.cell_size_deg / 2 + 1e-12


class TestRaster:
    def test_shape_mismatch_rejected(self):
        spec = make_spec(n_rows=4, n_cols=4)
        with pytest.raises(GridError):
            Raster(spec, np.zeros((4, 5)))

    def test_values_are_float64_and_read_only(self):
        r = make_raster(np.arange(16, dtype=np.int32).reshape(4, 4))
        assert r.values.dtype == np.float64
        with pytest.raises(ValueError):
            r.values[0, 0] = 1.0

    def test_nan_mask(self):
        v = np.ones((3, 3))
        v[1, 1] = np.nan
        r = make_raster(v)
        assert r.nan_mask[1, 1]
        assert r.nan_mask.sum() == 1

    def test_with_values_keeps_spec(self):
        r = make_raster(np.zeros((3, 3)))
        r2 = r.with_values(np.ones((3, 3)))
        assert r2.spec == r.spec
        assert np.all(r2.values == 1.0)

    def test_require_same_grid(self):
        a = make_raster(np.zeros((3, 3)))
        b = make_raster(np.zeros((3, 3)))
        require_same_grid(a, b)
        c = make_raster(np.zeros((3, 3)), west=6.0)
        with pytest.raises(GridAlignmentError):
            require_same_grid(a, c)


class TestMonthlyStack:
    def test_requires_twelve_months(self):
        spec = make_spec(n_rows=2, n_cols=2)
        arrays = [np.zeros((2, 2))] * 11
        with pytest.raises(GridError):
            MonthlyStack.from_arrays(spec, arrays)

    def test_month_accessor_is_one_based(self):
        spec = make_spec(n_rows=2, n_cols=2)
        stack = MonthlyStack.from_arrays(
            spec, [np.full((2, 2), float(m)) for m in range(1, 13)])
        assert stack.month(1).values[0, 0] == 1.0
        assert stack.month(12).values[0, 0] == 12.0
        with pytest.raises(GridError):
            stack.month(0)
        with pytest.raises(GridError):
            stack.month(13)

    def test_inconsistent_masks_rejected(self):
        spec = make_spec(n_rows=2, n_cols=2)
        arrays = [np.zeros((2, 2)) for _ in range(12)]
        arrays[3] = arrays[3].copy()
        arrays[3][0, 0] = np.nan
        with pytest.raises(GridAlignmentError):
            MonthlyStack.from_arrays(spec, arrays)

    def test_shared_mask_accepted(self):
        spec = make_spec(n_rows=2, n_cols=2)
        arrays = []
        for m in range(12):
            a = np.full((2, 2), float(m))
            a[1, 1] = np.nan
            arrays.append(a)
        stack = MonthlyStack.from_arrays(spec, arrays)
        assert stack.month(5).nan_mask[1, 1]
