import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from biocov import (
    GridError,
    block_mean_aggregate,
    focal_mean_3x3,
    stack_argmax,
    stack_argmin,
    stack_max,
    stack_mean,
    stack_min,
    stack_sum,
)
from conftest import make_raster, make_stack


def focal_mean_oracle(values):
    """Scalar reference: mean of the non-NaN cells in each 3x3 window.

    The window shrinks at edges. A NaN center stays NaN regardless of
    its neighbors.
    """
    nr, nc = values.shape
    out = np.full((nr, nc), np.nan)
    for i in range(nr):
        for j in range(nc):
            if math.isnan(values[i, j]):
                continue
            acc, n = 0.0, 0
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    ii, jj = i + di, j + dj
                    if 0 <= ii < nr and 0 <= jj < nc:
                        v = values[ii, jj]
                        if not math.isnan(v):
                            acc += v
                            n += 1
            out[i, j] = acc / n
    return out


def block_mean_oracle(values, factor):
    nr, nc = values.shape
    out = np.full((nr // factor, nc // factor), np.nan)
    for bi in range(nr // factor):
        for bj in range(nc // factor):
            block = values[bi * factor:(bi + 1) * factor,
                           bj * factor:(bj + 1) * factor]
            finite = block[~np.isnan(block)]
            if finite.size:
                out[bi, bj] = finite.mean()
    return out


class TestFocalMean:
    def test_constant_field_unchanged(self):
        r = make_raster(np.full((6, 6), 7.25))
        out = focal_mean_3x3(r)
        assert np.array_equal(out.values, r.values)

    def test_center_of_1_to_9(self):
        r = make_raster(np.arange(1.0, 10.0).reshape(3, 3))
        out = focal_mean_3x3(r)
        assert out.values[1, 1] == 5.0

    def test_corner_window_shrinks(self):
        r = make_raster(np.arange(1.0, 10.0).reshape(3, 3))
        out = focal_mean_3x3(r)
        # top-left corner sees cells 1,2,4,5 only
        assert out.values[0, 0] == pytest.approx(12.0 / 4.0)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=(9, 7)) * 40.0
        v[rng.random(v.shape) < 0.2] = np.nan
        out = focal_mean_3x3(make_raster(v))
        expect = focal_mean_oracle(v)
        np.testing.assert_allclose(out.values, expect, rtol=0, atol=1e-12)

    def test_nan_center_stays_nan_even_with_finite_neighbors(self):
        v = np.ones((3, 3))
        v[1, 1] = np.nan
        out = focal_mean_3x3(make_raster(v))
        assert math.isnan(out.values[1, 1])
        # neighbors simply skip the hole
        assert out.values[0, 0] == 1.0

    def test_workers_do_not_change_bits(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=(33, 17))
        v[rng.random(v.shape) < 0.1] = np.nan
        r = make_raster(v)
        base = focal_mean_3x3(r, workers=1).values
        for w in (2, 3, 8):
            np.testing.assert_array_equal(focal_mean_3x3(r, workers=w).values, base)

    @given(hnp.arrays(np.float64, (5, 5),
                      elements=st.floats(-1e3, 1e3, allow_nan=False) | st.just(np.nan)))
    @settings(max_examples=40, deadline=None)
    def test_nan_exactly_where_input_is_nan(self, v):
        out = focal_mean_3x3(make_raster(v))
        np.testing.assert_array_equal(np.isnan(out.values), np.isnan(v))


class TestBlockMean:
    def test_constant_blocks(self):
        r = make_raster(np.ones((8, 8)), cell_size=7.5)
        out = block_mean_aggregate(r, factor=4)
        assert out.spec.shape == (2, 2)
        assert out.spec.cell_size == 30.0
        assert np.all(out.values == 1.0)

    def test_sixteen_cell_block(self):
        r = make_raster(np.arange(1.0, 17.0).reshape(4, 4), cell_size=7.5)
        out = block_mean_aggregate(r, factor=4)
        assert out.values[0, 0] == 8.5

    def test_matches_scalar_oracle_with_nans(self):
        rng = np.random.default_rng(9)
        v = rng.normal(size=(12, 8)) * 10.0
        v[rng.random(v.shape) < 0.3] = np.nan
        out = block_mean_aggregate(make_raster(v, cell_size=7.5), factor=4)
        expect = block_mean_oracle(v, 4)
        np.testing.assert_allclose(out.values, expect, rtol=0, atol=1e-12,
                                   equal_nan=True)

    def test_all_nan_block_maps_to_nan(self):
        v = np.ones((8, 8))
        v[0:4, 0:4] = np.nan
        out = block_mean_aggregate(make_raster(v, cell_size=7.5), factor=4)
        assert math.isnan(out.values[0, 0])
        assert out.values[0, 1] == 1.0

    def test_partial_block_uses_only_finite_cells(self):
        v = np.full((4, 4), 10.0)
        v[0, 0] = np.nan
        out = block_mean_aggregate(make_raster(v, cell_size=7.5), factor=4)
        assert out.values[0, 0] == 10.0

    def test_indivisible_shape_rejected(self):
        r = make_raster(np.ones((6, 8)), cell_size=7.5)
        with pytest.raises(GridError):
            block_mean_aggregate(r, factor=4)


class TestStackReductions:
    def test_months_1_to_12(self):
        stack = make_stack([np.full((2, 2), float(m)) for m in range(1, 13)])
        assert np.all(stack_sum(stack).values == 78.0)
        assert np.all(stack_min(stack).values == 1.0)
        assert np.all(stack_max(stack).values == 12.0)
        assert np.all(stack_mean(stack).values == 6.5)
        assert np.all(stack_argmin(stack).values == 1)
        assert np.all(stack_argmax(stack).values == 12)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(17)
        arrays = [rng.normal(size=(5, 4)) * 20.0 for _ in range(12)]
        stack = make_stack(arrays)
        cube = np.stack(arrays)
        for i in range(5):
            for j in range(4):
                col = cube[:, i, j]
                assert stack_sum(stack).values[i, j] == pytest.approx(col.sum(), rel=1e-14)
                assert stack_min(stack).values[i, j] == col.min()
                assert stack_max(stack).values[i, j] == col.max()
                assert stack_argmin(stack).values[i, j] == col.argmin() + 1
                assert stack_argmax(stack).values[i, j] == col.argmax() + 1

    def test_nan_propagates_to_every_reduction(self):
        arrays = [np.full((2, 2), float(m)) for m in range(1, 13)]
        for a in arrays:
            a[0, 1] = np.nan
        stack = make_stack(arrays)
        for fn in (stack_sum, stack_min, stack_max, stack_mean,
                   stack_argmin, stack_argmax):
            out = fn(stack).values
            assert math.isnan(out[0, 1])
            assert not math.isnan(out[0, 0])

    def test_argmin_returns_first_tie(self):
        arrays = [np.full((1, 1), 5.0) for _ in range(12)]
        arrays[2][0, 0] = 1.0
        arrays[7][0, 0] = 1.0
        stack = make_stack(arrays)
        assert stack_argmin(stack).values[0, 0] == 3
