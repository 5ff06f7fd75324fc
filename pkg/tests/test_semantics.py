import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from biocov import (
    ConstraintViolationError,
    check_nonnegative,
    repair_nonnegative,
    repair_ordered_triple,
)
from biocov.semantics import write_reports_csv
from conftest import make_raster


class TestCheckNonnegative:
    def test_clean_field(self):
        rep = check_nonnegative(make_raster(np.zeros((4, 4))), name="precip")
        assert rep.violations == 0
        assert rep.repaired == 0
        assert rep.max_violation_magnitude == 0.0

    def test_counts_negative_cells(self):
        v = np.ones((3, 3))
        v[0, 0] = -0.5
        v[2, 2] = -2.0
        rep = check_nonnegative(make_raster(v))
        assert rep.violations == 2
        assert rep.max_violation_magnitude == 2.0

    def test_nan_is_not_a_violation(self):
        v = np.ones((2, 2))
        v[0, 0] = np.nan
        rep = check_nonnegative(make_raster(v))
        assert rep.violations == 0


class TestRepairNonnegative:
    def test_repair_clamps_to_zero(self):
        v = np.array([[1.0, -0.25], [np.nan, 0.0]])
        out, rep = repair_nonnegative(make_raster(v))
        assert out.values[0, 1] == 0.0
        assert out.values[0, 0] == 1.0
        assert math.isnan(out.values[1, 0])
        assert rep.violations == 1 and rep.repaired == 1

    def test_strict_raises(self):
        v = np.array([[1.0, -0.25]])
        with pytest.raises(ConstraintViolationError):
            repair_nonnegative(make_raster(v), mode="strict")

    def test_strict_passes_clean_input(self):
        v = np.array([[1.0, 0.0]])
        out, rep = repair_nonnegative(make_raster(v), mode="strict")
        assert rep.violations == 0
        np.testing.assert_array_equal(out.values, v)


class TestRepairOrderedTriple:
    def _triple(self, lo, mid, hi):
        return (make_raster(np.asarray(lo, dtype=float)),
                make_raster(np.asarray(mid, dtype=float)),
                make_raster(np.asarray(hi, dtype=float)))

    def test_ordered_input_untouched(self):
        lo, mid, hi = self._triple([[-5.0]], [[0.0]], [[4.0]])
        rlo, rmid, rhi, rep = repair_ordered_triple(lo, mid, hi)
        assert rep.violations == 0
        assert (rlo.values[0, 0], rmid.values[0, 0], rhi.values[0, 0]) == (-5.0, 0.0, 4.0)

    def test_reversed_cell_is_sorted(self):
        lo, mid, hi = self._triple([[4.0]], [[0.0]], [[-5.0]])
        rlo, rmid, rhi, rep = repair_ordered_triple(lo, mid, hi)
        assert rep.violations == 1 and rep.repaired == 1
        assert (rlo.values[0, 0], rmid.values[0, 0], rhi.values[0, 0]) == (-5.0, 0.0, 4.0)

    def test_matches_per_cell_sort_oracle(self):
        rng = np.random.default_rng(23)
        a = rng.normal(size=(6, 5)) * 10
        b = rng.normal(size=(6, 5)) * 10
        c = rng.normal(size=(6, 5)) * 10
        mask = rng.random((6, 5)) < 0.15
        a[mask] = np.nan
        b[mask] = np.nan
        c[mask] = np.nan
        lo, mid, hi = (make_raster(a), make_raster(b), make_raster(c))
        rlo, rmid, rhi, rep = repair_ordered_triple(lo, mid, hi)
        n_bad = 0
        for i in range(6):
            for j in range(5):
                trio = [a[i, j], b[i, j], c[i, j]]
                if any(math.isnan(x) for x in trio):
                    assert math.isnan(rlo.values[i, j])
                    assert math.isnan(rmid.values[i, j])
                    assert math.isnan(rhi.values[i, j])
                    continue
                want = sorted(trio)
                if trio != want:
                    n_bad += 1
                got = [rlo.values[i, j], rmid.values[i, j], rhi.values[i, j]]
                assert got == want
        assert rep.violations == n_bad

    def test_idempotent(self):
        rng = np.random.default_rng(31)
        trio = self._triple(rng.normal(size=(4, 4)),
                            rng.normal(size=(4, 4)),
                            rng.normal(size=(4, 4)))
        once = repair_ordered_triple(*trio)[:3]
        twice = repair_ordered_triple(*once)
        assert twice[3].violations == 0
        for r1, r2 in zip(once, twice[:3]):
            np.testing.assert_array_equal(r1.values, r2.values)

    def test_strict_raises_and_carries_report(self):
        lo, mid, hi = self._triple([[4.0]], [[0.0]], [[-5.0]])
        with pytest.raises(ConstraintViolationError) as exc:
            repair_ordered_triple(lo, mid, hi, mode="strict")
        assert exc.value.report is not None
        assert exc.value.report.violations == 1

    @given(hnp.arrays(np.float64, (3, 3), elements=st.floats(-50, 50)),
           hnp.arrays(np.float64, (3, 3), elements=st.floats(-50, 50)),
           hnp.arrays(np.float64, (3, 3), elements=st.floats(-50, 50)))
    @settings(max_examples=40, deadline=None)
    def test_repair_preserves_multiset_and_orders(self, a, b, c):
        lo, mid, hi = (make_raster(a), make_raster(b), make_raster(c))
        rlo, rmid, rhi, _ = repair_ordered_triple(lo, mid, hi)
        assert np.all(rlo.values <= rmid.values)
        assert np.all(rmid.values <= rhi.values)
        before = np.sort(np.stack([a, b, c]), axis=0)
        after = np.sort(np.stack([rlo.values, rmid.values, rhi.values]), axis=0)
        np.testing.assert_array_equal(before, after)


class TestReportCsv:
    def test_round_trip_fields(self, tmp_path):
        v = np.array([[1.0, -2.5]])
        _, rep = repair_nonnegative(make_raster(v), name="precip_07")
        path = tmp_path / "constraints.csv"
        write_reports_csv([rep], str(path))
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert rows[0]["constraint_name"] == "precip_07"
        assert int(rows[0]["violations"]) == 1
        assert int(rows[0]["repaired"]) == 1
        assert float(rows[0]["max_violation_magnitude"]) == 2.5
