import numpy as np
import pytest

from biocov import GridSpec, MonthlyStack, Raster, synthetic_dataset

# one line per acceptance check, printed in the terminal summary
acceptance_lines: list[str] = []


def record_acceptance(num: int, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    acceptance_lines.append(f"[{num:02d}] {label}: {status}{suffix}")


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance checks")
        for line in sorted(acceptance_lines):
            terminalreporter.write_line(line)


def make_spec(n_rows=8, n_cols=8, cell_size=30.0, west=5.0, north=50.0):
    cs = cell_size / 3600.0
    return GridSpec.from_extent(west, west + n_cols * cs,
                                north - n_rows * cs, north, cell_size)


def make_raster(values, **kw):
    v = np.asarray(values, dtype=float)
    return Raster(make_spec(n_rows=v.shape[0], n_cols=v.shape[1], **kw), v)


def make_stack(arrays, **kw):
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    spec = make_spec(n_rows=arrays[0].shape[0], n_cols=arrays[0].shape[1], **kw)
    return MonthlyStack.from_arrays(spec, arrays)


def constant_stack(shape, value, **kw):
    return make_stack([np.full(shape, value) for _ in range(12)], **kw)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """40x40 clean synthetic dataset shared by pipeline-level tests."""
    root = tmp_path_factory.mktemp("synth40")
    manifest = synthetic_dataset(str(root), seed=11, n_rows=40, n_cols=40,
                                 mask_fraction=0.08)
    return manifest
