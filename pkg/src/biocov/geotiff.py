"""GeoTIFF I/O, layer manifest, and input-dataset loading.

Files are single-band float32 GeoTIFFs in geographic WGS84; any other
CRS is rejected rather than reprojected.  On write, NaN cells become a
NoData sentinel recorded in the GDAL_NODATA tag; on read the sentinel
maps back to NaN, so NaN stays the only missing-data value inside the
engine.  The sentinel default is the exact float32 value nearest
-3.4e38 so its decimal tag round-trips losslessly.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass

import numpy as np
import tifffile

from .climate import ClimateInputs, DemTriple
from .errors import ConfigError, GridAlignmentError, MissingInputError, RasterIOError
from .grid import GridSpec, MonthlyStack, Raster

DEFAULT_NODATA = float(np.float32(-3.4e38))

#: GeoTIFF tag codes: pixel scale, tiepoint, geokey directory, GDAL nodata.
_TAG_SCALE = 33550
_TAG_TIEPOINT = 33922
_TAG_GEOKEYS = 34735
_TAG_NODATA = 42113

_EPSG_WGS84 = 4326

MONTHLY_ROLES = ("t_avg", "t_min", "t_max", "precip")
DEM_ROLES = ("dem_min", "dem_mean", "dem_max", "dem_fine")
ROLES = MONTHLY_ROLES + DEM_ROLES

ROLE_UNITS = {"t_avg": "degC", "t_min": "degC", "t_max": "degC",
              "precip": "mm", "dem_min": "m", "dem_mean": "m",
              "dem_max": "m", "dem_fine": "m"}


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _geokey_directory() -> tuple[int, ...]:
    # Header (version, revision 1.0, key count) then sorted 4-field keys:
    # model type geographic, raster type PixelIsArea, WGS84, degree units.
    return (1, 1, 0, 4,
            1024, 0, 1, 2,
            1025, 0, 1, 1,
            2048, 0, 1, _EPSG_WGS84,
            2054, 0, 1, 9102)


def write_raster(r: Raster, path: str,
                 nodata_sentinel: float = DEFAULT_NODATA) -> None:
    """Write a single-band float32 GeoTIFF with NoData and georeference.

    NaN cells are stored as the sentinel; a finite cell equal to the
    sentinel would be indistinguishable from NoData and is an error.
    Output is tiled and zlib-compressed, and the byte stream depends
    only on the raster content (no timestamps), so identical rasters
    produce identical files.
    """
    with np.errstate(over="ignore"):
        sent32 = np.float32(nodata_sentinel)
    if not np.isfinite(sent32):
        raise RasterIOError(f"nodata sentinel {nodata_sentinel} "
                            "not finite in float32")
    data = r.values.astype(np.float32)
    nan = np.isnan(data)
    if np.any(data[~nan] == sent32):
        raise RasterIOError(
            f"raster contains the nodata sentinel {float(sent32)} "
            "as a data value")
    data[nan] = sent32

    deg = r.spec.cell_size_deg
    extratags = [
        (_TAG_SCALE, "d", 3, (deg, deg, 0.0)),
        (_TAG_TIEPOINT, "d", 6, (0.0, 0.0, 0.0, r.spec.west, r.spec.north, 0.0)),
        (_TAG_GEOKEYS, "H", 20, _geokey_directory()),
        (_TAG_NODATA, "s", 0, str(float(sent32))),
    ]
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    try:
        tifffile.imwrite(path, data, tile=(256, 256), compression="zlib",
                         extratags=extratags)
    except OSError as e:
        raise RasterIOError(f"cannot write {path}: {e}") from e


def read_raster(path: str, expected_spec: GridSpec | None = None) -> Raster:
    """Read a single-band WGS84 GeoTIFF into a Raster (NoData -> NaN).

    With expected_spec given, any extent or cell-size disagreement
    beyond 1e-6 degrees is a grid-alignment error; this is the only
    alignment gate between files on disk and the compute grid.
    """
    if not os.path.isfile(path):
        raise MissingInputError(f"raster file not found: {path}")
    try:
        with tifffile.TiffFile(path) as tif:
            page = tif.pages[0]
            if page.samplesperpixel != 1:
                raise RasterIOError(f"{path}: multi-band rasters unsupported")
            data = page.asarray()
            # Tag values load lazily; pull them while the file is open.
            tags = page.tags
            scale = tags.valueof(_TAG_SCALE)
            tiepoint = tags.valueof(_TAG_TIEPOINT)
            geokeys = tags.valueof(_TAG_GEOKEYS)
            nodata = tags.valueof(_TAG_NODATA)
    except (tifffile.TiffFileError, ValueError) as e:
        raise RasterIOError(f"{path}: not a readable TIFF: {e}") from e

    if data.ndim != 2:
        raise RasterIOError(f"{path}: expected 2-D band, got shape {data.shape}")
    if scale is None or tiepoint is None or geokeys is None:
        raise RasterIOError(f"{path}: missing georeference tags")

    keys = np.asarray(geokeys, dtype=np.int64)
    epsg = None
    for i in range(4, keys.size - 3, 4):
        if keys[i] == 2048 and keys[i + 1] == 0:
            epsg = int(keys[i + 3])
    if epsg != _EPSG_WGS84:
        raise RasterIOError(
            f"{path}: CRS EPSG:{epsg} is not geographic WGS84 (EPSG:4326)")

    xres, yres = float(scale[0]), float(scale[1])
    if not math.isclose(xres, yres, rel_tol=1e-9):
        raise RasterIOError(f"{path}: non-square cells {xres} x {yres}")
    west, north = float(tiepoint[3]), float(tiepoint[4])
    nr, nc = data.shape
    spec = GridSpec(west=west, east=west + nc * xres,
                    south=north - nr * yres, north=north,
                    cell_size=xres * 3600.0, n_rows=nr, n_cols=nc)
    if expected_spec is not None and not spec.matches(expected_spec):
        raise GridAlignmentError(
            f"{path}: grid (W{spec.west} E{spec.east} S{spec.south} "
            f"N{spec.north}, {spec.cell_size}\", {spec.n_rows}x{spec.n_cols}) "
            f"does not match the expected grid (W{expected_spec.west} "
            f"E{expected_spec.east} S{expected_spec.south} "
            f"N{expected_spec.north}, {expected_spec.cell_size}\", "
            f"{expected_spec.n_rows}x{expected_spec.n_cols})")

    values = data.astype(np.float64)
    if nodata is not None:
        sent = np.float32(float(nodata))
        values[data == sent] = np.nan
    return Raster(spec, values)


@dataclass(frozen=True)
class LayerManifest:
    """One input file binding: where it is, what role it plays."""

    path: str
    role: str
    month: int | None
    checksum: str
    units: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"unknown manifest role {self.role!r}")
        if self.role in MONTHLY_ROLES:
            if self.month is None or not 1 <= self.month <= 12:
                raise ConfigError(
                    f"role {self.role} requires month 1..12, got {self.month}")
        elif self.month is not None:
            raise ConfigError(f"role {self.role} must not carry a month")

    @property
    def key(self) -> str:
        if self.month is None:
            return self.role
        return f"{self.role}_{self.month:02d}"


def write_manifest(entries: list[LayerManifest], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["path", "role", "month", "checksum", "units"])
        for e in entries:
            w.writerow([e.path, e.role, "" if e.month is None else e.month,
                        e.checksum, e.units])


def read_manifest(path: str) -> list[LayerManifest]:
    if not os.path.isfile(path):
        raise MissingInputError(f"manifest not found: {path}")
    entries = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"path", "role", "month", "checksum", "units"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ConfigError(f"{path}: manifest must have columns "
                              f"{sorted(required)}")
        for i, row in enumerate(reader, start=2):
            month = row["month"].strip()
            try:
                entries.append(LayerManifest(
                    path=row["path"], role=row["role"].strip(),
                    month=int(month) if month else None,
                    checksum=row["checksum"].strip(),
                    units=row["units"].strip()))
            except ValueError as e:
                raise ConfigError(f"{path}:{i}: bad manifest row: {e}") from e
    return entries


@dataclass(frozen=True)
class Dataset:
    """Loaded and validated pipeline inputs.

    climate/dem_fine are None when the corresponding roles were not
    requested.  checksums maps each manifest key (role, or role_mm for
    monthly layers) to the sha256 of the file that was loaded.
    """

    climate: ClimateInputs | None
    dem_fine: Raster | None
    checksums: dict[str, str]


def load_dataset(manifest_path: str, need_climate: bool = True,
                 need_fine: bool = True,
                 expected_spec: GridSpec | None = None,
                 fine_factor: int = 4,
                 verify_checksums: bool = True) -> Dataset:
    """Load all rasters a pipeline run needs, with full validation.

    Checks, in order: manifest completeness for the requested roles,
    file existence, checksum match, grid alignment (all coarse layers on
    one grid; dem_fine on its fine_factor refinement), and identical
    NaN masks within each monthly stack.
    """
    entries = read_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    by_key: dict[str, LayerManifest] = {}
    for e in entries:
        if e.key in by_key:
            raise ConfigError(f"duplicate manifest entry for {e.key}")
        by_key[e.key] = e

    need_roles: list[str] = []
    if need_climate:
        need_roles += [f"{role}_{m:02d}" for role in MONTHLY_ROLES
                       for m in range(1, 13)]
        need_roles += ["dem_min", "dem_mean", "dem_max"]
    if need_fine:
        need_roles.append("dem_fine")
    missing = [k for k in need_roles if k not in by_key]
    if missing:
        raise MissingInputError(
            f"manifest {manifest_path} missing required roles: "
            + ", ".join(missing))

    checksums: dict[str, str] = {}
    spec = expected_spec

    def load(key: str, want: GridSpec | None) -> Raster:
        entry = by_key[key]
        p = entry.path
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        if verify_checksums:
            actual = sha256_file(p)
            if actual != entry.checksum:
                raise RasterIOError(
                    f"{p}: checksum mismatch (manifest {entry.checksum}, "
                    f"file {actual})")
            checksums[key] = actual
        else:
            checksums[key] = sha256_file(p)
        return read_raster(p, expected_spec=want)

    climate = None
    if need_climate:
        stacks = {}
        for role in MONTHLY_ROLES:
            months = []
            for m in range(1, 13):
                r = load(f"{role}_{m:02d}", spec)
                if spec is None:
                    spec = r.spec
                months.append(r)
            try:
                stacks[role] = MonthlyStack(tuple(months))
            except Exception as e:
                raise RasterIOError(f"role {role}: {e}") from e
        dem = DemTriple(load("dem_min", spec), load("dem_mean", spec),
                        load("dem_max", spec))
        climate = ClimateInputs(t_avg=stacks["t_avg"], t_min=stacks["t_min"],
                                t_max=stacks["t_max"], p=stacks["precip"],
                                dem=dem)

    dem_fine = None
    if need_fine:
        want = spec.refine(fine_factor) if spec is not None else None
        dem_fine = load("dem_fine", want)

    return Dataset(climate=climate, dem_fine=dem_fine, checksums=checksums)
