"""Pipeline orchestration: config, staged caching, publication, niche export.

The run is a short DAG of stages (checks -> climate, terrain -> daily ->
solar, mask, publish).  Every stage is keyed by a hash of its parameters
and input checksums and materialized as a cache directory; a rerun with
unchanged inputs resolves every key to an existing directory and performs
no computation.  Published outputs are byte-copied from the publish
stage's cache directory, which is what makes cold and warm runs (and any
worker count) produce identical output trees.

Worker count deliberately never enters a stage key: determinism across
worker counts is part of the operator contracts, not a parameter.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os
import shutil
from dataclasses import dataclass, field

import numpy as np

from . import climate as cl
from . import solar as so
from .climate import ClimateInputs, DemTriple, LapseConfig
from .errors import ConfigError, GridError, MissingInputError
from .geotiff import load_dataset, read_raster, sha256_file, write_raster
from .grid import GridSpec, MonthlyStack, Raster, require_same_grid
from .semantics import (REPAIR, STRICT, ConstraintReport, check_nonnegative,
                        repair_nonnegative, repair_ordered_triple,
                        write_reports_csv)

_META = "meta.json"


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; see load_config for the file schema."""

    manifest_path: str
    output_dir: str
    cache_dir: str
    solar: so.SolarConfig = so.SolarConfig()
    lapse: LapseConfig = LapseConfig()
    covariates: tuple[str, ...] = cl.ALL_COVARIATES
    workers: int = 1
    strict: bool = False
    grid: GridSpec | None = None
    fine_factor: int = 4

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.fine_factor < 1:
            raise ConfigError(f"fine_factor must be >= 1, got {self.fine_factor}")
        unknown = [c for c in self.covariates if c not in cl.ALL_COVARIATES]
        if unknown:
            raise ConfigError(
                f"unknown covariates {unknown}; valid names: "
                + ", ".join(cl.ALL_COVARIATES))
        if not self.covariates:
            raise ConfigError("no covariates selected")
        deduped = tuple(dict.fromkeys(self.covariates))
        object.__setattr__(self, "covariates", deduped)


def load_config(path: str) -> PipelineConfig:
    """Parse an INI config file into a PipelineConfig.

    Required: [paths] manifest, output_dir, cache_dir.  Optional
    sections [grid], [solar], [lapse], [run]; see the README for every
    key.  Relative paths resolve against the config file's directory.
    """
    if not os.path.isfile(path):
        raise MissingInputError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    try:
        paths = parser["paths"]
        manifest = resolve(paths["manifest"])
        output_dir = resolve(paths["output_dir"])
        cache_dir = resolve(paths["cache_dir"])
    except KeyError as e:
        raise ConfigError(f"{path}: [paths] section needs manifest, "
                          f"output_dir and cache_dir (missing {e})") from e

    grid = None
    if parser.has_section("grid"):
        g = parser["grid"]
        try:
            grid = GridSpec.from_extent(
                west=g.getfloat("west"), east=g.getfloat("east"),
                south=g.getfloat("south"), north=g.getfloat("north"),
                cell_size=g.getfloat("cell_size_arcsec"))
        except (TypeError, ValueError, GridError) as e:
            raise ConfigError(f"{path}: bad [grid] section: {e}") from e

    def section_kwargs(name: str, casts: dict) -> dict:
        out = {}
        if parser.has_section(name):
            for key, cast in casts.items():
                raw = parser.get(name, key, fallback=None)
                if raw is not None:
                    out[key] = cast(raw)
        return out

    def parse_days(raw: str) -> tuple[int, ...]:
        return tuple(int(x) for x in raw.split(","))

    try:
        solar = so.SolarConfig(**section_kwargs("solar", {
            "azimuth_step_deg": float, "horizon_radius_m": float,
            "time_step_h": float, "solar_constant": float,
            "central_days": parse_days}))
        lapse = LapseConfig(**section_kwargs("lapse", {
            "lapse_rate": float, "counting_mode": str}))
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from e

    covariates = cl.ALL_COVARIATES
    workers = 1
    strict = False
    fine_factor = 4
    if parser.has_section("run"):
        run = parser["run"]
        raw = run.get("covariates", fallback="all").strip()
        if raw and raw != "all":
            covariates = tuple(c.strip() for c in raw.split(",") if c.strip())
        workers = run.getint("workers", fallback=1)
        strict = run.getboolean("strict", fallback=False)
        fine_factor = run.getint("fine_factor", fallback=4)

    return PipelineConfig(
        manifest_path=manifest, output_dir=output_dir, cache_dir=cache_dir,
        solar=solar, lapse=lapse, covariates=covariates, workers=workers,
        strict=strict, grid=grid, fine_factor=fine_factor)


@dataclass
class StageRecord:
    """One resolved stage: where its outputs live and how it was keyed."""

    name: str
    key: str
    status: str  # "computed" or "cached"
    dir: str
    params: dict
    inputs: dict
    outputs: dict = field(default_factory=dict)

    def path(self, filename: str) -> str:
        return os.path.join(self.dir, filename)


class _StageCache:
    """Content-addressed stage directories under one cache root."""

    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def run(self, name: str, params: dict, inputs: dict, builder) -> StageRecord:
        """Resolve a stage: reuse the cached directory or build it.

        builder(tmp_dir) must write every stage output into tmp_dir; the
        directory is renamed into place only after it is complete, so a
        crashed build never masquerades as a cached stage.
        """
        payload = json.dumps({"stage": name, "params": params,
                              "inputs": inputs},
                             sort_keys=True, separators=(",", ":"))
        key = hashlib.sha256(payload.encode()).hexdigest()
        stage_dir = os.path.join(self.root, name, key[:16])
        meta_path = os.path.join(stage_dir, _META)
        if os.path.isfile(meta_path):
            with open(meta_path) as f:
                meta = json.load(f)
            return StageRecord(name, key, "cached", stage_dir, params,
                               inputs, meta["outputs"])

        tmp = stage_dir + ".tmp"
        if os.path.isdir(tmp):
            shutil.rmtree(tmp)
        os.makedirs(tmp)
        try:
            builder(tmp)
            outputs = {fn: sha256_file(os.path.join(tmp, fn))
                       for fn in sorted(os.listdir(tmp))}
            with open(os.path.join(tmp, _META), "w") as f:
                json.dump({"stage": name, "key": key, "params": params,
                           "inputs": inputs, "outputs": outputs},
                          f, sort_keys=True, indent=1)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        os.makedirs(os.path.dirname(stage_dir), exist_ok=True)
        if os.path.isdir(stage_dir):
            shutil.rmtree(tmp)
        else:
            os.replace(tmp, stage_dir)
        return StageRecord(name, key, "computed", stage_dir, params,
                           inputs, outputs)


@dataclass
class PipelineResult:
    """Published layer paths plus the full execution trace."""

    outputs: dict[str, str]
    stages: list[StageRecord]
    reports: list[ConstraintReport]
    provenance_path: str


def _climate_from_dir(stage: StageRecord) -> ClimateInputs:
    def stack(role: str) -> MonthlyStack:
        return MonthlyStack(tuple(
            read_raster(stage.path(f"{role}_{m:02d}.tif"))
            for m in range(1, 13)))

    dem = DemTriple(read_raster(stage.path("dem_min.tif")),
                    read_raster(stage.path("dem_mean.tif")),
                    read_raster(stage.path("dem_max.tif")))
    return ClimateInputs(t_avg=stack("t_avg"), t_min=stack("t_min"),
                         t_max=stack("t_max"), p=stack("precip"), dem=dem)


def _read_terrain(stage: StageRecord, cfg: so.SolarConfig) -> so.TerrainDerivatives:
    return so.TerrainDerivatives(
        slope=read_raster(stage.path("slope.tif")),
        aspect=read_raster(stage.path("aspect.tif")),
        horizon=np.load(stage.path("horizon.npy")),
        azimuth_step_deg=cfg.azimuth_step_deg)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Execute the configured covariate pipeline end to end.

    Stage order follows the data dependencies; each stage resolves
    against the cache before computing.  Published rasters all carry the
    common NaN mask (the union of every loaded input's mask, with the
    fine DEM's mask folded in at coarse resolution).
    """
    selection = cfg.covariates
    solar_selected = [c for c in selection if c in cl.SOLAR_COVARIATES]
    nonsolar_selected = [c for c in selection if c not in cl.SOLAR_COVARIATES]
    need_fine = bool(solar_selected)
    need_climate = bool(nonsolar_selected) or "solar_entransy" in selection

    ds = load_dataset(cfg.manifest_path, need_climate=need_climate,
                      need_fine=need_fine, expected_spec=cfg.grid,
                      fine_factor=cfg.fine_factor)
    cache = _StageCache(cfg.cache_dir)
    stages: list[StageRecord] = []
    reports: list[ConstraintReport] = []
    mode = STRICT if cfg.strict else REPAIR

    climate_inputs = repaired = None
    checks_stage = None
    if need_climate:
        climate_inputs = ds.climate
        climate_keys = {k: v for k, v in ds.checksums.items()
                        if k != "dem_fine"}

        def build_checks(tmp: str) -> None:
            ci = climate_inputs
            local_reports = []
            repaired_stacks = {"t_min": [], "t_avg": [], "t_max": []}
            for m in range(1, 13):
                lo, mid, hi, rep = repair_ordered_triple(
                    ci.t_min.month(m), ci.t_avg.month(m), ci.t_max.month(m),
                    mode=mode, name=f"temp_order_{m:02d}")
                repaired_stacks["t_min"].append(lo)
                repaired_stacks["t_avg"].append(mid)
                repaired_stacks["t_max"].append(hi)
                local_reports.append(rep)
            precip_fixed = []
            for m in range(1, 13):
                fixed, rep = repair_nonnegative(
                    ci.p.month(m), mode=mode, name=f"precip_nonneg_{m:02d}")
                precip_fixed.append(fixed)
                local_reports.append(rep)
            e_lo, e_mid, e_hi, rep = repair_ordered_triple(
                ci.dem.e_min, ci.dem.e_mean, ci.dem.e_max,
                mode=mode, name="elevation_order")
            local_reports.append(rep)

            for role, months in repaired_stacks.items():
                for m, r in enumerate(months, start=1):
                    write_raster(r, os.path.join(tmp, f"{role}_{m:02d}.tif"))
            for m, r in enumerate(precip_fixed, start=1):
                write_raster(r, os.path.join(tmp, f"precip_{m:02d}.tif"))
            write_raster(e_lo, os.path.join(tmp, "dem_min.tif"))
            write_raster(e_mid, os.path.join(tmp, "dem_mean.tif"))
            write_raster(e_hi, os.path.join(tmp, "dem_max.tif"))
            write_reports_csv(local_reports, os.path.join(tmp, "constraints.csv"))

        checks_stage = cache.run("checks", {"mode": mode}, climate_keys,
                                 build_checks)
        stages.append(checks_stage)
        reports.extend(_reports_from_csv(checks_stage.path("constraints.csv")))
        repaired = _climate_from_dir(checks_stage)

    def build_mask(tmp: str) -> None:
        if need_climate:
            spec = ds.climate.t_avg.spec
            union = np.zeros(spec.shape, dtype=bool)
            for stack in (ds.climate.t_avg, ds.climate.t_min,
                          ds.climate.t_max, ds.climate.p):
                union |= stack.nan_mask
            for r in (ds.climate.dem.e_min, ds.climate.dem.e_mean,
                      ds.climate.dem.e_max):
                union |= r.nan_mask
        else:
            spec = ds.dem_fine.spec.coarsen(cfg.fine_factor)
            union = np.zeros(spec.shape, dtype=bool)
        if need_fine:
            f = cfg.fine_factor
            fine_nan = ds.dem_fine.nan_mask
            blocks = np.ones(spec.shape, dtype=bool)
            for dr in range(f):
                for dc in range(f):
                    blocks &= fine_nan[dr::f, dc::f]
            union |= blocks
        write_raster(Raster(spec, np.where(union, np.nan, 0.0)),
                     os.path.join(tmp, "mask.tif"))

    mask_stage = cache.run("mask", {"fine_factor": cfg.fine_factor},
                           ds.checksums, build_mask)
    stages.append(mask_stage)

    climate_stage = None
    if need_climate:
        def build_climate(tmp: str) -> None:
            layers = cl.climate_covariates(repaired, cfg.lapse,
                                           workers=cfg.workers)
            for name, r in layers.items():
                write_raster(r, os.path.join(tmp, f"{name}.tif"))

        climate_stage = cache.run(
            "climate",
            {"lapse_rate": cfg.lapse.lapse_rate,
             "counting_mode": cfg.lapse.counting_mode},
            {f"checks/{fn}": cs for fn, cs in checks_stage.outputs.items()
             if fn != _META},
            build_climate)
        stages.append(climate_stage)

    solar_stage = None
    if need_fine:
        scfg = cfg.solar
        solar_params = {"azimuth_step_deg": scfg.azimuth_step_deg,
                        "horizon_radius_m": scfg.horizon_radius_m}

        def build_terrain(tmp: str) -> None:
            terrain = so.terrain_derivatives(ds.dem_fine, scfg,
                                             workers=cfg.workers)
            write_raster(terrain.slope, os.path.join(tmp, "slope.tif"))
            write_raster(terrain.aspect, os.path.join(tmp, "aspect.tif"))
            np.save(os.path.join(tmp, "horizon.npy"), terrain.horizon)

        terrain_stage = cache.run("terrain", solar_params,
                                  {"dem_fine": ds.checksums["dem_fine"]},
                                  build_terrain)
        stages.append(terrain_stage)

        def build_daily(tmp: str) -> None:
            terrain = _read_terrain(terrain_stage, scfg)
            for day in scfg.central_days:
                r = so.daily_potential_irradiation(terrain, day, scfg,
                                                   workers=cfg.workers)
                write_raster(r, os.path.join(tmp, f"daily_d{day:03d}.tif"))

        daily_stage = cache.run(
            "daily",
            {"time_step_h": scfg.time_step_h,
             "solar_constant": scfg.solar_constant,
             "central_days": list(scfg.central_days),
             "azimuth_step_deg": scfg.azimuth_step_deg},
            {f"terrain/{fn}": cs for fn, cs in terrain_stage.outputs.items()
             if fn != _META},
            build_daily)
        stages.append(daily_stage)

        def build_solar(tmp: str) -> None:
            daily = [read_raster(daily_stage.path(f"daily_d{day:03d}.tif"))
                     for day in scfg.central_days]
            monthly = so.monthly_totals_trapezoid(daily, scfg)
            light_f, dark_f, _ = so.semestral_split(monthly)
            light = so.block_mean_aggregate(light_f, cfg.fine_factor)
            dark = so.block_mean_aggregate(dark_f, cfg.fine_factor)
            write_raster(light, os.path.join(tmp, "s_light.tif"))
            write_raster(dark, os.path.join(tmp, "s_dark.tif"))

        solar_stage = cache.run(
            "solar",
            {"central_days": list(scfg.central_days),
             "fine_factor": cfg.fine_factor},
            {f"daily/{fn}": cs for fn, cs in daily_stage.outputs.items()
             if fn != _META},
            build_solar)
        stages.append(solar_stage)

    publish_inputs = {f"mask/{fn}": cs for fn, cs in mask_stage.outputs.items()
                      if fn != _META}
    if climate_stage is not None:
        publish_inputs.update({f"climate/{fn}": cs for fn, cs
                               in climate_stage.outputs.items() if fn != _META})
    if solar_stage is not None:
        publish_inputs.update({f"solar/{fn}": cs for fn, cs
                               in solar_stage.outputs.items() if fn != _META})

    def build_publish(tmp: str) -> None:
        mask = read_raster(mask_stage.path("mask.tif")).nan_mask
        layers: dict[str, Raster] = {}
        if nonsolar_selected or "solar_entransy" in selection:
            for name in cl.ALL_COVARIATES:
                if name in cl.SOLAR_COVARIATES:
                    continue
                if name in selection or name == "temp_range_mean":
                    layers[name] = read_raster(
                        climate_stage.path(f"{name}.tif"))
        if solar_selected:
            light = read_raster(solar_stage.path("s_light.tif"))
            dark = read_raster(solar_stage.path("s_dark.tif"))
            annual = light.with_values(light.values + dark.values)
            if "solar_annual" in selection:
                layers["solar_annual"] = annual
            if "solar_variation_3x3" in selection:
                layers["solar_variation_3x3"] = so.seasonal_solar_variation(
                    light, dark, workers=cfg.workers)
            if "solar_entransy" in selection:
                layers["solar_entransy"] = so.entransy_proxy(
                    annual, layers["temp_range_mean"])
        for name in selection:
            r = layers[name]
            v = r.values.copy()
            v[mask] = np.nan
            write_raster(Raster(r.spec, v), os.path.join(tmp, f"{name}.tif"))

    publish_stage = cache.run("publish", {"covariates": sorted(selection)},
                              publish_inputs, build_publish)
    stages.append(publish_stage)

    os.makedirs(cfg.output_dir, exist_ok=True)
    outputs: dict[str, str] = {}
    for name in selection:
        src = publish_stage.path(f"{name}.tif")
        dst = os.path.join(cfg.output_dir, f"{name}.tif")
        shutil.copyfile(src, dst)
        outputs[name] = dst
    if checks_stage is not None:
        shutil.copyfile(checks_stage.path("constraints.csv"),
                        os.path.join(cfg.output_dir, "constraints.csv"))

    provenance = {
        "layers": {name: {"file": f"{name}.tif", "stage": "publish",
                          "stage_key": publish_stage.key}
                   for name in selection},
        "stages": {s.name: {"key": s.key, "params": s.params,
                            "inputs": s.inputs,
                            "outputs": {k: v for k, v in s.outputs.items()
                                        if k != _META}}
                   for s in stages},
        "semantics": [{"constraint": r.constraint_name,
                       "violations": r.violations, "repaired": r.repaired,
                       "max_violation_magnitude": r.max_violation_magnitude}
                      for r in reports],
        "metadata": {
            "semester_definition": "per-cell ranking of monthly irradiation",
            "temperature_units":
                "true degC; +100 applied only in the shifted covariates",
            "fine_factor": cfg.fine_factor,
        },
    }
    provenance_path = os.path.join(cfg.output_dir, "provenance.json")
    with open(provenance_path, "w") as f:
        json.dump(provenance, f, sort_keys=True, indent=2)

    return PipelineResult(outputs=outputs, stages=stages, reports=reports,
                          provenance_path=provenance_path)


def _reports_from_csv(path: str) -> list[ConstraintReport]:
    import csv

    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out.append(ConstraintReport(
                row["constraint_name"], int(row["violations"]),
                int(row["repaired"]), float(row["max_violation_magnitude"])))
    return out


def audit_inputs(cfg: PipelineConfig) -> tuple[list[ConstraintReport], bool]:
    """Validate manifest, grids and semantics without computing anything.

    Returns the constraint reports and whether all of them are clean.
    Structural problems (missing roles or files, checksum mismatches,
    misaligned grids, inconsistent stack masks) raise instead.
    """
    selection = cfg.covariates
    need_fine = any(c in cl.SOLAR_COVARIATES for c in selection)
    need_climate = (any(c not in cl.SOLAR_COVARIATES for c in selection)
                    or "solar_entransy" in selection)
    ds = load_dataset(cfg.manifest_path, need_climate=need_climate,
                      need_fine=need_fine, expected_spec=cfg.grid,
                      fine_factor=cfg.fine_factor)
    reports: list[ConstraintReport] = []
    if ds.climate is not None:
        ci = ds.climate
        for m in range(1, 13):
            *_, rep = repair_ordered_triple(
                ci.t_min.month(m), ci.t_avg.month(m), ci.t_max.month(m),
                mode=REPAIR, name=f"temp_order_{m:02d}")
            reports.append(rep)
        for m in range(1, 13):
            reports.append(check_nonnegative(ci.p.month(m),
                                             name=f"precip_nonneg_{m:02d}"))
        *_, rep = repair_ordered_triple(ci.dem.e_min, ci.dem.e_mean,
                                        ci.dem.e_max, mode=REPAIR,
                                        name="elevation_order")
        reports.append(rep)
    clean = all(r.violations == 0 for r in reports)
    return reports, clean


@dataclass(frozen=True)
class NicheStats:
    """Row accounting for one niche export."""

    presence_written: int
    presence_dropped_nan: int
    presence_outside_extent: int
    background_written: int


def niche_export(cov_x: Raster, cov_y: Raster,
                 presence_points: list[tuple[float, float]],
                 sample_count: int, seed: int, out_path: str) -> NicheStats:
    """Write the covariate-pair sample CSV for a niche diagram.

    One row per usable presence point (presence=1) followed by
    sample_count background rows (presence=0) drawn uniformly without
    replacement from the cells where both covariates are finite.
    Presence points outside the extent are skipped; points on NaN cells
    are dropped; both are counted in the returned stats.  Output is a
    pure function of (inputs, seed).
    """
    spec = require_same_grid(cov_x, cov_y)
    xv, yv = cov_x.values, cov_y.values
    rows: list[tuple[float, float, float, float, int]] = []
    outside = dropped = 0
    for lon, lat in presence_points:
        try:
            r, c = spec.cell_index(lon, lat)
        except GridError:
            outside += 1
            continue
        x, y = xv[r, c], yv[r, c]
        if math.isnan(x) or math.isnan(y):
            dropped += 1
            continue
        rows.append((float(lon), float(lat), float(x), float(y), 1))
    presence_written = len(rows)

    finite = ~(np.isnan(xv) | np.isnan(yv))
    eligible = np.flatnonzero(finite.ravel())
    if sample_count < 0:
        raise ConfigError(f"sample_count must be >= 0, got {sample_count}")
    if sample_count > eligible.size:
        raise ConfigError(
            f"requested {sample_count} background samples but only "
            f"{eligible.size} cells have finite covariates")
    if sample_count:
        rng = np.random.default_rng(seed)
        picks = rng.choice(eligible, size=sample_count, replace=False)
        lons = spec.cell_center_lons()
        lats = spec.cell_center_lats()
        nc = spec.n_cols
        for idx in picks:
            r, c = divmod(int(idx), nc)
            rows.append((float(lons[c]), float(lats[r]),
                         float(xv[r, c]), float(yv[r, c]), 0))

    parent = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(parent, exist_ok=True)
    with open(out_path, "w", newline="") as f:
        f.write("lon,lat,x,y,presence\n")
        for lon, lat, x, y, pres in rows:
            f.write(f"{lon:.10g},{lat:.10g},{x:.17g},{y:.17g},{pres}\n")
    return NicheStats(presence_written=presence_written,
                      presence_dropped_nan=dropped,
                      presence_outside_extent=outside,
                      background_written=len(rows) - presence_written)
