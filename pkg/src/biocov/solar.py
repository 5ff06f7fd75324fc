"""Potential solar irradiation over terrain.

Beam-only, airless model: irradiance at a cell is
solar_constant * eccentricity * cos(incidence), zeroed whenever the sun
is below the local horizon line.  No atmospheric transmittance, diffuse
or reflected components.  Daily totals are integrated on a fixed 24 h
time grid so that every cell, worker and rerun sees the same quadrature
nodes; monthly totals come from day-axis trapezoidal integration of the
12 central-day maps.

Angle conventions: latitude and declination in radians; azimuths in
radians clockwise from north; slope is the inclination from horizontal;
aspect is the azimuth of the uphill direction (NaN on flat cells).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .grid import METERS_PER_DEGREE, Raster, require_same_grid
from .ops import block_mean_aggregate, focal_mean_3x3, run_row_bands

SOLAR_CONSTANT_W_M2 = 1367.0

#: Day-of-year of the 15th of each month in a 365-day year.
CENTRAL_DAYS = (15, 46, 74, 105, 135, 166, 196, 227, 258, 288, 319, 349)

#: Cumulative day count at month starts (365-day year, no leap day).
MONTH_EDGES = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334, 365)

DAYS_IN_YEAR = 365


@dataclass(frozen=True)
class SolarConfig:
    """Discretization choices for the solar chain.

    azimuth_step_deg controls both the horizon scan and the shadow
    lookup granularity.  time_step_h must divide 24 so the daily grid
    has exact endpoints at midnight.
    """

    azimuth_step_deg: float = 5.0
    horizon_radius_m: float = 20000.0
    time_step_h: float = 0.5
    solar_constant: float = SOLAR_CONSTANT_W_M2
    central_days: tuple[int, ...] = CENTRAL_DAYS

    def __post_init__(self):
        if self.azimuth_step_deg <= 0 or (360.0 / self.azimuth_step_deg) % 1.0:
            raise ValueError("azimuth_step_deg must evenly divide 360")
        if not 0 < self.time_step_h <= 1:
            raise ValueError("time_step_h must be in (0, 1]")
        if (24.0 / self.time_step_h) % 1.0:
            raise ValueError("time_step_h must evenly divide 24")
        if self.horizon_radius_m <= 0:
            raise ValueError("horizon_radius_m must be positive")
        if self.solar_constant <= 0:
            raise ValueError("solar_constant must be positive")
        days = tuple(int(d) for d in self.central_days)
        if len(days) != 12 or any(b <= a for a, b in zip(days, days[1:])):
            raise ValueError("central_days must be 12 strictly increasing days")
        if days[0] < 1 or days[-1] > DAYS_IN_YEAR:
            raise ValueError("central_days must lie in [1, 365]")
        object.__setattr__(self, "central_days", days)

    @property
    def n_azimuths(self) -> int:
        return int(round(360.0 / self.azimuth_step_deg))


@dataclass(frozen=True)
class TerrainDerivatives:
    """Slope, aspect and per-azimuth horizon angles for one DEM grid.

    horizon has shape (n_rows, n_cols, n_azimuths); entry a holds the
    elevation angle of the terrain horizon toward azimuth
    a * azimuth_step_deg.  Rows of a NaN DEM cell are NaN throughout.
    """

    slope: Raster
    aspect: Raster
    horizon: np.ndarray
    azimuth_step_deg: float

    def __post_init__(self):
        require_same_grid(self.slope, self.aspect)
        n_az = int(round(360.0 / self.azimuth_step_deg))
        expected = self.slope.spec.shape + (n_az,)
        if self.horizon.shape != expected:
            raise GridError(
                f"horizon shape {self.horizon.shape} != expected {expected}")

    @property
    def spec(self):
        return self.slope.spec


def solar_declination(day_of_year: int) -> float:
    """Sun declination (radians) for a day of the 365-day year."""
    if not 1 <= day_of_year <= DAYS_IN_YEAR:
        raise ValueError(f"day_of_year {day_of_year} outside [1, 365]")
    return math.radians(23.45) * math.sin(
        2.0 * math.pi * (284 + day_of_year) / DAYS_IN_YEAR)


def eccentricity_factor(day_of_year: int) -> float:
    """Sun-earth distance correction to the solar constant."""
    if not 1 <= day_of_year <= DAYS_IN_YEAR:
        raise ValueError(f"day_of_year {day_of_year} outside [1, 365]")
    return 1.0 + 0.033 * math.cos(2.0 * math.pi * day_of_year / DAYS_IN_YEAR)


def slope_aspect(dem: Raster) -> tuple[Raster, Raster]:
    """Slope and uphill-aspect from the weighted 8-neighbor gradient.

    Cell metric is latitude-corrected: one column step spans
    METERS_PER_DEGREE * cell_size * cos(lat) meters at that row.  Edges
    reuse the border cells (replicated frame) and NaN neighbors of a
    finite cell are substituted by the center value, so slope and aspect
    are NaN exactly where the DEM is NaN.  Aspect is NaN on flat cells
    where the direction is undefined.
    """
    z = dem.values
    nr, nc = z.shape
    zp = np.pad(z, 1, mode="edge")
    center = zp[1:-1, 1:-1]
    win = {}
    for key, (dr, dc) in {"nw": (0, 0), "n": (0, 1), "ne": (0, 2),
                          "w": (1, 0), "e": (1, 2),
                          "sw": (2, 0), "s": (2, 1), "se": (2, 2)}.items():
        v = zp[dr:dr + nr, dc:dc + nc]
        win[key] = np.where(np.isnan(v), center, v)

    lat = np.radians(dem.spec.cell_center_lats())[:, None]
    dx = METERS_PER_DEGREE * dem.spec.cell_size_deg * np.cos(lat)
    dy = METERS_PER_DEGREE * dem.spec.cell_size_deg

    p = ((win["ne"] + 2.0 * win["e"] + win["se"])
         - (win["nw"] + 2.0 * win["w"] + win["sw"])) / (8.0 * dx)
    q = ((win["nw"] + 2.0 * win["n"] + win["ne"])
         - (win["sw"] + 2.0 * win["s"] + win["se"])) / (8.0 * dy)

    slope = np.arctan(np.hypot(p, q))
    with np.errstate(invalid="ignore"):
        aspect = np.mod(np.arctan2(p, q), 2.0 * math.pi)
    aspect = np.where((p == 0.0) & (q == 0.0), np.nan, aspect)
    bad = np.isnan(z)
    slope[bad] = np.nan
    aspect[bad] = np.nan
    return dem.with_values(slope), dem.with_values(aspect)


def horizon_angles(dem: Raster, cfg: SolarConfig, workers: int = 1) -> np.ndarray:
    """Per-cell horizon elevation angle toward each scan azimuth.

    Each ray is sampled at one-cell increments (the east-west cell width
    at the cell's own row) out to horizon_radius_m, reading the nearest
    DEM cell at every sample; the angle is the maximum of
    atan((h_sample - h_cell) / ray_distance), floored at 0.  NaN samples
    are transparent (water casts no shadow); the output row of a NaN
    cell is NaN.  Ties in the nearest-cell rounding resolve toward the
    higher index.
    """
    nr, nc = dem.spec.shape
    z = dem.values
    n_az = cfg.n_azimuths
    lats = np.radians(dem.spec.cell_center_lats())
    coslat = np.cos(lats)
    step_m = METERS_PER_DEGREE * dem.spec.cell_size_deg * coslat
    n_steps = np.floor(cfg.horizon_radius_m / step_m).astype(int)
    az = np.radians(np.arange(n_az) * cfg.azimuth_step_deg)
    cols = np.arange(nc)
    out = np.empty((nr, nc, n_az))

    def band(r0: int, r1: int) -> None:
        row_ids = np.arange(r0, r1)
        band_steps = n_steps[r0:r1]
        k_max = int(band_steps.max()) if r1 > r0 else 0
        dist = step_m[r0:r1][:, None]
        center = z[r0:r1]
        center_nan = np.isnan(center)
        for a in range(n_az):
            sin_a = math.sin(az[a])
            cos_a = math.cos(az[a])
            best = np.zeros((r1 - r0, nc))
            for k in range(1, k_max + 1):
                dcol = int(math.floor(k * sin_a + 0.5))
                if abs(dcol) >= nc:
                    break
                tr = row_ids - np.floor(k * cos_a * coslat[r0:r1] + 0.5).astype(int)
                ok = (k <= band_steps) & (tr >= 0) & (tr < nr)
                if not ok.any():
                    continue
                if dcol >= 0:
                    sc = slice(0, nc - dcol)
                    tc = cols[dcol:]
                else:
                    sc = slice(-dcol, nc)
                    tc = cols[:nc + dcol]
                zt = z[np.clip(tr, 0, nr - 1)[:, None], tc[None, :]]
                tan_v = (zt - center[:, sc]) / (k * dist)
                tan_v = np.where(ok[:, None], tan_v, np.nan)
                np.fmax(best[:, sc], tan_v, out=best[:, sc])
            ang = np.arctan(best)
            ang[center_nan] = np.nan
            out[r0:r1, :, a] = ang

    run_row_bands(band, nr, workers)
    return out


def terrain_derivatives(dem: Raster, cfg: SolarConfig,
                        workers: int = 1) -> TerrainDerivatives:
    """Slope, aspect and horizon angles in one pass over the DEM."""
    slope, aspect = slope_aspect(dem)
    horizon = horizon_angles(dem, cfg, workers=workers)
    return TerrainDerivatives(slope, aspect, horizon, cfg.azimuth_step_deg)


def daily_potential_irradiation(terrain: TerrainDerivatives, day: int,
                                cfg: SolarConfig,
                                lat: float | np.ndarray | None = None,
                                workers: int = 1) -> Raster:
    """Daily beam irradiation total (Wh/m^2) for one day of year.

    Trapezoidal integration of
    solar_constant * E0 * max(cos theta_i, 0) on the fixed grid
    t = 0, dt, ..., 24 solar hours, with the irradiance zeroed whenever
    the sun is below the geometric horizon or below the terrain horizon
    at its current azimuth (nearest precomputed direction).  Polar-night
    cells integrate to exactly 0.

    lat overrides the grid's own cell-center latitudes (radians; scalar
    or one value per row); the override exists for column-invariant
    test grids placed at an arbitrary latitude.
    """
    spec = terrain.spec
    nr, nc = spec.shape
    if lat is None:
        lat_rows = np.radians(spec.cell_center_lats())
    else:
        lat_rows = np.broadcast_to(np.asarray(lat, dtype=float), (nr,)).copy()
    if np.any(np.abs(lat_rows) >= math.pi / 2):
        raise ValueError("latitudes must satisfy |lat| < 90 degrees")

    decl = solar_declination(day)
    e0 = eccentricity_factor(day)
    sin_d, cos_d = math.sin(decl), math.cos(decl)
    coef = cfg.solar_constant * e0

    n_t = int(round(24.0 / cfg.time_step_h)) + 1
    t = np.arange(n_t) * cfg.time_step_h
    omega = (t - 12.0) * (math.pi / 12.0)
    cos_om = np.cos(omega)
    weights = np.full(n_t, cfg.time_step_h)
    weights[0] = weights[-1] = cfg.time_step_h / 2.0

    az_rad = math.radians(terrain.azimuth_step_deg)
    n_az = terrain.horizon.shape[2]

    slope_v = terrain.slope.values
    aspect_v = terrain.aspect.values
    # Flat cells have undefined aspect; sin(slope) = 0 removes the term,
    # so any placeholder works. 0 keeps NaN from leaking off the mask.
    aspect_filled = np.where(np.isnan(aspect_v) & ~np.isnan(slope_v),
                             0.0, aspect_v)
    gamma_n = aspect_filled + math.pi  # downhill = surface-normal azimuth
    sin_b = np.sin(slope_v)
    cos_b = np.cos(slope_v)
    out = np.empty((nr, nc))

    def band(r0: int, r1: int) -> None:
        for r in range(r0, r1):
            phi = lat_rows[r]
            sin_p, cos_p = math.sin(phi), math.cos(phi)
            sin_alpha = sin_p * sin_d + cos_p * cos_d * cos_om
            up = sin_alpha > 0.0
            alpha = np.arcsin(np.clip(sin_alpha, -1.0, 1.0))
            cos_alpha = np.cos(alpha)
            with np.errstate(divide="ignore", invalid="ignore"):
                cos_az = (sin_d - sin_alpha * sin_p) / (cos_alpha * cos_p)
            sun_az = np.arccos(np.clip(cos_az, -1.0, 1.0))
            sun_az = np.where(omega > 0.0, 2.0 * math.pi - sun_az, sun_az)
            bins = np.floor(sun_az / az_rad + 0.5).astype(int) % n_az

            lit = alpha[None, :] > terrain.horizon[r][:, bins]
            cos_inc = (sin_alpha[None, :] * cos_b[r][:, None]
                       + cos_alpha[None, :] * sin_b[r][:, None]
                       * np.cos(sun_az[None, :] - gamma_n[r][:, None]))
            beam = coef * np.maximum(cos_inc, 0.0) * (lit & up[None, :])
            out[r] = (beam * weights[None, :]).sum(axis=1)

    run_row_bands(band, nr, workers)
    return Raster(spec, out)


def monthly_totals_trapezoid(daily: list[Raster],
                             cfg: SolarConfig) -> list[Raster]:
    """Monthly irradiation totals from the 12 central-day maps.

    The per-cell daily total is treated as piecewise linear through the
    central-day samples, closed periodically with the December sample
    repeated at central_day[11] - 365 and the January one at
    central_day[0] + 365.  Each month's total is the integral of that
    interpolant over the month's calendar days; the pieces partition the
    year, so the 12 totals sum to the annual integral by additivity.
    """
    if len(daily) != 12:
        raise ValueError(f"need 12 daily maps, got {len(daily)}")
    require_same_grid(*daily)
    spec = daily[0].spec
    cds = [float(d) for d in cfg.central_days]
    knots = [cds[11] - DAYS_IN_YEAR] + cds + [cds[0] + DAYS_IN_YEAR]
    vals = [daily[11].values] + [r.values for r in daily] + [daily[0].values]

    months = []
    for m in range(12):
        a, b = float(MONTH_EDGES[m]), float(MONTH_EDGES[m + 1])
        acc = np.zeros(spec.shape)
        for s in range(len(knots) - 1):
            xl, xr = knots[s], knots[s + 1]
            lo, hi = max(a, xl), min(b, xr)
            if hi <= lo:
                continue
            vl, vr = vals[s], vals[s + 1]
            span = xr - xl
            f_lo = vl + (vr - vl) * ((lo - xl) / span)
            f_hi = vl + (vr - vl) * ((hi - xl) / span)
            acc = acc + (hi - lo) * 0.5 * (f_lo + f_hi)
        months.append(Raster(spec, acc))
    return months


def semestral_split(monthly: list[Raster]) -> tuple[Raster, Raster, Raster]:
    """Light/dark semester totals by per-cell ranking of the 12 months.

    s_light sums the 6 largest monthly totals of each cell, s_dark the 6
    smallest, and s_annual is defined as their sum, so
    s_annual == s_light + s_dark holds bit-exactly.  The split is a
    per-cell ranking, not a fixed calendar semester.
    """
    if len(monthly) != 12:
        raise ValueError(f"need 12 monthly maps, got {len(monthly)}")
    require_same_grid(*monthly)
    stack = np.stack([r.values for r in monthly])
    ranked = np.sort(stack, axis=0)
    dark = ranked[0].copy()
    for i in range(1, 6):
        dark += ranked[i]
    light = ranked[6].copy()
    for i in range(7, 12):
        light += ranked[i]
    bad = np.isnan(stack).any(axis=0)
    dark[bad] = np.nan
    light[bad] = np.nan
    spec = monthly[0].spec
    return (Raster(spec, light), Raster(spec, dark),
            Raster(spec, light + dark))


def seasonal_solar_variation(s_light: Raster, s_dark: Raster,
                             workers: int = 1) -> Raster:
    """(light - dark) / dark on the 3x3 focal means of both semesters.

    Cells whose 3x3 dark mean is 0 (no winter sun in the whole window)
    have no defined ratio and come back NaN.
    """
    require_same_grid(s_light, s_dark)
    light3 = focal_mean_3x3(s_light, workers=workers).values
    dark3 = focal_mean_3x3(s_dark, workers=workers).values
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (light3 - dark3) / dark3
    ratio = np.where(dark3 == 0.0, np.nan, ratio)
    return s_light.with_values(ratio)


def entransy_proxy(s_annual: Raster, delta_t: Raster) -> Raster:
    """Annual irradiation times mean monthly temperature range."""
    require_same_grid(s_annual, delta_t)
    return s_annual.with_values(s_annual.values * delta_t.values)


def solar_covariate_layers(dem_fine: Raster, cfg: SolarConfig,
                           factor: int = 4,
                           workers: int = 1) -> dict[str, Raster]:
    """Fine-resolution solar chain aggregated to the coarse grid.

    Runs terrain -> central-day maps -> monthly totals -> semester split
    at the DEM's own resolution, then block-aggregates each semester to
    the coarse grid.  Returns the aggregated s_light / s_dark plus their
    sum s_annual; the caller derives the published covariates.
    """
    terrain = terrain_derivatives(dem_fine, cfg, workers=workers)
    daily = [daily_potential_irradiation(terrain, d, cfg, workers=workers)
             for d in cfg.central_days]
    monthly = monthly_totals_trapezoid(daily, cfg)
    light_f, dark_f, _ = semestral_split(monthly)
    light = block_mean_aggregate(light_f, factor)
    dark = block_mean_aggregate(dark_f, factor)
    annual = light.with_values(light.values + dark.values)
    return {"s_light": light, "s_dark": dark, "s_annual": annual}
