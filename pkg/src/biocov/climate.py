"""Temperature and precipitation covariates.

All temperatures are true degrees Celsius inside the engine; the +100
shift exists only in the two covariates whose definition carries it (and
in the rain-magnitude ratio built on the shifted annual mean).  Applying
the shift anywhere else would poison thresholded quantities: every month
would count as dry, and exp() of a shifted tundra index overflows float32.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .grid import MonthlyStack, Raster, require_same_grid
from . import ops

#: Precipitation floor (mm) replacing zero denominators in seasonality ratios.
PRECIP_FLOOR_MM = 1.0

#: Denominator floor for the rain-magnitude-order ratio: log10(P + 1) at P = 1.
LOG10_FLOOR = float(np.log10(2.0))

#: Gaussen threshold: a month is dry when P (mm) <= 2 T (degC).
DRY_MONTH_FACTOR = 2.0

#: Months with mean temperature at or above this count as "warm".
WARM_MONTH_THRESHOLD_C = 10.0

MEAN_ONLY = "mean_only"
FRACTIONAL = "fractional"

BASE_COVARIATES = (
    "precip_total",
    "precip_driest",
    "precip_wettest",
    "temp_mean",
    "temp_coldest",
    "temp_warmest",
    "tundra_index",
    "temp_range_mean",
)

DERIVED_COVARIATES = (
    "elev_range_3x3",
    "solar_annual",
    "solar_variation_3x3",
    "solar_entransy",
    "precip_variation_dry",
    "precip_variation_wet",
    "dry_months",
    "temp_per_rain_order",
    "temp_shifted",
    "temp_coldest_shifted",
    "tundra_exp",
    "warm_months",
)

ALL_COVARIATES = BASE_COVARIATES + DERIVED_COVARIATES

#: Derived covariates that need the fine DEM / solar chain.
SOLAR_COVARIATES = ("solar_annual", "solar_variation_3x3", "solar_entransy")


@dataclass(frozen=True)
class DemTriple:
    """Minimum / mean / maximum elevation (meters) on one grid."""

    e_min: Raster
    e_mean: Raster
    e_max: Raster

    def __post_init__(self):
        require_same_grid(self.e_min, self.e_mean, self.e_max)

    @property
    def spec(self):
        return self.e_min.spec


@dataclass(frozen=True)
class LapseConfig:
    """Sub-cell temperature adjustment for the warm-month count.

    lapse_rate is the temperature decrease per meter of elevation gain
    (0.0065 degC/m is the standard environmental lapse rate).  In
    ``fractional`` mode each month contributes the fraction of the cell's
    elevation span that sits below the 10 degC isotherm, assuming elevation
    is uniform over [e_min, e_max]; ``mean_only`` counts whole months from
    the cell-mean temperature.
    """

    lapse_rate: float = 0.0065
    counting_mode: str = FRACTIONAL

    def __post_init__(self):
        if self.lapse_rate <= 0:
            raise ValueError(f"lapse_rate must be positive, got {self.lapse_rate}")
        if self.counting_mode not in (MEAN_ONLY, FRACTIONAL):
            raise ValueError(f"unknown counting_mode {self.counting_mode!r}")


@dataclass(frozen=True)
class ClimateInputs:
    """Validated monthly climate stacks plus the elevation triple."""

    t_avg: MonthlyStack
    t_min: MonthlyStack
    t_max: MonthlyStack
    p: MonthlyStack
    dem: DemTriple

    def __post_init__(self):
        spec = self.t_avg.spec
        for name, stack in (("t_min", self.t_min), ("t_max", self.t_max),
                            ("p", self.p)):
            if stack.spec != spec:
                raise GridError(f"{name} grid differs from t_avg grid")
        if self.dem.spec != spec:
            raise GridError("dem grid differs from climate grid")


def base_precip(p: MonthlyStack) -> tuple[Raster, Raster, Raster]:
    """Annual total, driest-month and wettest-month precipitation."""
    return ops.stack_sum(p), ops.stack_min(p), ops.stack_max(p)


def base_temp(t_avg: MonthlyStack) -> tuple[Raster, Raster, Raster]:
    """Annual mean, coldest-month and warmest-month mean temperature."""
    return ops.stack_mean(t_avg), ops.stack_min(t_avg), ops.stack_max(t_avg)


def tundra_index(t_warm: Raster, t_cold: Raster) -> Raster:
    """Nordenskiold tundra boundary index: T_warm + 0.1 T_cold - 9.

    Negative values indicate tundra climate.  Inputs are true Celsius.
    """
    require_same_grid(t_warm, t_cold)
    return t_warm.with_values(t_warm.values + 0.1 * t_cold.values - 9.0)


def exp_tundra(tundra: Raster) -> Raster:
    """Exponential of the tundra index; strictly positive at finite cells."""
    return tundra.with_values(np.exp(tundra.values))


def monthly_temp_range_mean(t_min: MonthlyStack, t_max: MonthlyStack) -> Raster:
    """Mean over months of (monthly max - monthly min) temperature."""
    if t_min.spec != t_max.spec:
        raise GridError("t_min and t_max grids differ")
    acc = t_max.months[0].values - t_min.months[0].values
    for lo, hi in zip(t_min.months[1:], t_max.months[1:]):
        acc = acc + (hi.values - lo.values)
    return Raster(t_min.spec, acc / 12.0)


def elevation_range_3x3(dem: DemTriple, workers: int = 1) -> Raster:
    """3x3-cell focal mean of the per-cell elevation range (max - min)."""
    rng = dem.e_max.with_values(dem.e_max.values - dem.e_min.values)
    return ops.focal_mean_3x3(rng, workers=workers)


def seasonal_precip_variation(p_dry: Raster, p_wet: Raster) -> tuple[Raster, Raster]:
    """Seasonality ratios (wet - dry) / dry and (wet - dry) / wet.

    Denominators are floored at PRECIP_FLOOR_MM so fully arid cells stay
    finite; the wet-normalised ratio is then bounded by 1 wherever the
    wettest month reaches the floor.
    """
    require_same_grid(p_dry, p_wet)
    diff = p_wet.values - p_dry.values
    dry_norm = diff / np.maximum(p_dry.values, PRECIP_FLOOR_MM)
    wet_norm = diff / np.maximum(p_wet.values, PRECIP_FLOOR_MM)
    return p_dry.with_values(dry_norm), p_dry.with_values(wet_norm)


def dry_month_count(p: MonthlyStack, t_avg: MonthlyStack) -> Raster:
    """Number of Gaussen-dry months: P_m <= 2 T_m, true Celsius and mm.

    Integer-valued in [0, 12]; months with T_m <= 0 are effectively never
    dry for nonnegative precipitation.
    """
    if p.spec != t_avg.spec:
        raise GridError("p and t_avg grids differ")
    acc = _indicator(p.months[0].values <= DRY_MONTH_FACTOR * t_avg.months[0].values,
                     p.months[0].values)
    for pm, tm in zip(p.months[1:], t_avg.months[1:]):
        acc = acc + _indicator(pm.values <= DRY_MONTH_FACTOR * tm.values, pm.values)
    return Raster(p.spec, acc)


def warm_month_count(t_avg: MonthlyStack, dem: DemTriple,
                     cfg: LapseConfig | None = None) -> Raster:
    """Number of months with mean temperature >= 10 degC.

    ``mean_only`` counts whole months from the cell-mean temperature.
    ``fractional`` adjusts for sub-cell relief: the monthly temperature at
    elevation E is T_m + lapse_rate * (e_mean - E), and the month
    contributes the fraction of [e_min, e_max] that stays at or above the
    threshold, giving a real-valued count in [0, 12].  Flat cells reduce to
    the mean-only indicator.
    """
    cfg = cfg or LapseConfig()
    if dem.spec != t_avg.spec:
        raise GridError("dem and t_avg grids differ")
    if cfg.counting_mode == MEAN_ONLY:
        acc = _indicator(t_avg.months[0].values >= WARM_MONTH_THRESHOLD_C,
                         t_avg.months[0].values)
        for tm in t_avg.months[1:]:
            acc = acc + _indicator(tm.values >= WARM_MONTH_THRESHOLD_C, tm.values)
        return Raster(t_avg.spec, acc)

    e_min, e_mean, e_max = dem.e_min.values, dem.e_mean.values, dem.e_max.values
    span = e_max - e_min
    flat = span <= 0
    acc = np.zeros(t_avg.spec.shape)
    for tm in t_avg.months:
        t = tm.values
        # Temperature decreases with elevation, so the warm part of the
        # span is [e_min, e_star]; e_star is where T(E) crosses 10 degC.
        e_star = e_mean + (t - WARM_MONTH_THRESHOLD_C) / cfg.lapse_rate
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.clip((e_star - e_min) / span, 0.0, 1.0)
        frac = np.where(flat, (t >= WARM_MONTH_THRESHOLD_C).astype(float), frac)
        frac = np.where(np.isnan(t) | np.isnan(span), np.nan, frac)
        acc = acc + frac
    return Raster(t_avg.spec, acc)


def shifted_temps(t_mean: Raster, t_cold: Raster) -> tuple[Raster, Raster]:
    """The two +100 degC covariates (annual mean and coldest month)."""
    require_same_grid(t_mean, t_cold)
    return (t_mean.with_values(t_mean.values + 100.0),
            t_cold.with_values(t_cold.values + 100.0))


def temp_per_rain_order(t_plus100: Raster, p_total: Raster) -> Raster:
    """Shifted annual temperature per decimal order of rain magnitude.

    Computes T+100 / log10(P + 1) with the denominator floored at
    log10(2), the value it takes at 1 mm, so arid cells stay finite and
    the covariate remains monotone in P.
    """
    require_same_grid(t_plus100, p_total)
    with np.errstate(invalid="ignore"):
        denom = np.maximum(np.log10(p_total.values + 1.0), LOG10_FLOOR)
    return t_plus100.with_values(t_plus100.values / denom)


def _indicator(cond: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """0/1 float array, NaN where ``ref`` is NaN."""
    return np.where(np.isnan(ref), np.nan, cond.astype(float))


def climate_covariates(inputs: ClimateInputs, lapse: LapseConfig | None = None,
                       workers: int = 1) -> dict[str, Raster]:
    """All base and derived covariates that need no solar layers.

    Returns a name -> Raster dict covering every member of
    BASE_COVARIATES and the nine non-solar DERIVED_COVARIATES.
    """
    lapse = lapse or LapseConfig()
    p_total, p_dry, p_wet = base_precip(inputs.p)
    t_mean, t_cold, t_warm = base_temp(inputs.t_avg)
    tundra = tundra_index(t_warm, t_cold)
    dt_range = monthly_temp_range_mean(inputs.t_min, inputs.t_max)
    dry_norm, wet_norm = seasonal_precip_variation(p_dry, p_wet)
    t_shift, t_cold_shift = shifted_temps(t_mean, t_cold)
    return {
        "precip_total": p_total,
        "precip_driest": p_dry,
        "precip_wettest": p_wet,
        "temp_mean": t_mean,
        "temp_coldest": t_cold,
        "temp_warmest": t_warm,
        "tundra_index": tundra,
        "temp_range_mean": dt_range,
        "elev_range_3x3": elevation_range_3x3(inputs.dem, workers=workers),
        "precip_variation_dry": dry_norm,
        "precip_variation_wet": wet_norm,
        "dry_months": dry_month_count(inputs.p, inputs.t_avg),
        "temp_per_rain_order": temp_per_rain_order(t_shift, p_total),
        "temp_shifted": t_shift,
        "temp_coldest_shifted": t_cold_shift,
        "tundra_exp": exp_tundra(tundra),
        "warm_months": warm_month_count(inputs.t_avg, inputs.dem, lapse),
    }
