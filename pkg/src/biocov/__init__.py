"""Bioclimatic covariates from monthly climate stacks and elevation models.

A config-driven raster pipeline: grid/NaN semantics and map algebra
(:mod:`biocov.grid`, :mod:`biocov.ops`), semantic input repair
(:mod:`biocov.semantics`), temperature/precipitation covariates
(:mod:`biocov.climate`), terrain-shadowed potential solar irradiation
(:mod:`biocov.solar`), GeoTIFF I/O and manifests (:mod:`biocov.geotiff`),
and a cached, deterministic orchestrator with a CLI
(:mod:`biocov.pipeline`, :mod:`biocov.cli`).
"""

from .climate import (
    ALL_COVARIATES,
    BASE_COVARIATES,
    DERIVED_COVARIATES,
    SOLAR_COVARIATES,
    ClimateInputs,
    DemTriple,
    LapseConfig,
    climate_covariates,
)
from .errors import (
    BiocovError,
    ConfigError,
    ConstraintViolationError,
    GridAlignmentError,
    GridError,
    MissingInputError,
    RasterIOError,
)
from .geotiff import (
    DEFAULT_NODATA,
    Dataset,
    LayerManifest,
    load_dataset,
    read_manifest,
    read_raster,
    write_manifest,
    write_raster,
)
from .grid import EUROPE_30S, GridSpec, MonthlyStack, Raster, require_same_grid
from .ops import (
    block_mean_aggregate,
    focal_mean_3x3,
    stack_argmax,
    stack_argmin,
    stack_max,
    stack_mean,
    stack_min,
    stack_sum,
)
from .pipeline import (
    NicheStats,
    PipelineConfig,
    PipelineResult,
    audit_inputs,
    load_config,
    niche_export,
    run_pipeline,
)
from .semantics import (
    ConstraintReport,
    check_nonnegative,
    repair_nonnegative,
    repair_ordered_triple,
)
from .solar import (
    CENTRAL_DAYS,
    SolarConfig,
    TerrainDerivatives,
    daily_potential_irradiation,
    entransy_proxy,
    horizon_angles,
    monthly_totals_trapezoid,
    seasonal_solar_variation,
    semestral_split,
    slope_aspect,
    solar_covariate_layers,
    solar_declination,
    terrain_derivatives,
)
from .synthetic import synthetic_dataset

__version__ = "1.0.0"

__all__ = [
    "ALL_COVARIATES", "BASE_COVARIATES", "DERIVED_COVARIATES",
    "SOLAR_COVARIATES", "CENTRAL_DAYS", "DEFAULT_NODATA", "EUROPE_30S",
    "BiocovError", "ClimateInputs", "ConfigError", "ConstraintReport",
    "ConstraintViolationError", "Dataset", "DemTriple", "GridAlignmentError",
    "GridError", "GridSpec", "LapseConfig", "LayerManifest", "MissingInputError",
    "MonthlyStack", "NicheStats", "PipelineConfig", "PipelineResult", "Raster",
    "RasterIOError", "SolarConfig", "TerrainDerivatives", "audit_inputs",
    "require_same_grid",
    "block_mean_aggregate", "check_nonnegative", "climate_covariates",
    "daily_potential_irradiation", "entransy_proxy", "focal_mean_3x3",
    "horizon_angles", "load_config", "load_dataset", "monthly_totals_trapezoid",
    "niche_export", "read_manifest", "read_raster", "repair_nonnegative",
    "repair_ordered_triple", "run_pipeline", "seasonal_solar_variation",
    "semestral_split", "slope_aspect", "solar_covariate_layers",
    "solar_declination", "stack_argmax", "stack_argmin", "stack_max",
    "stack_mean", "stack_min", "stack_sum", "synthetic_dataset",
    "terrain_derivatives", "write_manifest", "write_raster",
]
