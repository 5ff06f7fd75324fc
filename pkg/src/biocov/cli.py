"""Command-line entry points.

Three subcommands: ``compute`` runs the covariate pipeline from a config
file, ``niche`` samples a covariate pair into a scatter CSV, and
``validate`` audits a config/manifest/input tree without computing.
Exit codes: 0 success, 2 validation failure (bad config, misaligned
grids, semantic violations in strict runs), 3 missing input (absent
file, manifest role, or layer).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

from .errors import BiocovError, ConfigError, MissingInputError
from .geotiff import read_raster
from .pipeline import audit_inputs, load_config, niche_export, run_pipeline


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biocov",
        description="Bioclimatic covariate pipeline over raster climate "
                    "and elevation inputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser(
        "compute", help="run the pipeline described by a config file")
    p_compute.add_argument("--config", required=True, help="INI config file")
    p_compute.add_argument(
        "--only", default=None, metavar="NAMES",
        help="comma-separated covariate subset (default: config selection)")
    p_compute.add_argument("--workers", type=int, default=None,
                           help="override worker count")
    p_compute.add_argument("--strict", action="store_true",
                           help="fail on semantic violations instead of repairing")

    p_niche = sub.add_parser(
        "niche", help="export a covariate-pair sample CSV for niche plots")
    p_niche.add_argument("--x", required=True, help="raster for the x axis")
    p_niche.add_argument("--y", required=True, help="raster for the y axis")
    p_niche.add_argument("--presence", required=True,
                         help="CSV of presence points with lon,lat columns")
    p_niche.add_argument("--samples", type=int, required=True,
                         help="number of background samples")
    p_niche.add_argument("--seed", type=int, required=True,
                         help="background sampling seed")
    p_niche.add_argument("--out", required=True, help="output CSV path")

    p_validate = sub.add_parser(
        "validate", help="audit manifest, grids and semantics; no outputs")
    p_validate.add_argument("--config", required=True, help="INI config file")
    return parser


def _read_presence_csv(path: str) -> list[tuple[float, float]]:
    points = []
    try:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or not {"lon", "lat"} <= set(
                    reader.fieldnames):
                raise ConfigError(f"{path}: presence CSV needs lon,lat columns")
            for i, row in enumerate(reader, start=2):
                try:
                    points.append((float(row["lon"]), float(row["lat"])))
                except ValueError as e:
                    raise ConfigError(f"{path}:{i}: bad coordinate: {e}") from e
    except FileNotFoundError:
        raise MissingInputError(f"presence file not found: {path}") from None
    return points


def _cmd_compute(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.only:
        names = tuple(c.strip() for c in args.only.split(",") if c.strip())
        overrides["covariates"] = names
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.strict:
        overrides["strict"] = True
    if overrides:
        cfg = replace(cfg, **overrides)

    result = run_pipeline(cfg)
    for s in result.stages:
        print(f"stage {s.name}: {s.status} [{s.key[:12]}]")
    flagged = [r for r in result.reports if r.violations]
    for r in flagged:
        print(f"constraint {r.constraint_name}: {r.violations} violations, "
              f"{r.repaired} repaired")
    print(f"wrote {len(result.outputs)} layers to {cfg.output_dir}")
    return 0


def _cmd_niche(args) -> int:
    cov_x = read_raster(args.x)
    cov_y = read_raster(args.y)
    points = _read_presence_csv(args.presence)
    stats = niche_export(cov_x, cov_y, points, args.samples, args.seed,
                         args.out)
    print(f"presence rows: {stats.presence_written} "
          f"(dropped on NaN cells: {stats.presence_dropped_nan}, "
          f"outside extent: {stats.presence_outside_extent})")
    print(f"background rows: {stats.background_written}")
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    reports, clean = audit_inputs(cfg)
    for r in reports:
        if r.violations:
            print(f"constraint {r.constraint_name}: {r.violations} violations "
                  f"(worst {r.max_violation_magnitude:g})")
    if clean:
        print("inputs valid: manifest complete, grids aligned, "
              "semantics clean")
        return 0
    total = sum(r.violations for r in reports)
    print(f"inputs structurally valid; {total} semantic violations "
          + ("(strict mode: failing)" if cfg.strict
             else "(repair mode would fix them)"))
    return 2 if cfg.strict else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"compute": _cmd_compute, "niche": _cmd_niche,
                "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except MissingInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except BiocovError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
