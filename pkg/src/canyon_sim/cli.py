"""Command-line entry point: ``canyon-sim <subcommand> [options]``.

Exit codes: 0 success, 1 validation failure, 2 config or input error,
3 generation error. Summaries go to stdout; data goes to files.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import RunConfig, require
from .errors import ConfigError, GenerationError
from .harness import (
    DEFAULT_D0,
    ManifestEntry,
    csv_text,
    export,
    json_text,
    run_campaign,
    summarize,
    write_artifact,
    write_manifest,
)
from .morphology import composite_factor, scenario_class
from .pathloss import SWEEP_COLUMNS, LinkState, sweep
from .smallscale import param_table
from .stats import pdp, rms_delay_spread
from .synthesis import MPC_CSV_COLUMNS, cir, drop_to_dict, generate_indexed_drop, mpc_rows
from .validation import SUITES, run_validation

log = logging.getLogger("canyon_sim")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_GENERATION = 0, 1, 2, 3

DEFAULT_OUT = "canyon_out"


def _formats(args, cfg: RunConfig) -> tuple[str, ...]:
    value = args.format or cfg.get("format", "both")
    if value not in ("csv", "json", "both"):
        raise ConfigError(f"format must be csv, json or both, got {value!r}")
    return ("csv", "json") if value == "both" else (value,)


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg.get("out") is not None:
        return cfg.path(cfg.get("out"))
    return Path(DEFAULT_OUT)


# -- subcommands ------------------------------------------------------------------

def cmd_envfactor(args, cfg: RunConfig) -> int:
    region = cfg.region(args.region)
    if region is None:
        raise ConfigError("envfactor needs a region file (positional argument or 'region')")
    env = composite_factor(region, cfg.morphology())
    cls = scenario_class(env.s)
    if env.extrapolated:
        log.warning("S=%.4g lies outside the measured range 10..50; downstream tables "
                    "would be extrapolated", env.s)
    label = region.name or "region"
    print(f"{label}: {region.n} building(s), area {region.region_area:g} m^2")
    print(f"  h_height = {env.h_height:.6g} m")
    print(f"  h_std    = {env.h_std:.6g} m")
    print(f"  rho      = {env.rho:.6g}")
    print(f"  S        = {env.s:.6g}")
    print(f"  S_norm   = {env.s_norm:.6g}")
    print(f"  class    = {cls}")
    if args.out is not None or cfg.get("out") is not None:
        root = _out_dir(args, cfg)
        doc = {**env.to_dict(), "class": cls, "extrapolated": env.extrapolated,
               "region": label}
        entry = write_artifact(root, "envfactor.json", json_text(doc), "envfactor", "json")
        write_manifest(root, [entry])
        print(f"wrote {root / entry.path}")
    return EXIT_OK


def cmd_pathloss(args, cfg: RunConfig) -> int:
    plcfg = cfg.pathloss(args.s_convention)
    if plcfg.breakpoint_distance is None:
        raise ConfigError("pathloss.breakpoint_distance_m is required: the NLOS model "
                          "has no default breakpoint distance")
    env = cfg.env(args.region, args.preset)
    sw = cfg.section("sweep")
    d_min = require(sw, "d_min_m", "sweep") if "d_min_m" in sw else 10.0
    d_max = require(sw, "d_max_m", "sweep") if "d_max_m" in sw else 1000.0
    n = require(sw, "n_points", "sweep", int) if "n_points" in sw else 50
    if args.points is not None:
        n = args.points
    try:
        table = sweep(d_min, d_max, n, env, plcfg)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from exc

    root = _out_dir(args, cfg)
    meta = {"pathloss": plcfg.to_dict(), "env": env.to_dict(), "columns": list(SWEEP_COLUMNS)}
    entries = []
    formats = _formats(args, cfg)
    if "csv" in formats:
        entries.append(write_artifact(root, "pathloss_sweep.csv",
                                      csv_text(SWEEP_COLUMNS, table.tolist()),
                                      "pathloss_sweep", "csv"))
        entries.append(write_artifact(root, "pathloss_sweep.meta.json", json_text(meta),
                                      "pathloss_sweep", "json-sidecar"))
    if "json" in formats:
        entries.append(write_artifact(root, "pathloss_sweep.json",
                                      json_text({**meta, "rows": table.tolist()}),
                                      "pathloss_sweep", "json"))
    write_manifest(root, entries)
    print(f"s_convention = {plcfg.s_convention.value} (S = {env.s:.6g}, "
          f"S_norm = {env.s_norm:.6g}, d0 = {plcfg.breakpoint_distance:g} m)")
    print(f"{table.shape[0]} points from {d_min:g} m to {d_max:g} m -> {root}")
    return EXIT_OK


def cmd_generate(args, cfg: RunConfig) -> int:
    g = cfg.section("generate")
    n = args.n if args.n is not None else (require(g, "n_drops", "generate", int)
                                             if "n_drops" in g else 1)
    if n < 1:
        raise ConfigError(f"generate.n_drops must be >= 1, got {n}")
    try:
        state = LinkState.parse(args.state or g.get("state", "LOS"))
    except ValueError as exc:
        raise ConfigError(f"generate.state: {exc}") from exc
    d = args.distance if args.distance is not None else (
        require(g, "distance_m", "generate") if "distance_m" in g else 100.0)
    if not d > 0:
        raise ConfigError(f"generate.distance_m must be > 0, got {d}")
    env = cfg.env(args.region, args.preset)
    plcfg = cfg.pathloss(args.s_convention)
    if plcfg.breakpoint_distance is None:
        preset = cfg.preset(args.preset)
        d0 = preset.default_d0 if preset is not None else DEFAULT_D0
        log.info("pathloss.breakpoint_distance_m not set; using %g m", d0)
        plcfg = plcfg.with_breakpoint(d0)
    table, synth = cfg.table(args.table), cfg.synthesis()
    # table errors are configuration errors, so evaluate before generating
    params = param_table(env.s_norm, state, table)
    seed = cfg.seed(args.seed)
    if env.extrapolated:
        log.warning("S=%.4g lies outside the measured range; tables are extrapolated", env.s)

    root = _out_dir(args, cfg)
    formats = _formats(args, cfg)
    entries: list[ManifestEntry] = []
    rows, n_cl, n_mpc, ds = [], [], [], []
    for i in range(n):
        try:
            drop = generate_indexed_drop(env, state, d, plcfg, seed, i, table=table,
                                         synth=synth, params=params)
            spread = rms_delay_spread(pdp(cir(drop)))
        except Exception as exc:
            raise GenerationError(f"drop {i} failed: {exc}", seed_record=(seed, i)) from exc
        n_cl.append(len(drop.clusters))
        n_mpc.append(drop.n_mpc)
        ds.append(spread)
        # drop documents are JSON whatever the format; --format json skips the CSV
        entries.append(write_artifact(root, f"drops/drop_{i:05d}.json",
                                      json_text(drop_to_dict(drop)), "drop", "json"))
        rows.extend(mpc_rows(drop, i))
    if "csv" in formats:
        entries.append(write_artifact(root, "mpcs.csv", csv_text(MPC_CSV_COLUMNS, rows),
                                      "mpcs", "csv"))
    write_manifest(root, entries)
    print(f"{n} {state.value} drop(s) at d = {d:g} m, S = {env.s:.6g}, seed {seed}")
    print(f"  mean N_cl  = {np.mean(n_cl):.4g}")
    print(f"  mean N_MPC = {sum(n_mpc) / sum(n_cl):.4g} per cluster "
          f"({np.mean(n_mpc):.4g} per drop)")
    print(f"  mean DS    = {np.mean(ds):.4g} ns")
    print(f"wrote {len(entries)} file(s) to {root}")
    return EXIT_OK


def cmd_campaign(args, cfg: RunConfig) -> int:
    preset = cfg.preset(args.preset)
    if preset is None:
        raise ConfigError("campaign needs a preset ('preset' in the config or --preset)")
    c = cfg.section("campaign")
    n = args.n if args.n is not None else (require(c, "n_drops", "campaign", int)
                                             if "n_drops" in c else 1000)
    if n < 1:
        raise ConfigError(f"campaign.n_drops must be >= 1, got {n}")
    workers = args.workers if args.workers is not None else cfg.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"workers must be a positive integer, got {workers!r}")
    seed = cfg.seed(args.seed)
    result = run_campaign(preset, n, cfg.pathloss(args.s_convention), seed,
                          table=cfg.table(args.table), synth=cfg.synthesis(),
                          workers=workers, morph=cfg.morphology())
    root = _out_dir(args, cfg)
    entries = export(result, root, _formats(args, cfg))

    print(f"campaign {preset.name}: {n} drop(s), S = {preset.s_value:g}, seed {seed}, "
          f"s_convention = {result.plcfg.s_convention.value}")
    for state, sub in summarize(result).items():
        print(f"  {state} (n={sub['n']})      q05        q50        q95")
        for metric, unit in (("ds_ns", "ns"), ("asa", ""), ("esa", "")):
            q = sub[metric]
            label = f"{metric} [{unit}]" if unit else metric
            print(f"    {label:<10} " + " ".join(f"{v:10.4g}" for v in q))
    print(f"wrote {len(entries) + 1} file(s) to {root}")
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig) -> int:
    filters = list(args.filter or []) or cfg.section("validate").get("filter") or None
    if isinstance(filters, str):
        filters = [filters]
    try:
        report = run_validation(filters, cfg.table(args.table))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for r in report.results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{status}  {r.suite}: {r.name} ({r.seconds:.2f} s)"
        if not r.passed:
            line += f"\n      {r.detail}"
        print(line)
    root = _out_dir(args, cfg)
    entry = write_artifact(root, "validation_report.json", json_text(report.to_dict()),
                           "validation", "json")
    write_manifest(root, [entry])
    n_fail = len(report.failures)
    print(f"{len(report.results) - n_fail}/{len(report.results)} checks passed; "
          f"report in {root / entry.path}")
    return EXIT_OK if report.passed else EXIT_VALIDATION


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help=f"output directory (default ./{DEFAULT_OUT})")
    common.add_argument("--seed", help="master seed, 0..2^64-1 (fallback $CANYON_SIM_SEED, then 0)")
    common.add_argument("--format", choices=("csv", "json", "both"), help="export format")
    common.add_argument("--s-convention", choices=("raw", "normalized"),
                        help="S convention for the path-loss models")
    common.add_argument("--table", help="JSON file of small-scale table overrides")
    common.add_argument("-v", "--verbose", action="count", default=0)

    env_opts = argparse.ArgumentParser(add_help=False)
    env_opts.add_argument("--region", help="region file defining the environment")
    env_opts.add_argument("--preset", help="built-in preset (HCL, MCL, LCL)")

    p = argparse.ArgumentParser(prog="canyon-sim",
                                description="Street-canyon V2X channel simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    e = sub.add_parser("envfactor", parents=[common],
                       help="composite environmental factor of a region file")
    e.add_argument("region", nargs="?", help="region JSON file")
    e.set_defaults(func=cmd_envfactor)

    pl_ = sub.add_parser("pathloss", parents=[common, env_opts], help="path-loss distance sweep")
    pl_.add_argument("--points", type=int, help="number of sweep points")
    pl_.set_defaults(func=cmd_pathloss)

    g = sub.add_parser("generate", parents=[common, env_opts], help="generate channel drops")
    g.add_argument("-n", type=int, help="number of drops")
    g.add_argument("--state", help="LOS or NLOS")
    g.add_argument("--distance", type=float, help="Tx-Rx distance in meters")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("campaign", parents=[common], help="Monte Carlo campaign and export")
    c.add_argument("--preset", help="built-in preset (HCL, MCL, LCL)")
    c.add_argument("-n", type=int, help="number of drops")
    c.add_argument("--workers", type=int, help="worker processes")
    c.set_defaults(func=cmd_campaign)

    v = sub.add_parser("validate", parents=[common], help="run the built-in property suites")
    v.add_argument("--filter", action="append",
                   help=f"suite(s) to run, repeatable or comma separated: {', '.join(SUITES)}")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help/--version
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        cfg = RunConfig.load(args.config)
        return args.func(args, cfg)
    except GenerationError as exc:
        print(f"error: {exc} (seed_record={exc.seed_record})", file=sys.stderr)
        return EXIT_GENERATION
    except (ValueError, OSError) as exc:
        # ConfigError, DomainError, RegionFormatError and I/O failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - keep the documented exit codes
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GENERATION


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
