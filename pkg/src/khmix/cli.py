"""Command-line interface: ``khmix {run,sweep,oracle,reference,report,plot}``.

Exit codes: 0 success, 1 verdict failure or aborted run, 2 configuration
error.  Messages go to standard error; data goes to files.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from .bounds import InsufficientSamplesError, Tolerances, all_passed, dump_report, format_table, verdict_report, verify_theorem
from .config import OUTPUT_ROOT_ENV, ConfigError, RunConfig, SweepConfig, load_config
from .conslaw import quadratic_flux, rarefaction_diagnostics, sharp_constant
from .fields import Params
from .initial_data import InitialDataSpec
from .io import format_float, read_csv
from .solver import CFLError, SolverError

log = logging.getLogger("khmix")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _dt(value: str):
    return value if value == "adaptive" else float(value)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    """One ``--key`` flag per configuration key; unset flags leave the config untouched."""
    S = argparse.SUPPRESS
    g = p.add_argument_group("params")
    for f in fields(Params):
        kind = int if f.name in ("Ny", "Nz") else _dt if f.name == "dt" else float
        g.add_argument(f"--{f.name}", type=kind, default=S)
    g = p.add_argument_group("initial")
    for f in fields(InitialDataSpec):
        g.add_argument(f"--{f.name}", type=int if f.name == "k" else float, default=S)
    g = p.add_argument_group("run")
    g.add_argument("--sample_interval", "--sample-interval", type=float, default=S)
    g.add_argument("--snapshot_every", "--snapshot-every", type=int, default=S)
    g.add_argument("--output_dir", "--output-dir", default=S)
    g.add_argument("--seed", type=int, default=S)
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--root", type=Path, default=None,
                   help=f"output root (default: ${OUTPUT_ROOT_ENV} or the current directory)")


_NON_CONFIG = {"command", "config", "root", "verbose", "func", "L_values", "workers", "Ny_per_L"}


def _overrides(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}


def _base_config(args) -> RunConfig | SweepConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = _overrides(args)
    if isinstance(cfg, SweepConfig):
        from dataclasses import replace
        return replace(cfg, base=cfg.base.with_overrides(over)) if over else cfg
    return cfg.with_overrides(over) if over else cfg


def cmd_run(args) -> int:
    from .harness import execute_run

    cfg = _base_config(args)
    if isinstance(cfg, SweepConfig):
        raise ConfigError("this is a sweep configuration; use `khmix sweep`")
    res = execute_run(cfg, args.root)
    print(format_table(res.verdicts, title=f"verdicts for {res.directory}"), file=sys.stderr)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    from dataclasses import replace

    from .harness import execute_sweep

    cfg = _base_config(args)
    if isinstance(cfg, RunConfig):
        if not args.L_values:
            raise ConfigError("a sweep needs --L-values or a sweep configuration file", "sweep.L")
        cfg = SweepConfig(base=cfg, L=tuple(args.L_values))
    elif args.L_values:
        cfg = replace(cfg, L=tuple(args.L_values))
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    if args.Ny_per_L is not None:
        cfg = replace(cfg, Ny_per_L=args.Ny_per_L)
    results = execute_sweep(cfg, args.root)
    for res in results:
        print(format_table(res.verdicts, title=f"verdicts for {res.directory}"), file=sys.stderr)
    ok = all(r.passed for r in results)
    print(f"sweep over L = {list(cfg.L)}: {'all verdicts pass' if ok else 'VERDICT FAILURE'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _output_path(out: str | None, default_name: str) -> Path | None:
    if out == "-":
        return None
    if out:
        return Path(out)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / default_name


def _write_rows(path: Path | None, header, rows) -> None:
    fh = sys.stdout if path is None else open(path, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path is not None:
            fh.close()
            print(f"wrote {path}", file=sys.stderr)


def cmd_reference(args) -> int:
    if not args.U > 0 or any(not t > 0 for t in args.t):
        raise ConfigError("U and t must be positive")
    c_sharp = sharp_constant(quadratic_flux(args.U))
    rows = []
    for t in args.t:
        l, E, D = rarefaction_diagnostics(t, args.U)
        rows.append([format_float(x) for x in (args.U, t, l, E, D, c_sharp)])
    _write_rows(_output_path(args.out, "reference.csv"), ["U", "t", "l", "E", "D", "C_sharp"], rows)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import maximize_ratio, run_campaign

    if args.seeds < 1 or args.count < 1 or args.budget < 0 or not args.U > 0:
        raise ConfigError("need seeds >= 1, count >= 1, budget >= 0, U > 0")
    flux = quadratic_flux(args.U)
    camp = run_campaign(flux, range(args.seed, args.seed + args.seeds), count_range=(1, args.count))
    _write_rows(_output_path(args.out, "oracle.csv"), ["seed", "ratio"],
                [[int(s), format_float(r)] for s, r in zip(camp.seeds, camp.ratios)])
    bad = camp.violations(args.tol)
    print(f"max ratio {camp.max_ratio:.12f} over {args.seeds} profiles "
          f"({'<= 1' if bad == 0 else f'{bad} VIOLATIONS'})", file=sys.stderr)
    if args.budget > 0:
        best, prof = maximize_ratio(flux, args.budget, args.seed, count=args.breakpoints)
        print(f"hill-climbing: best ratio {best:.9f} with {prof.count} steps after {args.budget} iterations",
              file=sys.stderr)
        if best > 1 + args.tol:
            bad += 1
    return EXIT_OK if bad == 0 else EXIT_FAIL


def _locate_series(path: Path) -> tuple[Path, dict | None]:
    csv_path = path / "series.csv" if path.is_dir() else path
    cfg_path = csv_path.parent / "config.json"
    cfg = json.loads(cfg_path.read_text(encoding="utf-8")) if cfg_path.exists() else None
    return csv_path, cfg


def cmd_report(args) -> int:
    runs = {}
    for path in args.paths:
        csv_path, cfg = _locate_series(Path(path))
        if not csv_path.exists():
            raise ConfigError(f"no series found at {path}")
        params = (cfg or {}).get("params", {})
        U = args.U if args.U is not None else params.get("U")
        H = args.H if args.H is not None else params.get("H")
        if U is None or H is None:
            raise ConfigError(f"{path}: U and H unknown; pass --U and --H")
        tol = Tolerances(**(cfg or {}).get("verdict", {})) if cfg and "verdict" in cfg else Tolerances()
        try:
            series = read_csv(csv_path)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        verdicts = verify_theorem(series, float(U), float(H), tol)
        runs[str(path)] = verdicts
        print(format_table(verdicts, title=f"verdicts for {path}"), file=sys.stderr)
    out = _output_path(args.out, "report.json")
    report = verdict_report(runs)
    if out is None:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        dump_report(report, out)
        print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK if all(all_passed(v) for v in runs.values()) else EXIT_FAIL


def cmd_plot(args) -> int:
    from .harness import read_profiles
    from .plotting import plot_profiles, plot_ratios

    run_dir = Path(args.run_dir)
    csv_path, cfg = _locate_series(run_dir)
    if not csv_path.exists():
        raise ConfigError(f"no series.csv in {run_dir}")
    U = args.U if args.U is not None else (cfg or {}).get("params", {}).get("U")
    if U is None:
        raise ConfigError("U unknown; pass --U")
    out_dir = Path(args.out) if args.out else csv_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [plot_ratios(read_csv(csv_path), float(U), out_dir / "ratios.svg")]
    prof_path = csv_path.parent / "profiles.csv"
    if prof_path.exists():
        z, times, ubar = read_profiles(prof_path)
        written.append(plot_profiles(z, times, ubar, float(U), out_dir / "profiles.svg"))
    else:
        print(f"no profiles.csv next to {csv_path}; skipping the profile plot", file=sys.stderr)
    for w in written:
        print(f"wrote {w}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="khmix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", allow_abbrev=False, help="single simulation: CSV series and bound verdicts")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", allow_abbrev=False, help="simulations over several channel widths L")
    _add_run_flags(p)
    p.add_argument("--L-values", "--L_values", dest="L_values", type=float, nargs="+")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--Ny_per_L", "--Ny-per-L", dest="Ny_per_L", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", allow_abbrev=False, help="random-profile campaign for the interpolation inequality")
    p.add_argument("--seeds", type=int, default=10000, help="number of random profiles")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--count", type=int, default=32, help="maximum number of steps per profile")
    p.add_argument("--budget", type=int, default=0, help="hill-climbing iterations (0: none)")
    p.add_argument("--breakpoints", type=int, default=64, help="steps of the hill-climbing profile")
    p.add_argument("--U", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None, help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reference", allow_abbrev=False, help="closed-form rarefaction diagnostics")
    p.add_argument("--U", type=float, default=1.0)
    p.add_argument("--t", type=float, nargs="+", default=[1.0])
    p.add_argument("--out", default=None, help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("report", allow_abbrev=False, help="re-evaluate verdicts of existing series")
    p.add_argument("paths", nargs="+", help="series CSV files or run directories")
    p.add_argument("--U", type=float, default=None)
    p.add_argument("--H", type=float, default=None)
    p.add_argument("--out", default=None, help="JSON path, '-' for stdout")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", allow_abbrev=False, help="SVG figures of a finished run")
    p.add_argument("run_dir")
    p.add_argument("--U", type=float, default=None)
    p.add_argument("--out", default=None, help="directory for the SVG files")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientSamplesError as exc:
        print(f"configuration error: {exc}; sample more densely", file=sys.stderr)
        return EXIT_CONFIG
    except CFLError as exc:
        print(f"configuration error: {exc}; reduce dt", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        # inputs rejected by the library after config parsing, e.g. an unresolved datum
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
