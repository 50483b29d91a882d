"""Command-line front end.

Subcommands: ``gen-gold`` (dictionary files), ``run`` (experiment from a
TOML config), ``validate`` (check result tables), ``plot`` (render figures
from tables). Exit codes: 0 success, 1 usage or config error, 2 domain
error (invalid polynomial pair, failed validation checks).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import load_spec
from .errors import ConfigError, CssimError, InvalidPair, NotMaximumLength
from .experiments import run_experiment
from .gold import FeedbackPolynomial, build_gold_dictionary
from .plots import plot_table
from .results import read_table
from .validate import validate_tables

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


def _parse_poly(text: str) -> FeedbackPolynomial:
    exponents = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    return FeedbackPolynomial.from_exponents(exponents)


def cmd_gen_gold(args) -> int:
    poly1 = _parse_poly(args.poly1) if args.poly1 else None
    poly2 = _parse_poly(args.poly2) if args.poly2 else None
    try:
        dictionary = build_gold_dictionary(args.m, poly1, poly2)
    except (InvalidPair, NotMaximumLength) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"gold_m{args.m}.csv"
    np.savetxt(csv_path, dictionary.psi, fmt="%d", delimiter=",")
    sidecar = {
        "m": dictionary.m,
        "n": dictionary.n,
        "t": dictionary.t,
        "poly1": str(dictionary.g1.source),
        "poly2": str(dictionary.g2.source),
        "correlation_values": list(dictionary.correlation_values),
    }
    json_path = csv_path.with_suffix(".json")
    json_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {csv_path} and {json_path} (t={dictionary.t})")
    return EXIT_OK


def cmd_run(args) -> int:
    overrides = {"seed": args.seed, "workers": args.workers}
    try:
        spec = load_spec(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = run_experiment(spec)
    stem = out_dir / (args.name or f"{spec.kind}_m{spec.m}")
    csv_path, json_path = table.write(stem)
    print(f"wrote {csv_path} and {json_path} ({len(table.rows)} rows)")
    if spec.kind == "phase":
        contour_path = stem.parent / (stem.name + "_contour.csv")
        with contour_path.open("w") as fh:
            fh.write("operator,delta,rho_cross\n")
            for rec in table.meta.get("contour_05", []):
                rho = "" if rec["rho_cross"] is None else f"{rec['rho_cross']:.4f}"
                fh.write(f"{rec['operator']},{rec['delta']},{rho}\n")
        print(f"wrote {contour_path}")
    if args.plot:
        fig_path = plot_table(table, stem.parent / (stem.name + ".svg"))
        print(f"wrote {fig_path}")
    if args.dump_operator:
        from .sampling import build_operator

        dictionary_n = 2**spec.m - 1
        for op_spec in spec.operators:
            rng = np.random.default_rng(spec.seed)
            op = build_operator(op_spec.kind, dictionary_n, op_spec.kappa, rng)
            dump = stem.parent / (stem.name + f"_operator_{op_spec.label}.csv")
            np.savetxt(dump, op.to_dense(), fmt="%g", delimiter=",")
            print(f"wrote {dump}")
    return EXIT_OK


def cmd_validate(args) -> int:
    tables = []
    for path in args.results:
        p = Path(path)
        if not p.exists():
            print(f"error: no such file {p}", file=sys.stderr)
            return EXIT_USAGE
        table = read_table(p)
        if not table.rows:
            print(f"error: {p} contains no result rows", file=sys.stderr)
            return EXIT_USAGE
        tables.append(table)
    checks = validate_tables(tables, args.tst)
    if not checks:
        print("no applicable checks for the given tables", file=sys.stderr)
        return EXIT_USAGE
    for check in checks:
        print(check.line())
        if args.verbose and check.detail:
            print(f"      {check.detail}")
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_DOMAIN


def cmd_plot(args) -> int:
    table = read_table(Path(args.results))
    if not table.rows:
        print("error: empty results table", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or str(Path(args.results).with_suffix(".svg"))
    path = plot_table(table, out)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cssim",
        description="Compressive spread-spectrum receiver simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-gold", help="generate a Gold dictionary CSV + JSON sidecar")
    g.add_argument("--m", type=int, required=True, help="LFSR register length")
    g.add_argument("--poly1", help="comma-separated exponents of the first polynomial")
    g.add_argument("--poly2", help="comma-separated exponents of the second polynomial")
    g.add_argument("--out", default=".", help="output directory")
    g.set_defaults(fn=cmd_gen_gold)

    r = sub.add_parser("run", help="run an experiment from a TOML config")
    r.add_argument("config", help="experiment config file")
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--name", help="output file stem (default: kind_mX)")
    r.add_argument("--seed", type=int, default=None, help="override the master seed")
    r.add_argument("--workers", type=int, default=None, help="parallel worker count")
    r.add_argument("--plot", action="store_true", help="render an SVG next to the CSV")
    r.add_argument(
        "--dump-operator",
        action="store_true",
        help="write dense operator realizations for debugging",
    )
    r.set_defaults(fn=cmd_run)

    v = sub.add_parser("validate", help="evaluate acceptance checks on result tables")
    v.add_argument("results", nargs="+", help="result .csv or .json files")
    v.add_argument("--tst", help="override the TST reference contour CSV")
    v.add_argument("-v", "--verbose", action="store_true")
    v.set_defaults(fn=cmd_validate)

    p = sub.add_parser("plot", help="render a figure from a results table")
    p.add_argument("results", help="result .csv or .json file")
    p.add_argument("--out", help="output figure path (.svg)")
    p.set_defaults(fn=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and "CSS_SEED" in os.environ:
        if hasattr(args, "seed"):
            try:
                args.seed = int(os.environ["CSS_SEED"])
            except ValueError:
                print("CSS_SEED must be an integer", file=sys.stderr)
                return EXIT_USAGE
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CssimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
