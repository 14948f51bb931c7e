"""Command-line front end: ``jetcalc run``, ``jetcalc checks``, ``jetcalc eval``."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import symexpr
from .checks import CATALOG, Settings, UnknownCheckError, run_scenario
from .scenario import ScenarioError, load_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _bindings(text: str) -> dict[str, Fraction | float]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected name=value, got {part!r}")
        num = symexpr.evaluate(symexpr.parse(value.strip(), allow_decimals=True))
        out[name.strip()] = num
    return out


def _format_number(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, complex):
        return repr(v)
    return repr(float(v))


def cmd_run(args) -> int:
    try:
        sc = load_scenario(args.file)
        settings = Settings(seed=args.seed, tol=args.tol)
        reports = run_scenario(sc, settings, timing=args.timing)
    except (ScenarioError, UnknownCheckError) as exc:
        print(f"{args.file}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        payload = {"scenario": args.file, "seed": args.seed, "tol": args.tol,
                   "checks": [r.as_dict() for r in reports]}
        print(json.dumps(payload, indent=2))
    else:
        for r in reports:
            numeric = "-" if r.max_numeric_residual is None else f"{r.max_numeric_residual:.3e}"
            line = f"{r.verdict.upper():5} {r.name}  numeric={numeric}"
            if r.elapsed_ms is not None:
                line += f"  {r.elapsed_ms:.1f} ms"
            print(line)
            if r.verdict != "pass":
                print(f"      residual: {r.residual}")
    return EXIT_OK if all(r.verdict == "pass" for r in reports) else EXIT_FAIL


def cmd_checks(args) -> int:
    print("\n".join(CATALOG))
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        e = symexpr.parse(args.expr, allow_decimals=True)
        value = symexpr.evaluate(e, _bindings(args.at or ""))
    except symexpr.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (symexpr.UnboundSymbolError, symexpr.DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(_format_number(value))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetcalc",
                                     description="Verify jet-bundle identities from scenario files.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the checks declared in a scenario file")
    run.add_argument("file")
    run.add_argument("--seed", type=int, default=42, help="sampling seed (default 42)")
    run.add_argument("--tol", type=float, default=1e-9, help="numeric tolerance (default 1e-9)")
    run.add_argument("--json", action="store_true", help="emit a JSON report")
    run.add_argument("--timing", action="store_true",
                     help="record elapsed time per check (makes output non-reproducible)")
    run.set_defaults(func=cmd_run)

    checks = sub.add_parser("checks", help="list the check catalog")
    checks.set_defaults(func=cmd_checks)

    ev = sub.add_parser("eval", help="evaluate an expression")
    ev.add_argument("expr")
    ev.add_argument("--at", default="", help="bindings such as x=1,y=2")
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
