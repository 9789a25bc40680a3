"""Command-line entry point: ``pivotal scan | enumerate | variance | mc``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import NumericalError, ValidationError
from .exact import (
    enumerate_design,
    enumerate_ops,
    exact_variance,
    expected_vhh,
    inclusion_matrix,
    multinomial_variance_formula,
    write_csv,
)
from .experiments import GridSpec, mc_compare, scan, write_scan_csv, write_scan_json
from .population import make_population
from .spectral import gabler_summary

log = logging.getLogger("pivotal")

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _vector(text: str) -> list:
    try:
        return [s.strip() for s in text.split(",") if s.strip()]
    except AttributeError as e:
        raise ValidationError(f"bad vector {text!r}") from e


def _values(text: str):
    from fractions import Fraction

    try:
        return [Fraction(s) for s in _vector(text)]
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"bad numeric list {text!r}") from e


def _population(text: str):
    return make_population(_values(text))


def cmd_scan(args) -> int:
    spec = GridSpec(n=args.n, skip=args.skip, dim=args.dim, variant=args.variant)
    summary = scan(spec, threads=args.threads)
    with open(args.out, "w", newline="") as fh:
        write_scan_csv(summary, spec.dim, fh)
    if args.summary:
        with open(args.summary, "w") as fh:
            write_scan_json(summary, fh)
    print(json.dumps(summary.to_json()))
    return 0


def cmd_enumerate(args) -> int:
    p = _population(args.pi)
    design = args.design
    if design == "two-stage" and args.first_stage == "ms":
        design = "two-stage-ms"
    d = enumerate_design(p, design)
    with open(args.out, "w", newline="") as fh:
        write_csv(d, fh)
    print(f"{len(d.outcomes)} outcomes, total probability {d.total()}")
    return 0


def cmd_variance(args) -> int:
    p = _population(args.pi)
    y = _values(args.y)
    d = enumerate_ops(p)
    v_ops = exact_variance(d, p, y)
    v_ms = multinomial_variance_formula(p, y)
    out = {"V_ops": str(v_ops), "V_ms": str(v_ms)}
    out["E_vHH"] = str(expected_vhh(d, p, y)) if p.n >= 2 else None
    out["lambda2"] = gabler_summary(inclusion_matrix(d)).lambda2
    for k, v in out.items():
        print(f"{k}\t{v}")
    return 0


def cmd_mc(args) -> int:
    p = _population(args.pi)
    report = mc_compare(p, _values(args.y), args.reps, args.seed)
    print(json.dumps(report.to_json(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pivotal", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("scan", help="second-eigenvalue scan over a probability grid")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--skip", required=True)
    sp.add_argument("--dim", type=int, default=None, help="number of clusters (default 2n-1)")
    sp.add_argument(
        "--variant",
        default="structural-strict",
        choices=["plain", "structural-strict", "structural-nonstrict"],
    )
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--summary", type=Path)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_scan)

    ep = sub.add_parser("enumerate", help="exact design distribution as CSV")
    ep.add_argument("--pi", required=True)
    ep.add_argument("--design", required=True, choices=["ops", "ms", "two-stage", "rops"])
    ep.add_argument("--first-stage", default="ops", choices=["ops", "ms"])
    ep.add_argument("--out", type=Path, required=True)
    ep.set_defaults(func=cmd_enumerate)

    vp = sub.add_parser("variance", help="exact variances, E[v_HH] and lambda2")
    vp.add_argument("--pi", required=True)
    vp.add_argument("--y", required=True)
    vp.set_defaults(func=cmd_variance)

    mp = sub.add_parser("mc", help="Monte Carlo comparison of pivotal and multinomial sampling")
    mp.add_argument("--pi", required=True)
    mp.add_argument("--y", required=True)
    mp.add_argument("--reps", type=int, default=100_000)
    mp.add_argument("--seed", type=int, default=0)
    mp.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
