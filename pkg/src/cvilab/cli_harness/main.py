"""Command line: ``verify``, ``coeffs`` and ``rank``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import SUITES, ConfigError, load_config
from .records import emit_report
from .suites import run_suite


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvilab", description="Exact and spectral checks for conformally variational invariants.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--config", help="YAML or JSON configuration file")
    v.add_argument("--suite", action="append", choices=list(SUITES) + ["all"], help="suite to run (repeatable)")
    v.add_argument("--dims", type=_int_list, help="comma-separated dimensions (empty string skips)")
    v.add_argument("--grid", type=int, help="torus resolution per axis")
    v.add_argument("--seed", type=int)
    v.add_argument("--out", help="report path (default: stdout)")
    v.add_argument("--format", choices=("json", "text"))

    c = sub.add_parser("coeffs", help="print exact coefficient tables")
    c.add_argument("--what", choices=("b", "or"), required=True, help="b: the b_j table; or: the trilinear a_rst table")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--n", type=int, required=True)

    r = sub.add_parser("rank", help="certify the rank of an invariant in its critical dimension")
    r.add_argument("--invariant", required=True)
    r.add_argument("--dim", type=int, required=True)
    r.add_argument("--family-size", type=int, help="sampled directions (default: full family)")
    r.add_argument("--seed", type=int, default=0)
    return p


def _verify(args) -> int:
    cfg = load_config(
        args.config,
        suites=args.suite,
        dims=args.dims,
        grid=args.grid,
        seed=args.seed,
        out=args.out,
        format=args.format,
    )
    records = []
    for name in cfg.expanded_suites():
        records.extend(run_suite(name, cfg))
    if not records:
        print("no checks selected", file=sys.stderr)
        return 0
    try:
        body = emit_report(records, cfg.format, cfg.out)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return 2
    if cfg.out is None:
        sys.stdout.write(body)
    failed = [r for r in records if r.status == "fail"]
    counts = {s: sum(r.status == s for r in records) for s in ("pass", "fail", "skip")}
    print(f"{counts['pass']} passed, {counts['fail']} failed, {counts['skip']} skipped", file=sys.stderr)
    return 1 if failed else 0


def _coeffs(args) -> int:
    from fractions import Fraction

    from ..operator_library import PoleError, b_coeffs, trilinear_table

    if args.k < 1 or args.n < 1:
        print("k and n must be positive", file=sys.stderr)
        return 2
    if args.what == "b":
        for j, b in enumerate(b_coeffs(args.n, args.k)):
            print(f"b_{j} = {b}")
        return 0
    if args.n < 2 * args.k:
        print("the trilinear coefficients are tabulated for n >= 2k", file=sys.stderr)
        return 2
    try:
        table = trilinear_table(args.n, args.k)
    except PoleError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    for (r, s, t), a in sorted(table.items(), reverse=True):
        print(f"a_{r}{s}{t} = {Fraction(a)}")
    return 0


def _rank(args) -> int:
    from ..conformal_variation import rank_witness, sample_family
    from ..curvature_invariants import get_invariant

    try:
        inv = get_invariant(args.invariant)
    except KeyError as exc:
        print(str(exc.args[0]), file=sys.stderr)
        return 2
    if args.dim != 2 * inv.k:
        print(f"{inv.name} has weight {-2 * inv.k}; its critical dimension is {2 * inv.k}", file=sys.stderr)
        return 2
    fam = sample_family(3, args.family_size, seed=args.seed)
    res = rank_witness(inv, args.dim, fam)
    print(f"invariant {res.invariant}, n = {res.n}, family of {res.family_size} directions ({res.evaluated} evaluated)")
    print(f"identically zero coefficients: {res.certified_zero}")
    print(f"highest nonzero coefficient: {res.witness_degree}")
    print(f"rank: {res.rank}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "coeffs":
            return _coeffs(args)
        return _rank(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
