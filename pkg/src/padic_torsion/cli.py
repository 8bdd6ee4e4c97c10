"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 no stabilization before n_max,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .heuristics import PGroupShape, SplittingProfile, adjusted_average_p3, aut_order_abelian_p_group, cl_average, w_ideal
from .harness import SurveyConfig, run_survey
from .numutil import is_prime
from .quadfield import (
    BoundExceeded,
    DegenerateD,
    NotRealField,
    NotSquarefree,
    make_field,
)
from .rayclass import (
    InvariantViolation,
    NonDivisible,
    NoStabilization,
    ray_class_p_part,
    torsion_structure,
)
from .resunits import NotAUnit

_INVALID = (
    NotSquarefree,
    DegenerateD,
    BoundExceeded,
    NotRealField,
    NotAUnit,
    ValueError,
)
_INTERNAL = (InvariantViolation, NonDivisible, AssertionError)


def _require_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    return p


def _level_dict(lvl) -> dict:
    return {
        "n": lvl.n,
        "full_invariants": list(lvl.full_invariants),
        "p_invariants": list(lvl.p_invariants),
        "order_p_part": lvl.order_p_part,
    }


def _report_dict(rep, include_trace: bool) -> dict:
    out = {
        "d": rep.field.d,
        "disc": rep.field.disc,
        "p": rep.p,
        "start_level": rep.start_level,
        "stabilization_level": rep.stabilization_level,
        "leopoldt_certified": rep.leopoldt_certified,
        "leopoldt_level": rep.leopoldt_level,
        "kernel_orders": rep.kernel_orders,
        "torsion": list(rep.torsion),
    }
    if include_trace:
        out["trace"] = [_level_dict(l) for l in rep.trace]
    return out


def cmd_torsion(args) -> int:
    K = make_field(args.d)
    rep = torsion_structure(K, _require_prime(args.p), n_max=args.n_max)
    print(json.dumps(_report_dict(rep, args.trace), indent=2))
    return 0


def cmd_raycl(args) -> int:
    K = make_field(args.d)
    lvl = ray_class_p_part(K, _require_prime(args.p), args.n)
    print(json.dumps(_level_dict(lvl), indent=2))
    return 0


def cmd_average(args) -> int:
    p = _require_prime(args.p)
    if args.f:
        f_list = tuple(int(x) for x in args.f.split(","))
        profile = SplittingProfile(len(f_list), f_list)
    else:
        profile = SplittingProfile.split_completely(args.g)
    val = cl_average(p, profile, u=args.u, tol=args.tol)
    if args.adjusted_p3:
        if p != 3 or args.u != 0:
            raise ValueError("--adjusted-p3 applies to the p=3, u=0 average")
        val = adjusted_average_p3(val)
    print(f"{val:.5f}")
    return 0


def cmd_survey(args) -> int:
    cfg = SurveyConfig(
        p=_require_prime(args.p),
        d_min=args.min,
        d_max=args.max,
        sign="imaginary" if args.imaginary else "real",
        exclude_6_mod_9=args.exclude_6_mod_9,
        n_max=args.n_max,
        checkpoint_every=args.checkpoint_every,
        out_dir=args.out,
    )
    row, records = run_survey(cfg)
    print(json.dumps(asdict(row), indent=2))
    return 0


def cmd_waut(args) -> int:
    try:
        ps, lams = args.shape.split(":")
        p = _require_prime(int(ps))
        exponents = tuple(int(x) for x in lams.split(","))
    except (ValueError, AttributeError) as exc:
        raise ValueError(f"bad --shape {args.shape!r}; expected p:l1,l2,...") from exc
    shape = PGroupShape(p, exponents)
    aut = aut_order_abelian_p_group(shape)
    w = w_ideal([(p, sum(exponents))])
    print(
        json.dumps(
            {
                "p": p,
                "exponents": list(exponents),
                "aut_order": aut,
                "w_contribution": f"1/{aut}",
                "w_of_order": f"{w.numerator}/{w.denominator}",
            },
            indent=2,
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padic-torsion",
        description="Z_p-torsion of the maximal abelian p-ramified extension "
        "of a quadratic field, plus Cohen-Lenstra survey tooling",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("torsion", help="stabilization run and torsion report")
    t.add_argument("--d", type=int, required=True)
    t.add_argument("--p", type=int, required=True)
    t.add_argument("--n-max", type=int, default=30)
    t.add_argument("--trace", action="store_true", help="include the level trace")
    t.set_defaults(func=cmd_torsion)

    r = sub.add_parser("raycl", help="ray class invariant factors at one level")
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--p", type=int, required=True)
    r.add_argument("--n", type=int, required=True)
    r.set_defaults(func=cmd_raycl)

    a = sub.add_parser("average", help="Cohen-Lenstra u-average")
    a.add_argument("--p", type=int, required=True)
    a.add_argument("--u", type=int, default=0, choices=(0, 1))
    a.add_argument("--f", type=str, default=None, help="comma list of residue degrees")
    a.add_argument("--g", type=int, default=1, help="number of split places")
    a.add_argument("--tol", type=float, default=1e-10)
    a.add_argument("--adjusted-p3", action="store_true")
    a.set_defaults(func=cmd_average)

    s = sub.add_parser("survey", help="torsion frequency sweep over a d range")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--min", type=int, required=True)
    s.add_argument("--max", type=int, required=True)
    s.add_argument("--imaginary", action="store_true")
    s.add_argument("--exclude-6-mod-9", action="store_true")
    s.add_argument("--n-max", type=int, default=30)
    s.add_argument("--checkpoint-every", type=int, default=500)
    s.add_argument("--out", type=str, required=True)
    s.set_defaults(func=cmd_survey)

    w = sub.add_parser("waut", help="Aut order and weight of an abelian p-group shape")
    w.add_argument("--shape", type=str, required=True, help="p:l1,l2,... ")
    w.set_defaults(func=cmd_waut)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _INTERNAL as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 4
    except NoStabilization as exc:
        print(f"no stabilization: {exc}", file=sys.stderr)
        return 3
    except _INVALID as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
