"""Command-line front end.

Exit codes: 0 success / criteria met, 1 invalid input or precondition,
2 negative mathematical verdict, 3 parse error -- so shell pipelines can
branch on outcomes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

from . import combinat
from .analysis import (
    CompositionDomainError,
    bound_report,
    is_p_ordinary,
    is_strongly_p_ordinary,
    load_relation,
    rank_profile,
    verify_cobord,
    verify_relation,
)
from .connection import (
    NotCalibrated,
    NotOrdinary,
    TranscendentalUnsupported,
    build_connection,
    flatness_verdict,
)
from .symbolic import ParseError, PointSelectionFailed
from .webmodel import (
    WebValidationError,
    WrongCodimension,
    bracket_test,
    load_web,
    validate,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERDICT = 2
EXIT_PARSE = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--out", metavar="PATH", help="write the report to PATH")


def _add_points(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points", type=int, default=3, help="number of sample points (default 3)")
    p.add_argument(
        "--point",
        action="append",
        metavar="ASSIGN",
        help='explicit sample point, e.g. "x=1/3,y=2,z=0"; repeatable',
    )
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument(
        "--backend", choices=("exact", "bigfloat"), default=None,
        help="evaluation backend (default: exact for rational webs)",
    )
    p.add_argument("--precision", type=int, default=50, help="big-float digits (default 50)")
    p.add_argument(
        "--tolerance", default="1e-20", help="relative pivot threshold for numeric rank"
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="webrank",
        description="Rank bounds, jet systems and tautological connections of holomorphic webs.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="combinatorial bounds for (n, d, q, p)")
    b.add_argument("n", type=int)
    b.add_argument("d", type=int)
    b.add_argument("q", type=int)
    b.add_argument("p", type=int)
    _add_common(b)

    a = sub.add_parser("analyze", help="rank profile, ordinarity and bound report of a web file")
    a.add_argument("webfile")
    a.add_argument("--p", type=int, required=True, dest="p")
    a.add_argument("--max-order", type=int, default=None, help="profile depth (default: horizon)")
    a.add_argument("--closed", action="store_true", help="use the closed (strong) systems")
    a.add_argument(
        "--expect-ordinary",
        action="store_true",
        help="exit 2 when the ordinarity verdict is negative",
    )
    _add_points(a)
    _add_common(a)

    v = sub.add_parser("verify", help="verify a relation file (optionally a cobord pair)")
    v.add_argument("webfile")
    v.add_argument("relationfile", help="the degree-p relation (omega)")
    v.add_argument(
        "etafile",
        nargs="?",
        default=None,
        help="optional degree-(p-1) relation; checks d(eta) = omega",
    )
    v.add_argument("--seed", type=int, default=0)
    _add_common(v)

    c = sub.add_parser("curvature", help="tautological connection and curvature")
    c.add_argument("webfile")
    c.add_argument("--p", type=int, required=True, dest="p")
    c.add_argument(
        "--variant", choices=("plain", "closed"), default="closed",
        help="calibration variant (default closed)",
    )
    _add_common(c)

    bc = sub.add_parser("bracket-check", help="tangent-bracket criterion for curve webs")
    bc.add_argument("webfile")
    bc.add_argument("--i", type=int, default=None, help="1-based foliation index")
    bc.add_argument("--j", type=int, default=None, help="1-based foliation index")
    bc.add_argument("--seed", type=int, default=0)
    _add_common(bc)
    return ap


def _parse_point(text: str) -> dict:
    pt = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        if not _:
            raise ValueError(f"bad point assignment {part!r}")
        pt[name.strip()] = Fraction(value.strip())
    return pt


def _emit(report: dict, args, human: List[str]) -> None:
    if args.json:
        text = json.dumps(report, indent=2, sort_keys=True)
    else:
        text = "\n".join(human)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_bounds(args) -> int:
    try:
        profile = combinat.bound_profile(args.n, args.d, args.q, args.p)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep = {"command": "bounds", "profile": profile.as_dict()}
    human = [
        f"bounds for n={args.n} d={args.d} q={args.q} p={args.p}:",
        f"  k0 = {profile.k0}   k1 = {profile.k1}",
        f"  pi0 = {profile.pi0}   pi_prime = {profile.pi_prime}"
        + (f"   pi_henaut = {profile.pi_henaut}" if profile.pi_henaut is not None else ""),
        f"  calibrated = {profile.calibrated}   strongly_calibrated = {profile.strongly_calibrated}",
        f"  prop2_ok = {profile.prop2_ok}",
    ]
    _emit(rep, args, human)
    return EXIT_OK


def _load_web_checked(path: str):
    try:
        return load_web(path), None
    except ParseError as exc:
        print(f"parse error in {path}: {exc}", file=sys.stderr)
        return None, EXIT_PARSE
    except (json.JSONDecodeError, OSError) as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return None, EXIT_PARSE
    except WebValidationError as exc:
        print(f"invalid web {path}: {exc}", file=sys.stderr)
        return None, EXIT_INPUT


def _resolve_cli_points(web, args):
    if args.point:
        return [_parse_point(t) for t in args.point]
    if args.points < 1:
        raise ValueError("--points must be >= 1")
    return web.sample_points(args.points, seed=args.seed)


def _cmd_analyze(args) -> int:
    if args.precision < 20:
        print("error: --precision must be >= 20", file=sys.stderr)
        return EXIT_INPUT
    web, err = _load_web_checked(args.webfile)
    if err is not None:
        return err
    if not (1 <= args.p <= web.q):
        print(f"error: need 1 <= p <= q={web.q}", file=sys.stderr)
        return EXIT_INPUT
    try:
        points = _resolve_cli_points(web, args)
    except (ValueError, PointSelectionFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    vrep = validate(web, points=None, seed=args.seed)
    if not vrep.valid and args.point is None:
        pass  # findings are reported below; analysis still proceeds
    kwargs = dict(
        points=points,
        seed=args.seed,
        digits=args.precision,
        tolerance=args.tolerance,
    )
    report = bound_report(web, args.p, **kwargs)
    if args.max_order is not None:
        prof = rank_profile(
            web,
            args.p,
            args.max_order,
            closed=args.closed,
            points=points,
            seed=args.seed,
            backend=args.backend,
            digits=args.precision,
            tolerance=args.tolerance,
        )
        report["profile"] = [r.as_dict() for r in prof]
    report.update(
        {
            "command": "analyze",
            "web": web.name,
            "p": args.p,
            "closed": args.closed,
            "seed": args.seed,
            "validation": {"valid": vrep.valid, "failures": vrep.failures},
        }
    )
    chosen = report["closed"] if (args.closed or args.p == web.q) else report["plain"]
    human = [
        f"web {web.name}: n={web.n} q={web.q} d={web.d}, p={args.p}",
        f"  validation: {'ok' if vrep.valid else 'FINDINGS: ' + '; '.join(vrep.failures)}",
        f"  bounds: pi0={report['bounds']['pi0']} pi'={report['bounds']['pi_prime']} "
        f"k0={report['bounds']['k0']} k1={report['bounds']['k1']}",
        f"  plain verdict:  {report['plain']['verdict']}",
        f"  closed verdict: {report['closed']['verdict']}",
        f"  conclusions: {report['conclusions']}",
    ]
    for rec in chosen["records"]:
        human.append(
            f"    k={rec['k']}: rank {rec['point_ranks']} / max {rec['max_rank']}"
            + (f" (symbolic {rec['symbolic_rank']})" if rec["symbolic_rank"] is not None else "")
        )
    _emit(report, args, human)
    if args.expect_ordinary and chosen["verdict"] != "ordinary":
        return EXIT_VERDICT
    return EXIT_OK


def _cmd_verify(args) -> int:
    web, err = _load_web_checked(args.webfile)
    if err is not None:
        return err
    try:
        omega = load_relation(args.relationfile, web.q)
        eta = load_relation(args.etafile, web.q) if args.etafile else None
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (json.JSONDecodeError, OSError) as exc:
        print(f"cannot read relation: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, KeyError) as exc:
        print(f"invalid relation: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        if eta is None:
            verdict = verify_relation(web, omega, seed=args.seed)
            rep = {"command": "verify", "relation": verdict.as_dict()}
            ok = verdict.is_abelian and verdict.is_closed
            human = [
                f"relation: abelian={verdict.is_abelian} closed={verdict.is_closed} "
                f"mode={verdict.mode}",
                f"residuals: {verdict.residuals}",
            ]
        else:
            result = verify_cobord(web, eta, omega, seed=args.seed)
            rep = {"command": "verify-cobord", "result": result}
            ok = result["is_cobord"]
            human = [
                f"cobord: {result['is_cobord']} (d(eta)=omega: {result['d_eta_matches_omega']})",
                f"eta:   abelian={result['eta']['is_abelian']}",
                f"omega: abelian={result['omega']['is_abelian']} closed={result['omega']['is_closed']}",
            ]
    except (ValueError,) as exc:
        print(f"shape mismatch: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CompositionDomainError as exc:
        print(f"composition domain error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(rep, args, human)
    return EXIT_OK if ok else EXIT_VERDICT


def _cmd_curvature(args) -> int:
    web, err = _load_web_checked(args.webfile)
    if err is not None:
        return err
    try:
        cd = build_connection(web, args.p, args.variant)
    except (NotCalibrated, NotOrdinary, TranscendentalUnsupported, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep = {
        "command": "curvature",
        "web": web.name,
        "connection": cd.as_dict(),
        "verdict": flatness_verdict(cd),
    }
    human = [
        f"web {web.name}: {cd.variant} connection at p={args.p}, bundle rank {cd.pi}",
        f"  k_top = {cd.k_top}",
        "  eta:",
    ]
    for a in range(cd.pi):
        for j in range(cd.pi):
            entry = ", ".join(f"{v} d{lam}" for lam, v in cd.eta[a][j].items()) or "0"
            human.append(f"    eta[{a + 1}][{j + 1}] = {entry}")
    human.append("  omega:")
    for a in range(cd.pi):
        for j in range(cd.pi):
            entry = (
                ", ".join(
                    f"({v}) d{l}^d{m}" for (l, m), v in cd.omega[a][j].items()
                )
                or "0"
            )
            human.append(f"    omega[{a + 1}][{j + 1}] = {entry}")
    human.append(f"  flat: {cd.flat}")
    _emit(rep, args, human)
    return EXIT_OK if cd.flat else EXIT_VERDICT


def _cmd_bracket(args) -> int:
    web, err = _load_web_checked(args.webfile)
    if err is not None:
        return err
    try:
        if (args.i is None) != (args.j is None):
            print("error: give both --i and --j, or neither", file=sys.stderr)
            return EXIT_INPUT
        if args.i is not None:
            pairs = [(args.i - 1, args.j - 1)]
        else:
            pairs = [(i, j) for i in range(web.d) for j in range(i + 1, web.d)]
        results = {}
        for i, j in pairs:
            if not (0 <= i < web.d and 0 <= j < web.d) or i == j:
                print(f"error: bad pair ({i + 1},{j + 1})", file=sys.stderr)
                return EXIT_INPUT
            results[f"{i + 1},{j + 1}"] = bracket_test(web, i, j, seed=args.seed)
    except WrongCodimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep = {"command": "bracket-check", "web": web.name, "pairs": results}
    human = [f"bracket criterion for {web.name}:"] + [
        f"  ({k}): {'dependent (rank infinite for p <= n-2)' if v else 'independent'}"
        for k, v in results.items()
    ]
    _emit(rep, args, human)
    return EXIT_VERDICT if any(results.values()) else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "bounds": _cmd_bounds,
        "analyze": _cmd_analyze,
        "verify": _cmd_verify,
        "curvature": _cmd_curvature,
        "bracket-check": _cmd_bracket,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    raise SystemExit(main())
