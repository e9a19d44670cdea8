"""Command-line front end.  All input and output is JSON; -inf is written as null.

Exit codes: 0 pass, 1 property failure, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import List, Optional

from . import __version__
from .indecomp import (
    BudgetExhausted,
    DEFAULT_BUDGET,
    find_decomposition,
    full_decomposition,
    is_indecomposable,
)
from .module import is_cyclic, iso_signature, scramble
from .residue import NEG_INF
from .verify import PASS, SUITES, SweepConfig, _run_one, run_suite
from .xfamily import (
    PaperInconsistency,
    Unidentifiable,
    XParams,
    build_x,
    check_conditions,
    decompose_iii_failure,
    guard_holds,
    iii_witnesses,
    recover_a,
)

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _load_json(text: str):
    if text == "-":
        text = sys.stdin.read()
    elif text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON: {exc}") from None


def _params(text: str) -> XParams:
    obj = _load_json(text)
    if not isinstance(obj, dict):
        raise CliError("parameters must be a JSON object")
    try:
        return XParams.from_json(obj)
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc)) from None


def _levels(a):
    return [None if x == NEG_INF else int(x) for x in a]


def _int_list(text: str) -> List[int]:
    """'2,3' or '1-3' or a mix such as '1-2,5'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def _emit(obj, out: Optional[str] = None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# --- commands ------------------------------------------------------------------------


def cmd_build(args) -> int:
    P = _params(args.params)
    X = build_x(P)
    M = X.module
    _emit(
        {
            "params": P.to_json(),
            "order": {"p": P.p, "exponent": M.order_exponent()},
            "divisors": list(M.divisors),
            "generators": ["y"] + [f"x{i}" for i in range(P.m)],
            "cyclic": is_cyclic(M),
            "lengths": X.lengths(),
            "signature": iso_signature(M).to_json(),
        },
        args.out,
    )
    return EXIT_PASS


def cmd_check(args) -> int:
    P = _params(args.params)
    rep = check_conditions(P)
    _emit({"params": P.to_json(), "conditions": rep.to_json()}, args.out)
    return EXIT_PASS if rep.overall else EXIT_FAIL


def cmd_indecomposable(args) -> int:
    P = _params(args.params)
    M = build_x(P).module
    if M.order_exponent() == 0:
        raise CliError("X is the zero module; indecomposability is undefined for |X| = 1")
    ind, rep = is_indecomposable(M)
    out = {"params": P.to_json(), "indecomposable": ind, "locality": rep.to_json()}
    if not ind:
        cert = find_decomposition(M, seed=args.seed, budget=args.budget)
        if cert is None:
            raise CliError("End(X) is not local but no idempotent was found within the budget")
        out["certificate"] = cert.to_json()
        out["certificate_verified"] = cert.verify()
    _emit(out, args.out)
    return EXIT_PASS if ind else EXIT_FAIL


def cmd_decompose(args) -> int:
    """Full decomposition, plus the explicit construction when (III) fails."""
    P = _params(args.params)
    M = build_x(P).module
    if M.order_exponent() == 0:
        raise CliError("X is the zero module")
    try:
        parts = full_decomposition(M, seed=args.seed, budget=args.budget)
    except BudgetExhausted as exc:
        raise CliError(str(exc)) from None
    out = {
        "params": P.to_json(),
        "summands": [
            {"divisors": list(S.divisors), "signature": iso_signature(S).to_json()} for S in parts
        ],
    }
    rep = check_conditions(P)
    witnesses = [i for i in iii_witnesses(P) if guard_holds(P, i)] if rep.I and rep.II else []
    ok = True
    if witnesses:
        try:
            res = decompose_iii_failure(P, witnesses[0])
            out["construction"] = {
                "witness": witnesses[0],
                "hat_params": res.hat_params.to_json(),
                "certificate": res.certificate.to_json(),
                "verified": res.verified,
            }
            ok = res.verified
        except PaperInconsistency as exc:
            out["construction"] = {"witness": witnesses[0], "alarm": str(exc)}
            ok = False
    _emit(out, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_recover_a(args) -> int:
    P = _params(args.params)
    M = build_x(P).module
    if args.scramble:
        M = scramble(M, random.Random(args.seed))
    try:
        got = recover_a(M, seed=args.seed)
    except Unidentifiable as exc:
        raise CliError(str(exc)) from None
    match = tuple(got) == P.a
    _emit({"params": P.to_json(), "recovered": _levels(got), "match": match}, args.out)
    return EXIT_PASS if match else EXIT_FAIL


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise CliError(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}")
    if args.case is not None:
        case = _load_json(args.case)
        res = _run_one((args.suite, case))
        _emit(res, args.out)
        return {PASS: EXIT_PASS, "fail": EXIT_FAIL}.get(res["verdict"], EXIT_ERROR)
    config = SweepConfig(
        p_range=args.range_p,
        n_range=args.range_n,
        m_range=args.range_m,
        d_policy=args.d_policy,
        seed=args.seed,
        jobs=args.jobs,
        out=args.out,
    )
    report = run_suite(args.suite, config)
    _emit(report, args.out)
    if report["summary"]["error"]:
        return EXIT_ERROR
    return EXIT_FAIL if report["summary"]["fail"] else EXIT_PASS


# --- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclicmod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_params(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("params", help="XParams JSON, @file, or - for stdin")
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    with_params("build", cmd_build, "build X and print a summary")
    with_params("check", cmd_check, "evaluate conditions (I)-(V)")
    for name, func, text in (
        ("indecomposable", cmd_indecomposable, "decide indecomposability via End(X)"),
        ("decompose", cmd_decompose, "full decomposition into indecomposables"),
    ):
        sp = with_params(name, func, text)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp = with_params("recover-a", cmd_recover_a, "recover a from module invariants")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--scramble", action="store_true", help="apply a random change of basis first")

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", help=", ".join(SUITES))
    sp.add_argument("--seed", type=int, default=SweepConfig.seed)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--range-p", type=_int_list)
    sp.add_argument("--range-n", type=_int_list, help="n range (group level i for identity suites)")
    sp.add_argument("--range-m", type=_int_list)
    sp.add_argument("--d-policy", default="all", help="all, U1, or a comma list of residues")
    sp.add_argument("--case", help="replay one case payload (JSON, @file or -)")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
