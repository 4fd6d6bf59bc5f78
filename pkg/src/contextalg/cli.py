"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 domain error (e.g. zero denominator),
4 internal consistency violation. Set ``CONTEXTALG_LOG`` to a logging level
name (``DEBUG``, ``INFO``, ...) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .context_algebra import (
    AlgebraElement,
    cf_leq,
    enumerate_nonzero_strings,
    load_language,
    multiply,
    show_str,
    string_basis,
    to_str,
)
from .entailment import Distribution, degree_exact, degree_mc, load_distribution
from .errors import ConsistencyError, ContextAlgError, InputError
from .logic import entails, load_universe, parse_formula, read_json
from .projections import check_identities, projection_of
from .semantics import (
    build_aspect_language,
    build_gamma_language,
    load_gamma,
    load_interpretation,
    load_lexicon,
    sentence_operator,
    sentence_vector,
)

log = logging.getLogger("contextalg")


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"{args.command} requires {', '.join(missing)}")


def _clean(obj):
    """Replace non-finite floats so the output stays valid JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(args, payload: dict) -> None:
    payload = _clean(payload)
    if args.format == "json":
        print(json.dumps(payload, indent=2))
        return
    for key, value in payload.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value)
        print(f"{key}: {value}")


def cmd_check(args) -> int:
    _need(args, "universe")
    universe = load_universe(args.universe)
    pairs = None
    if args.pairs:
        obj = read_json(args.pairs)
        raw = obj.get("pairs") if isinstance(obj, dict) else None
        if not isinstance(raw, list) or not all(isinstance(p, list) and len(p) == 2 for p in raw):
            raise InputError('pairs JSON needs "pairs": [[u, v], ...]')
        pairs = [(parse_formula(u), parse_formula(v)) for u, v in raw]
    report = check_identities(universe, pairs, tol=args.tol)
    _emit(args, report.to_json(universe))
    if not (report.conj_exact and report.top_exact):
        raise ConsistencyError("conjunction or top identity failed")
    return 0


def cmd_entail(args) -> int:
    _need(args, "universe")
    universe = load_universe(args.universe)
    u, v = parse_formula(args.u), parse_formula(args.v)
    logical = entails(u, v, universe.atoms)
    pu, pv = projection_of(u, universe), projection_of(v, universe)
    leq = pu.leq(pv)
    # the order characterization needs a member equivalent to u
    represented = bool(np.any(np.all(universe.tables == universe.table_of(u), axis=1)))
    _emit(args, {
        "entails": logical,
        "op_leq": leq,
        "u_represented": represented,
        "down_set_u": len(pu.support()),
        "down_set_v": len(pv.support()),
    })
    if represented and logical != leq:
        raise ConsistencyError(f"entails={logical} but op_leq={leq} for a represented formula")
    return 0


def _semantic_inputs(args):
    _need(args, "universe", "lexicon", "interp")
    universe = load_universe(args.universe)
    lex = load_lexicon(args.lexicon)
    interp = load_interpretation(args.interp, universe)
    lex.check_namespaces(interp)
    L = build_aspect_language(interp)
    dist = load_distribution(args.dist, universe) if args.dist else Distribution.uniform(universe)
    return universe, lex, L, dist


def cmd_degree(args) -> int:
    _, lex, L, dist = _semantic_inputs(args)
    if args.mode == "exact":
        result = degree_exact(args.x, args.y, lex, L, dist)
    else:
        result = degree_mc(args.x, args.y, lex, L, dist, samples=args.samples, seed=args.seed, threads=args.threads)
    _emit(args, result.to_json())
    return 0


def cmd_compose(args) -> int:
    _, lex, L, _ = _semantic_inputs(args)
    x = sentence_vector(args.sentence, lex, L)
    payload = sentence_operator(x).to_json()
    payload["coeffs"] = {show_str(s): c for s, c in sorted(x.coeffs.items())}
    _emit(args, payload)
    return 0


def _algebra_language(args):
    if args.gamma:
        _need(args, "universe")
        return build_gamma_language(load_gamma(args.gamma), load_universe(args.universe))
    _need(args, "language")
    return load_language(args.language)


def cmd_algebra(args) -> int:
    L = _algebra_language(args)
    if args.action == "info":
        strings = enumerate_nonzero_strings(L)
        basis = string_basis(L)
        _emit(args, {
            "strings": len(strings),
            "dimension": len(basis),
            "basis": [show_str(s) for s in basis.strings],
        })
        return 0
    if len(args.operands) != 2:
        raise InputError(f"algebra {args.action} takes two strings")
    x, y = (AlgebraElement.hat(L, to_str(s)) for s in args.operands)
    if args.action == "mul":
        z = multiply(x, y)
        _emit(args, {
            "coeffs": {show_str(s): c for s, c in sorted(z.coeffs.items())},
            "support": [c.to_json() for c in sorted(z.function.support)],
        })
    else:
        _emit(args, {"leq": cf_leq(x.function, y.function), "geq": cf_leq(y.function, x.function)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for name in ("universe", "lexicon", "interp", "dist", "language", "gamma"):
        common.add_argument(f"--{name}", metavar="FILE")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--tol", type=float, default=1e-12, help="tolerance for operator comparisons")

    parser = argparse.ArgumentParser(prog="contextalg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="measure the operator identities on a universe")
    p.add_argument("--pairs", metavar="FILE", help='JSON {"pairs": [[u, v], ...]}; default all member pairs')
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("entail", parents=[common], help="compare entailment with the projection order")
    p.add_argument("u")
    p.add_argument("v")
    p.set_defaults(func=cmd_entail)

    p = sub.add_parser("degree", parents=[common], help="degree to which sentence x entails sentence y")
    p.add_argument("x", help='space-separated words, e.g. "w1 w2"')
    p.add_argument("y")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_degree)

    p = sub.add_parser("compose", parents=[common], help="operator of a sentence at the empty context")
    p.add_argument("sentence")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("algebra", parents=[common], help="inspect the context algebra of a language")
    p.add_argument("action", choices=("info", "mul", "order"))
    p.add_argument("operands", nargs="*", help='strings as space-separated symbols; "" is the empty string')
    p.set_defaults(func=cmd_algebra)
    return parser


def _validate(args) -> None:
    if args.tol < 0:
        raise InputError("--tol must be nonnegative")
    if getattr(args, "samples", 1) < 1:
        raise InputError("--samples must be at least 1")
    if getattr(args, "seed", 0) < 0:
        raise InputError("--seed must be nonnegative")
    if getattr(args, "threads", 1) < 1:
        raise InputError("--threads must be at least 1")


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("CONTEXTALG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
        return args.func(args)
    except ContextAlgError as exc:
        print(f"contextalg {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
