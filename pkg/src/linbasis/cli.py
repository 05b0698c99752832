"""Command-line surface: generate, search, basis, check, convert, verify-derivation.

Exit codes: 0 success, 1 negative verdict, 2 usage error, 3 budget guard.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import cliques as cq
from . import formula as fm
from . import graph as gr
from .basis import basis
from .isomorphism import is_self_dual
from .enumeration import BudgetError, all_graph_numerics, p4_free_numerics
from .rewrite import (
    GraphInference,
    RuleSet,
    check_derivation,
    inference_webs,
    is_instance,
    parse_derivation,
)
from .search import SearchConfig, run_search

log = logging.getLogger("linbasis")


def _load_rules(spec: str) -> RuleSet:
    if spec == "builtin:sm":
        return RuleSet.builtin_sm()
    if spec == "builtin:none":
        return RuleSet.empty()
    return RuleSet.from_file(spec)


def _default_ckpt() -> str | None:
    return os.environ.get("LINBASIS_CKPT_DIR") or None


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--all-graphs", action="store_true", help="search all graphs, not only P4-free")
    parser.add_argument("--stable-set", action="store_true", help="use maximal stable set entailment")
    parser.add_argument("--ckpt", default=_default_ckpt(), help="checkpoint directory (default $LINBASIS_CKPT_DIR)")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="workers for the classification phase")
    parser.add_argument("--long-run", action="store_true", help="allow the multi-hour sizes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linbasis", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log phase progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit the graph family in phase-1 format")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--all-graphs", action="store_true")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("search", help="run the seven-phase search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rules", default="builtin:sm", help="rule file, builtin:sm, or builtin:none")
    _add_search_flags(p)

    p = sub.add_parser("basis", help="compute the stratified basis up to n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    _add_search_flags(p)

    p = sub.add_parser("check", help="analyse one inference given as formulas")
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--rules", default="builtin:sm")
    p.add_argument("--expect-valid", action="store_true", help="exit 1 when the inference is invalid")
    p.add_argument("--long-run", action="store_true", help="allow the expensive minimality scan above n=8")

    p = sub.add_parser("convert", help="convert between formula and graph text forms")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--formula")
    group.add_argument("--graph", help='graph text "n N"')

    p = sub.add_parser("verify-derivation", help="check a derivation file step by step")
    p.add_argument("--file", required=True)
    p.add_argument("--rules", default="builtin:sm")
    return parser


def _cmd_generate(args) -> int:
    mode = "all" if args.all_graphs else "p4free"
    numerics = all_graph_numerics(args.n) if args.all_graphs else p4_free_numerics(args.n)
    lines = [f"phase1 n={args.n} mode={mode}"]
    lines.extend(map(str, numerics.tolist()))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _search_config(args, rules: RuleSet) -> SearchConfig:
    return SearchConfig(
        n=args.n,
        rules=rules,
        mode="all" if args.all_graphs else "p4free",
        entailment="stable" if args.stable_set else "clique",
        checkpoint_dir=args.ckpt,
        workers=max(1, args.jobs),
        long_run=args.long_run,
    )


def _cmd_search(args) -> int:
    report = run_search(_search_config(args, _load_rules(args.rules)))
    sys.stdout.write(report.text())
    return 0


def _cmd_basis(args) -> int:
    result = basis(
        args.n,
        mode="all" if args.all_graphs else "p4free",
        entailment="stable" if args.stable_set else "clique",
        checkpoint_dir=args.ckpt,
        workers=max(1, args.jobs),
        long_run=args.long_run,
    )
    if args.out:
        Path(args.out).write_text(result.text())
    else:
        sys.stdout.write(result.text())
    return 0


def _names(order, mask: int) -> str:
    members = sorted(order[i] for i in range(len(order)) if (mask >> i) & 1)
    return "{" + ", ".join(members) + "}"


def _cmd_check(args) -> int:
    inf = fm.FormulaInference(fm.parse(args.lhs), fm.parse(args.rhs))
    rules = _load_rules(args.rules)
    valid = fm.is_valid(inf)
    lines = [f"inference: {fm.format_inference(inf)}", f"valid: {str(valid).lower()}"]
    shared = fm.variables(inf.lhs) & fm.variables(inf.rhs)
    representable = (
        fm.variables(inf.lhs) == fm.variables(inf.rhs)
        and shared
        and fm.is_constant_free(inf.lhs)
        and fm.is_constant_free(inf.rhs)
        and fm.is_negation_free(inf.lhs)
        and fm.is_negation_free(inf.rhs)
    )
    webs = order = None
    if representable:
        webs, order = inference_webs(inf)
    if not valid:
        if webs is not None:
            witness = cq.find_countermodel(webs.lhs, webs.rhs)
            lines.append(f"countermodel: {_names(order, witness)}")
        else:
            witness = fm.countermodel(inf)
            lines.append("countermodel: {" + ", ".join(sorted(witness)) + "}")
    trivial_at = [name for name in sorted(shared) if fm.is_trivial_at(inf, name)]
    lines.append(f"trivial: {str(bool(trivial_at)).lower()}")
    lines.append("trivial_at: " + (", ".join(trivial_at) if trivial_at else "-"))
    lines.append(
        f"constant_free: {str(fm.is_constant_free(inf.lhs) and fm.is_constant_free(inf.rhs)).lower()}"
    )
    lines.append(
        f"negation_free: {str(fm.is_negation_free(inf.lhs) and fm.is_negation_free(inf.rhs)).lower()}"
    )
    if webs is not None:
        lines.append(f"web: {webs.n} {webs.lhs.edges} {webs.rhs.edges}")
        lines.append(f"self_dual: {str(is_self_dual(webs)).lower()}")
        minimal = _logical_minimality(webs, valid, args.long_run)
        lines.append(f"logically_minimal: {minimal}")
        for rule in rules:
            verdict = str(is_instance(webs, rule.inference)).lower()
            lines.append(f"instance of {rule.name}: {verdict}")
    else:
        lines.append("web: -")
        lines.append("self_dual: -")
        lines.append("logically_minimal: -")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.expect_valid and not valid:
        return 1
    return 0


def _logical_minimality(webs: GraphInference, valid: bool, long_run: bool) -> str:
    if not valid:
        return "-"
    n = webs.n
    if n > (9 if long_run else 8):
        return "- (pass --long-run for the exhaustive scan)"
    from ._kernels import batch_maximal_cliques, count_interpolants

    numerics = p4_free_numerics(n)
    flat, offsets = batch_maximal_cliques(numerics, n)
    size = 1 << n
    up = np.zeros(size, dtype=np.uint8)
    up[list(cq.maximal_cliques(webs.rhs))] = 1
    idx = np.arange(size)
    for i in range(n):
        bit = 1 << i
        hi = idx[(idx & bit) != 0]
        up[hi] |= up[hi ^ bit]
    r_cliques = np.array(cq.maximal_cliques(webs.lhs), dtype=np.int64)
    bad = count_interpolants(
        r_cliques, up, flat, offsets, numerics, webs.lhs.edges, webs.rhs.edges
    )
    return "true" if bad == 0 else "false"


def _cmd_convert(args) -> int:
    if args.formula is not None:
        web, order = gr.to_web(fm.parse(args.formula))
        sys.stdout.write(gr.format_graph(web) + "\n")
        return 0
    web = gr.parse_graph(args.graph)
    formula = gr.from_web(web)
    sys.stdout.write(fm.print_formula(formula) + "\n")
    return 0


def _cmd_verify_derivation(args) -> int:
    derivation = parse_derivation(Path(args.file).read_text())
    rules = _load_rules(args.rules)
    ok, reports = check_derivation(derivation, rules)
    for report in reports:
        kind = report.rule if report.rule is not None else "ac"
        status = "ok" if report.ok else f"FAIL ({report.reason})"
        sys.stdout.write(f"step {report.index}: {kind} : {status}\n")
    sys.stdout.write(f"derivation: {'ok' if ok else 'FAIL'}\n")
    return 0 if ok else 1


_DISPATCH = {
    "generate": _cmd_generate,
    "search": _cmd_search,
    "basis": _cmd_basis,
    "check": _cmd_check,
    "convert": _cmd_convert,
    "verify-derivation": _cmd_verify_derivation,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    try:
        return _DISPATCH[args.command](args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except gr.NotCographError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        fm.FormulaSyntaxError,
        fm.LinearityError,
        gr.RangeError,
        gr.SizeMismatchError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
