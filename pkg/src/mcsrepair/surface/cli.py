"""Command-line front end.

Exit codes: 0 success (or consistent / valid), 1 violated or counterexample,
2 logically inconsistent, 3 bound exhausted or inconclusive, 64 bad usage,
65 malformed input, 66 unreadable input file.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ..aic import (COUNTEREXAMPLE_1, COUNTEREXAMPLE_2, INCONCLUSIVE,
                   ORACLE_BOUND, VALID, Problem, RepairSession, aic_label,
                   bounded_validity_check, sorted_actions)
from ..errors import BoundExceeded, MCSError
from ..fixtures import FIXTURES, fixture
from ..kernel import compute_equilibrium
from .export import export_tree, tree_to_dict
from .parser import ParseError, parse_atoms, parse_problem
from .render import qualify_contexts, render_problem, render_state, render_update_set

EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EX_USAGE)


def _input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", nargs="?", help="problem file, or - for stdin")
    p.add_argument("--fixture", metavar="NAME", help="load a bundled fixture instead")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="mcs-repair",
                  description="Repairs for managed multi-context systems under active integrity constraints.")
    sub = top.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check", help="exit 0 if consistent, 1 if an AIC is violated, 2 if no equilibrium")
    _input_args(p)

    p = sub.add_parser("equilibrium", help="print the equilibrium as sorted atoms")
    _input_args(p)

    p = sub.add_parser("repair", help="build the repair tree or list repairs")
    _input_args(p)
    p.add_argument("--mode", choices=("tree", "weak", "grounded"), default="grounded")
    p.add_argument("--out", choices=("json", "dot", "text"), default="text")
    p.add_argument("--strategy", choices=("minimal", "wellfounded"),
                   help="tree construction (default: minimal for trees, wellfounded otherwise)")
    p.add_argument("--dag", action="store_true", help="export shared nodes with all their edges")

    p = sub.add_parser("validate-aic", help="bounded check of both validity conditions")
    _input_args(p)
    p.add_argument("--index", type=int, default=1, help="1-based position of the AIC")
    p.add_argument("--bound", type=int, help="maximum number of toggled atoms per variant")
    p.add_argument("--universe", help="atoms to toggle, e.g. 'E: p(a), E: q(a)'")

    p = sub.add_parser("oracle", help="brute-force grounded repairs")
    _input_args(p)
    p.add_argument("--bound", type=int, default=ORACLE_BOUND)
    p.add_argument("--universe", choices=("auto", "relevant", "full"), default="auto")
    p.add_argument("--out", choices=("json", "text"), default="text")

    p = sub.add_parser("render", help="print the problem in normal form")
    _input_args(p)

    sub.add_parser("fixtures", help="list bundled fixtures")
    return top


def load(args) -> tuple[Problem, str]:
    if args.fixture and args.file:
        raise UsageError("give either a file or --fixture, not both")
    if args.fixture:
        if args.fixture not in FIXTURES:
            raise UsageError(f"unknown fixture {args.fixture}; try 'mcs-repair fixtures'")
        return fixture(args.fixture), args.fixture
    if not args.file:
        raise UsageError("no input: give a file or --fixture")
    if args.file == "-":
        return parse_problem(sys.stdin.read()), "<stdin>"
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    return parse_problem(text), args.file


def _meta(strategy: Optional[str] = None) -> dict:
    meta = {"grounding_domain": "active", "logic": "deterministic"}
    if strategy:
        meta["strategy"] = strategy
    return meta


def _repair_lines(repairs, m) -> list[str]:
    return [render_update_set(u, m) or "{}" for u in repairs]


def _emit_repairs(out, repairs, m, fmt: str, meta: dict) -> None:
    if fmt == "json":
        q = qualify_contexts(m)
        data = {"repairs": [[a.short(m.names, qualify=q) for a in sorted_actions(u)]
                            for u in repairs], "meta": meta}
        out.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    else:
        for line in _repair_lines(repairs, m):
            out.write(line + "\n")


def cmd_check(p: Problem, out) -> int:
    session = RepairSession(p.mcs, p.aics)
    v = session.variant(frozenset())
    if not v.ok:
        out.write("logically inconsistent: no equilibrium\n")
        return 2
    if not v.violated:
        out.write("consistent\n")
        return 0
    for text in sorted(session.text(r) for r in v.violated):
        out.write(f"violated: {text}\n")
    return 1


def cmd_equilibrium(p: Problem, out) -> int:
    s = compute_equilibrium(p.mcs)
    if s is None:
        sys.stderr.write("no equilibrium\n")
        return 2
    for line in render_state(p.mcs, s):
        out.write(line + "\n")
    return 0


def cmd_repair(p: Problem, args, out) -> int:
    session = RepairSession(p.mcs, p.aics)
    if args.mode == "tree":
        strategy = args.strategy or "minimal"
        tree = session.build_tree(strategy)
        if args.out == "json":
            data = tree_to_dict(tree, args.dag)
            data["meta"] = _meta(strategy)
            out.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
        else:
            out.write(export_tree(tree, args.out, args.dag).decode("utf-8"))
        return 0
    if args.out == "dot":
        raise UsageError("--out=dot is only available with --mode=tree")
    strategy = args.strategy or "wellfounded"
    if args.mode == "weak":
        repairs = session.build_tree(strategy, check_grounded=False).weak_repairs()
    else:
        repairs = session.grounded_repairs(strategy)
    _emit_repairs(out, repairs, p.mcs, args.out, _meta(strategy))
    return 0


def default_universe(p: Problem, index: int) -> list:
    """Facts of the contexts offering add and del, plus the atoms the AIC acts on."""
    m = p.mcs
    items = set()
    for i, c in enumerate(m.contexts, 1):
        if {"add", "del"} <= c.op_names:
            items.update((i, a) for a in c.kb.facts)
    session = RepairSession(m, [p.aics[index]])
    for a in session.head_universe():
        if a.op in ("add", "del") and {"add", "del"} <= m.context(a.context).op_names:
            items.add((a.context, a.arg))
    return sorted(items, key=lambda t: (t[0], str(t[1])))


def cmd_validate(p: Problem, args, out) -> int:
    if not p.aics:
        raise UsageError("the problem has no AICs")
    if not 1 <= args.index <= len(p.aics):
        raise UsageError(f"--index must be between 1 and {len(p.aics)}")
    k = args.index - 1
    universe = (parse_atoms(args.universe, p.mcs) if args.universe is not None
                else default_universe(p, k))
    bound = args.bound if args.bound is not None else len(universe)
    if bound < 0:
        raise UsageError("--bound must be non-negative")
    report = bounded_validity_check(p.mcs, p.aics[k], universe, bound)
    m = p.mcs
    out.write(f"aic: {aic_label(p.aics, k)}\n")
    out.write(f"verdict: {report.verdict}\n")
    out.write(f"variants: {report.variants}{'' if report.exhaustive else ' (bounded)'}\n")
    if report.variant is not None:
        out.write(f"variant: {{{render_update_set(report.variant, m)}}}\n")
    if report.action is not None:
        out.write(f"action: {report.action.short(m.names, qualify=qualify_contexts(m))}\n")
    for a, t in report.witnesses:
        out.write(f"witness: {a.short(m.names, qualify=qualify_contexts(m))} "
                  f"<- {{{render_update_set(t, m)}}}\n")
    return {VALID: 0, COUNTEREXAMPLE_1: 1, COUNTEREXAMPLE_2: 1, INCONCLUSIVE: 3}[report.verdict]


def cmd_oracle(p: Problem, args, out) -> int:
    session = RepairSession(p.mcs, p.aics, grounding="brute")
    repairs = session.oracle(args.bound, args.universe)
    _emit_repairs(out, repairs, p.mcs, args.out, dict(_meta(), universe=args.universe))
    return 0


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "fixtures":
        for name in sorted(FIXTURES):
            out.write(name + "\n")
        return 0
    try:
        p, _ = load(args)
        if args.command == "check":
            return cmd_check(p, out)
        if args.command == "equilibrium":
            return cmd_equilibrium(p, out)
        if args.command == "repair":
            return cmd_repair(p, args, out)
        if args.command == "validate-aic":
            return cmd_validate(p, args, out)
        if args.command == "oracle":
            return cmd_oracle(p, args, out)
        out.write(render_problem(p))
        return 0
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"mcs-repair: error: {e}\n")
        return EX_USAGE
    except ParseError as e:
        where = args.fixture or args.file or "<input>"
        sys.stderr.write(f"{where}:{e.line}:{e.col}: error: {e.message}\n")
        return EX_DATAERR
    except OSError as e:
        sys.stderr.write(f"mcs-repair: cannot read {args.file}: {e.strerror}\n")
        return EX_NOINPUT
    except BoundExceeded as e:
        sys.stderr.write(f"mcs-repair: {e}\n")
        return 3
    except MCSError as e:
        sys.stderr.write(f"mcs-repair: error: {e}\n")
        return EX_DATAERR


if __name__ == "__main__":
    raise SystemExit(main())
