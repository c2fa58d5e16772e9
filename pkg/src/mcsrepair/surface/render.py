"""Render problems, belief states and repairs back to text."""
from __future__ import annotations

from typing import Iterable

from ..aic import AIC, Problem, UpdateAction, sorted_actions
from ..kernel import MCS, BeliefState, BridgeRule
from ..logic import render_literal


def _ops(names) -> str:
    return ", ".join(sorted(names))


def render_context_decl(ctx) -> str:
    parts = [f"context {ctx.name}"]
    if ctx.op_names:
        parts.append(f"ops {_ops(ctx.op_names)}")
    if ctx.bridge_ops != frozenset({"add"}):
        parts.append(f"bridge {_ops(ctx.bridge_ops)}")
    if ctx.import_domain is not None:
        parts.append(f"domain {', '.join(sorted(ctx.import_domain))}")
    return " ".join(parts) + "."


def render_bridge(r: BridgeRule, names) -> str:
    text = f"bridge ({names[r.context]}: {r.op}({r.arg}))"
    if r.body:
        text += " <- " + ", ".join(render_literal(l, names) for l in r.body)
    return text + "."


def render_aic(r: AIC, names) -> str:
    label = f"{r.name}: " if r.name else ""
    return f"aic {label}{r.render(names)}."


def render_problem(p: Problem) -> str:
    m = p.mcs
    names = m.names
    lines = [render_context_decl(c) for c in m.contexts]
    for c in m.contexts:
        kb = c.kb
        if kb.facts:
            lines.append(f"fact {c.name}: {', '.join(str(a) for a in sorted(kb.facts))}.")
        if kb.aliases:
            pairs = ", ".join(f"{a} = {b}" for a, b in sorted(kb.aliases))
            lines.append(f"equal {c.name}: {pairs}.")
        for r in kb.rules:
            lines.append(f"rule {c.name}: {r}")
    lines.extend(render_bridge(r, names) for r in m.bridge_rules)
    lines.extend(render_aic(r, names) for r in p.aics)
    return "\n".join(lines) + "\n" if lines else ""


def render_state(m: MCS, s: BeliefState) -> list[str]:
    """One ``Ctx: atom`` line per belief, equalities included, sorted."""
    out = []
    for c, bs in zip(m.contexts, s):
        out.extend(f"{c.name}: {a}" for a in bs.atoms)
        out.extend(f"{c.name}: {a} = {b}" for a, b in bs.aliases)
    return sorted(out)


def qualify_contexts(m: MCS) -> bool:
    """Actions are prefixed with their context only when several contexts are mutable."""
    return sum(1 for c in m.contexts if c.op_names) > 1


def render_update_set(u: Iterable[UpdateAction], m: MCS) -> str:
    q = qualify_contexts(m)
    names = m.names
    return ", ".join(a.short(names, qualify=q) for a in sorted_actions(u))
