"""Managed multi-context systems: contexts, bridge rules, equilibria.

Every context logic used here is deterministic (one accepted belief set per
knowledge base), so an MCS has at most one equilibrium reachable by the
stratified fixpoint below, and weak and strong satisfaction coincide.
"""
from __future__ import annotations

import os
from functools import lru_cache
from dataclasses import dataclass, replace
from typing import Any, Iterable, Iterator, Optional, Sequence

import networkx as nx

from .errors import (NoAcceptedBeliefSet, OperationError, StratificationError,
                     UnsafeRuleError)
from .logic import (Atom, BeliefSet, CountLit, EQ, Formula, Lit, Literal,
                    is_local, is_var, render_literal, solutions, unsafe_variables)

# head operations whose effect only ever adds beliefs
MONOTONE_OPS = frozenset({"add", "assertEqual", "assert"})


@dataclass(frozen=True)
class ManagedContext:
    """A knowledge base with its logic, import domain and operation names.

    ``op_names`` are the operations update actions may use. ``bridge_ops``
    are additionally available to bridge-rule heads, which lets a context
    receive ported beliefs while refusing every external update.
    """

    name: str
    kb: Any
    logic: Any
    op_names: frozenset[str] = frozenset()
    bridge_ops: frozenset[str] = frozenset({"add"})
    import_domain: Optional[frozenset[str]] = None

    def accept(self) -> BeliefSet:
        return self.logic.accept(self.kb)

    def with_kb(self, kb) -> "ManagedContext":
        return replace(self, kb=kb)


@dataclass(frozen=True, order=True)
class BridgeRule:
    context: int
    op: str
    arg: Formula
    body: tuple[Literal, ...] = ()

    def __post_init__(self):
        unsafe = unsafe_variables(self.body, self.arg.variables())
        if unsafe:
            raise UnsafeRuleError(f"unsafe variables {sorted(unsafe)} in bridge rule")

    @property
    def ground(self) -> bool:
        return self.arg.ground and all(
            all(is_local(v) for v in l.variables()) for l in self.body)

    def substitute(self, binding) -> "BridgeRule":
        return BridgeRule(self.context, self.op, self.arg.substitute(binding),
                          tuple(l.substitute(binding) for l in self.body))

    def render(self, names=None) -> str:
        ctx = names[self.context] if names else str(self.context)
        body = ", ".join(render_literal(l, names) for l in self.body)
        return f"({ctx}: {self.op}({self.arg})) <- {body}"


@dataclass(frozen=True)
class MCS:
    contexts: tuple[ManagedContext, ...] = ()
    bridge_rules: tuple[BridgeRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "bridge_rules", tuple(self.bridge_rules))
        n = len(self.contexts)
        names = [c.name for c in self.contexts]
        if len(set(names)) != n:
            raise ValueError(f"duplicate context names in {names}")
        for r in self.bridge_rules:
            if not 1 <= r.context <= n:
                raise ValueError(f"bridge head context {r.context} out of range")
            ctx = self.contexts[r.context - 1]
            if r.op not in ctx.op_names | ctx.bridge_ops:
                raise ValueError(f"operation {r.op} not available in context {ctx.name}")
            for lit in r.body:
                if not 1 <= lit.context <= n:
                    raise ValueError(f"literal context {lit.context} out of range")

    def __len__(self) -> int:
        return len(self.contexts)

    def context(self, i: int) -> ManagedContext:
        return self.contexts[i - 1]

    def index(self, name: str) -> int:
        for i, c in enumerate(self.contexts, 1):
            if c.name == name:
                return i
        raise KeyError(name)

    @property
    def names(self) -> dict[int, str]:
        return {i: c.name for i, c in enumerate(self.contexts, 1)}

    def with_kbs(self, kbs: Sequence) -> "MCS":
        ctxs = tuple(c if c.kb is kb else c.with_kb(kb) for c, kb in zip(self.contexts, kbs))
        return MCS(ctxs, self.bridge_rules)


@dataclass(frozen=True)
class BeliefState:
    """One belief set per context, indexed from 1."""

    sets: tuple[BeliefSet, ...] = ()

    def __getitem__(self, i: int) -> BeliefSet:
        if i < 1:
            raise IndexError(i)
        return self.sets[i - 1]

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[BeliefSet]:
        return iter(self.sets)

    def issubset(self, other: "BeliefState") -> bool:
        return all(a.atoms <= b.atoms and a.aliases <= b.aliases
                   for a, b in zip(self.sets, other.sets))


def accept(ctx: ManagedContext) -> BeliefSet:
    """The unique accepted belief set of ``ctx.kb``."""
    return ctx.accept()


def literal_constants(lits: Iterable[Literal]) -> set[str]:
    out: set[str] = set()
    for l in lits:
        if isinstance(l, CountLit):
            if not is_var(l.subject):
                out.add(l.subject)
        else:
            out.update(a for a in l.atom.args if not is_var(a))
    return out


def active_domain(m: MCS, extra: Iterable[str] = ()) -> frozenset[str]:
    """Constants of all kbs, import domains and bridge rules, plus ``extra``."""
    dom = set(extra)
    for c in m.contexts:
        dom |= c.logic.constants(c.kb)
        if c.import_domain is not None:
            dom |= c.import_domain
    for r in m.bridge_rules:
        dom |= literal_constants(r.body)
        arg = getattr(r.arg, "atom", r.arg)
        dom.update(a for a in arg.args if not is_var(a))
    return frozenset(dom)


def iteration_bound(m: MCS, domain: Optional[Iterable[str]] = None) -> int:
    env = os.environ.get("MCS_REPAIR_MAX_ITER")
    if env:
        return int(env)
    size = len(frozenset(domain) if domain is not None else active_domain(m))
    return max(1000, 10 * size * size)


def _named(binding: dict) -> dict:
    return {k: v for k, v in binding.items() if not is_local(k)}


def ground_bridge_instances(m: MCS, s: BeliefState,
                            rules: Optional[Iterable[BridgeRule]] = None,
                            domain: Optional[Iterable[str]] = None) -> set[BridgeRule]:
    """Ground bridge-rule instances applicable in ``s``.

    Variables range over the head context's import domain (the active domain
    when the context leaves it open).
    """
    if len(s) != len(m):
        raise ValueError("belief state does not match the number of contexts")
    dom = frozenset(domain) if domain is not None else active_domain(m)
    out = set()
    for r in (m.bridge_rules if rules is None else rules):
        allowed = m.context(r.context).import_domain or dom
        for b in solutions(r.body, s, domain=allowed):
            b = _named(b)
            if all(v in allowed for v in b.values()):
                out.add(r.substitute(b))
    return out


def _node_label(m: MCS, node) -> str:
    return f"{m.context(node[0]).name}:{node[1]}"


def _head_node(r: BridgeRule):
    if r.op not in MONOTONE_OPS:
        return None
    atom = getattr(r.arg, "atom", r.arg)
    return (r.context, EQ if r.op != "add" else atom.pred)


def _structure(m: MCS) -> tuple:
    deps = tuple(frozenset(c.logic.dependencies(c.kb)) for c in m.contexts)
    return deps, m.bridge_rules


def dependency_graph(m: MCS) -> nx.DiGraph:
    """Edges run from a body node to the head node, flagged when negative."""
    return _dependency_graph(*_structure(m))


def _dependency_graph(deps, bridge_rules) -> nx.DiGraph:
    g = nx.DiGraph()

    def edge(u, v, positive):
        neg = not positive
        if g.has_edge(u, v):
            neg = neg or g.edges[u, v]["neg"]
        g.add_edge(u, v, neg=neg)

    for i, ctx_deps in enumerate(deps, 1):
        for head, body, positive in sorted(ctx_deps):
            edge((i, body), (i, head), positive)
    for r in bridge_rules:
        head = _head_node(r)
        if head is None:
            continue
        g.add_node(head)
        for lit in r.body:
            if isinstance(lit, CountLit):
                edge((lit.context, lit.role), head, False)
            else:
                edge((lit.context, lit.atom.pred), head, lit.positive)
    return g


def stratify(m: MCS) -> list[tuple[BridgeRule, ...]]:
    """Group bridge rules into layers evaluated bottom-up.

    Rules with a non-monotone head operation go to a final layer; their
    convergence is only guarded by the iteration bound.
    """
    try:
        return _stratify(*_structure(m))
    except StratificationError as e:
        # the cached version has no context names at hand
        raise StratificationError(_node_label(m, n) for n in e.cycle) from None


@lru_cache(maxsize=256)
def _stratify(deps, bridge_rules) -> list[tuple[BridgeRule, ...]]:
    g = _dependency_graph(deps, bridge_rules)
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(g)):
        for n in scc:
            comp[n] = k
    for u, v, d in sorted(g.edges(data=True)):
        if d["neg"] and comp[u] == comp[v]:
            cycle = nx.shortest_path(g, v, u) + [v]
            raise StratificationError(cycle)
    level = dict.fromkeys(g.nodes, 0)
    changed = True
    while changed:
        changed = False
        for u, v, d in g.edges(data=True):
            need = level[u] + (1 if d["neg"] else 0)
            if level[v] < need:
                level[v] = need
                changed = True
    top = max(level.values(), default=0) + 1
    layers: dict[int, list[BridgeRule]] = {}
    for r in bridge_rules:
        head = _head_node(r)
        layers.setdefault(top if head is None else level[head], []).append(r)
    return [tuple(layers[k]) for k in sorted(layers)]


def _heads(m: MCS, rules, state: BeliefState, dom) -> list[frozenset]:
    per_ctx: list[set] = [set() for _ in m.contexts]
    for g in ground_bridge_instances(m, state, rules, dom):
        per_ctx[g.context - 1].add((g.op, g.arg))
    return [frozenset(h) for h in per_ctx]


def compute_equilibrium(m: MCS, max_iter: Optional[int] = None,
                        trace: Optional[list] = None) -> Optional[BeliefState]:
    """Stratified iterated fixpoint; ``None`` when no equilibrium is reached.

    Bridge-rule heads are applied to scratch copies of the kbs; ``m`` is
    never modified. When ``trace`` is a list, every intermediate belief state
    is appended to it.
    """
    layers = stratify(m)
    dom = active_domain(m)
    bound = max_iter if max_iter is not None else iteration_bound(m, dom)
    n = len(m)
    try:
        state = [c.accept() for c in m.contexts]
    except NoAcceptedBeliefSet:
        return None
    if trace is not None:
        trace.append(BeliefState(tuple(state)))
    heads: list[frozenset] = [frozenset()] * n
    active: list[BridgeRule] = []
    for layer in layers:
        active.extend(layer)
        for _ in range(bound):
            new_heads = _heads(m, active, BeliefState(tuple(state)), dom)
            if new_heads == heads:
                break
            try:
                for i in range(n):
                    if new_heads[i] != heads[i]:
                        c = m.contexts[i]
                        state[i] = c.logic.accept(c.logic.manage(new_heads[i], c.kb))
            except (NoAcceptedBeliefSet, OperationError):
                return None
            heads = new_heads
            if trace is not None:
                trace.append(BeliefState(tuple(state)))
        else:
            return None
    return BeliefState(tuple(state))


def is_logically_consistent(m: MCS) -> bool:
    return compute_equilibrium(m) is not None


def is_equilibrium(m: MCS, s: BeliefState) -> bool:
    """Check the equilibrium condition for ``s`` directly."""
    heads = _heads(m, m.bridge_rules, s, active_domain(m))
    try:
        return all(c.logic.accept(c.logic.manage(h, c.kb)) == si
                   for c, h, si in zip(m.contexts, heads, s))
    except (NoAcceptedBeliefSet, OperationError):
        return False
