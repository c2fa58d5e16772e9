"""Deductive contexts: facts, safe stratified Horn rules, equality, operations.

A knowledge base is an immutable :class:`DeductiveKB`. Its unique accepted
belief set is the stratified least model (:func:`least_model`), with all
constants replaced by the representative of their equality class. Equality
classes are kept by a union-find whose representative is always the
lexicographically least member.

Management operations are looked up in :data:`OPERATIONS`. Primitive ones
(``add``, ``del``, ``assertEqual``) touch one fact or one equality; compound
ones expand, against the current kb, into a list of primitive effects that
is then applied as a single step.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator

import networkx as nx

from .errors import (InconsistentEquality, NoAcceptedBeliefSet, OperationError,
                     StratificationError, UnsafeRuleError)
from .logic import (Atom, BeliefSet, EQ, Formula, Lit, Neg, is_local, is_var,
                    bound_variables, unsafe_variables)

DISTINCT = "distinct"
ENROLLED = "enrolled"
WEB_ENROLLED = "webEnrolled"
CLASS = "class"


@dataclass(frozen=True, order=True)
class HornRule:
    head: Atom
    body: tuple[Lit, ...] = ()

    def __post_init__(self):
        if self.head.is_equality:
            raise UnsafeRuleError(f"equality cannot be a rule head: {self}")
        unsafe = unsafe_variables(self.body, self.head.variables())
        if unsafe:
            raise UnsafeRuleError(f"unsafe variables {sorted(unsafe)} in rule {self}")
        # rule bodies evaluate equalities as filters only
        joined = bound_variables(l for l in self.body if not l.atom.is_equality)
        loose = {v for l in self.body if l.atom.is_equality for v in l.variables()} - joined
        if loose:
            raise UnsafeRuleError(f"unsafe variables {sorted(loose)} in rule {self}")

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        parts = [str(l.atom) if l.positive else f"not {l.atom}" for l in self.body]
        return f"{self.head} :- {', '.join(parts)}."


def rule(head: Atom, *body: "Atom | tuple[Atom, bool]") -> HornRule:
    """Shorthand: ``rule(h, a, (b, False))`` is ``h :- a, not b``."""
    lits = []
    for item in body:
        atom, positive = item if isinstance(item, tuple) else (item, True)
        lits.append(Lit(0, atom, positive))
    return HornRule(head, tuple(lits))


class UnionFind:
    """Mutable union-find whose representatives are lexicographically least."""

    def __init__(self, aliases: Iterable[tuple[str, str]] = ()):
        self.parent: dict[str, str] = {}
        for member, rep in aliases:
            self.union(member, rep)

    def find(self, x: str) -> str:
        parent = self.parent
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: str, b: str) -> str:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        self.parent[hi] = lo
        self.parent.setdefault(lo, lo)
        return lo

    def aliases(self) -> frozenset[tuple[str, str]]:
        return frozenset((x, self.find(x)) for x in self.parent if self.find(x) != x)


@dataclass(frozen=True)
class DeductiveKB:
    facts: frozenset[Atom] = frozenset()
    rules: tuple[HornRule, ...] = ()
    aliases: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        for f in self.facts:
            if not f.ground or f.is_equality:
                raise ValueError(f"facts must be ground non-equality atoms: {f}")

    @classmethod
    def build(cls, facts: Iterable[Atom] = (), rules: Iterable[HornRule] = (),
              equalities: Iterable[tuple[str, str]] = ()) -> "DeductiveKB":
        kb = cls(frozenset(facts), tuple(rules))
        for a, b in equalities:
            kb = _apply_effects(kb, [("merge", a, b)])
        return kb

    def canon(self, c: str) -> str:
        return dict(self.aliases).get(c, c)

    def constants(self) -> set[str]:
        out = {c for f in self.facts for c in f.args}
        for r in self.rules:
            for atom in [r.head, *(l.atom for l in r.body)]:
                out.update(a for a in atom.args if not is_var(a))
        out.update(c for pair in self.aliases for c in pair)
        return out


# -- least model ------------------------------------------------------------

@lru_cache(maxsize=512)
def rule_strata(rules: tuple[HornRule, ...]) -> tuple[tuple[HornRule, ...], ...]:
    """Partition rules into negation strata; raises on unstratifiable sets."""
    g = nx.DiGraph()
    for r in rules:
        g.add_node(r.head.pred)
        for lit in r.body:
            if lit.atom.is_equality:
                continue
            neg = not lit.positive
            if g.has_edge(lit.atom.pred, r.head.pred):
                neg = neg or g.edges[lit.atom.pred, r.head.pred]["neg"]
            g.add_edge(lit.atom.pred, r.head.pred, neg=neg)
    comp = {}
    for i, scc in enumerate(nx.strongly_connected_components(g)):
        for n in scc:
            comp[n] = i
    for u, v, data in g.edges(data=True):
        if data["neg"] and comp[u] == comp[v]:
            raise StratificationError(nx.shortest_path(g, v, u) + [v])
    level = dict.fromkeys(g.nodes, 0)
    changed = True
    while changed:
        changed = False
        for u, v, d in g.edges(data=True):
            need = level[u] + (1 if d["neg"] else 0)
            if level[v] < need:
                level[v] = need
                changed = True
    layers: dict[int, list[HornRule]] = {}
    for r in rules:
        layers.setdefault(level[r.head.pred], []).append(r)
    return tuple(tuple(layers[k]) for k in sorted(layers))


def _join(lits: list[Lit], i: int, binding: dict, sources: list[dict]) -> Iterator[dict]:
    if i == len(lits):
        yield binding
        return
    lit = lits[i]
    pattern = lit.atom.substitute(binding)
    for atom in sources[i].get(pattern.pred, ()):
        if len(atom.args) != len(pattern.args):
            continue
        b = binding
        ok = True
        for p, a in zip(pattern.args, atom.args):
            if is_var(p):
                v = b.get(p)
                if v is None:
                    if b is binding:
                        b = dict(binding)
                    b[p] = a
                elif v != a:
                    ok = False
                    break
            elif p != a:
                ok = False
                break
        if ok:
            yield from _join(lits, i + 1, b, sources)


def _filter_ok(lit: Lit, binding: dict, model: dict, rep: dict) -> bool:
    atom = lit.atom.substitute(binding)
    if atom.is_equality:
        value = rep.get(atom.args[0], atom.args[0]) == rep.get(atom.args[1], atom.args[1])
    elif atom.ground:
        value = atom in model.get(atom.pred, ())
    else:
        value = False
        for cand in model.get(atom.pred, ()):
            if len(cand.args) == len(atom.args) and all(
                    is_local(p) or p == a for p, a in zip(atom.args, cand.args)):
                value = True
                break
    return value if lit.positive else not value


def _fire(r: HornRule, sources: list[dict], model: dict, rep: dict) -> Iterator[Atom]:
    joins = [l for l in r.body if l.positive and not l.atom.is_equality]
    filters = [l for l in r.body if l not in joins]
    for b in _join(joins, 0, {}, sources):
        if all(_filter_ok(f, b, model, rep) for f in filters):
            yield r.head.substitute(b)


@lru_cache(maxsize=4096)
def least_model(kb: DeductiveKB) -> BeliefSet:
    """Stratified least model, evaluated semi-naively per stratum."""
    rep = dict(kb.aliases)
    canon_rules = tuple(_canon_rule(r, rep) for r in kb.rules) if rep else kb.rules
    model: dict[str, set[Atom]] = {}
    for f in kb.facts:
        model.setdefault(f.pred, set()).add(f.substitute(rep) if rep else f)
    for layer in rule_strata(canon_rules):
        joins_of = {r: [l for l in r.body if l.positive and not l.atom.is_equality]
                    for r in layer}
        delta = _derive_all(layer, model, rep, None, joins_of)
        while delta:
            for a in delta:
                model.setdefault(a.pred, set()).add(a)
            delta = _derive_all(layer, model, rep, delta, joins_of)
    atoms = frozenset(a for s in model.values() for a in s)
    for a in model.get(DISTINCT, ()):
        if len(a.args) == 2 and a.args[0] == a.args[1]:
            raise NoAcceptedBeliefSet(f"{a} contradicts equality")
    return BeliefSet(atoms, kb.aliases)


def _derive_all(layer, model, rep, delta, joins_of) -> set[Atom]:
    new: set[Atom] = set()
    delta_idx: dict[str, set[Atom]] = {}
    if delta is not None:
        for a in delta:
            delta_idx.setdefault(a.pred, set()).add(a)
    for r in layer:
        joins = joins_of[r]
        if delta is None:
            variants = [[model] * len(joins)]
        else:
            variants = []
            for i, lit in enumerate(joins):
                if lit.atom.pred in delta_idx:
                    srcs = [model] * len(joins)
                    srcs[i] = delta_idx
                    variants.append(srcs)
        for srcs in variants:
            for atom in _fire(r, srcs, model, rep):
                if atom not in model.get(atom.pred, ()):
                    new.add(atom)
    return new


def _canon_rule(r: HornRule, rep: dict) -> HornRule:
    return HornRule(r.head.substitute(rep),
                    tuple(Lit(l.context, l.atom.substitute(rep), l.positive) for l in r.body))


def eval_count_at_most(model: BeliefSet, k: int, role: str, subject: str) -> bool:
    """Closed-world ``(<= k role)(subject)`` over a materialized model."""
    return model.count(role, subject) <= k


# -- operations ---------------------------------------------------------------

Effect = tuple


def _apply_effects(kb: DeductiveKB, effects: Iterable[Effect]) -> DeductiveKB:
    facts = set(kb.facts)
    uf = UnionFind(kb.aliases)
    merged = False
    for eff in effects:
        if eff[0] == "merge":
            a, b = uf.find(eff[1]), uf.find(eff[2])
            if a == b:
                continue
            if (Atom(DISTINCT, (a, b)) in facts or Atom(DISTINCT, (b, a)) in facts):
                raise InconsistentEquality(f"{eff[1]} and {eff[2]} are asserted distinct")
            uf.union(a, b)
            facts = {f.substitute({x: uf.find(x) for x in f.args}) for f in facts}
            merged = True
            for f in facts:
                if f.pred == DISTINCT and len(f.args) == 2 and f.args[0] == f.args[1]:
                    raise InconsistentEquality(f"merge makes {f} contradictory")
        else:
            atom = Atom(eff[1].pred, tuple(uf.find(x) for x in eff[1].args))
            if eff[0] == "add":
                facts.add(atom)
            else:
                facts.discard(atom)
    aliases = uf.aliases() if merged else kb.aliases
    return DeductiveKB(frozenset(facts), kb.rules, aliases)


def _individual(arg: Formula, op: str) -> str:
    atom = arg.atom if isinstance(arg, Neg) else arg
    if len(atom.args) != 1:
        raise OperationError(f"{op} expects a unary formula, got {arg}")
    return atom.args[0]


def op_webEnroll(kb: DeductiveKB, arg: Formula) -> list[Effect]:
    """Replace ``enrolled(X, Y)`` by ``webEnrolled(X, Y)``."""
    if not isinstance(arg, Atom) or arg.arity != 2:
        raise OperationError(f"webEnroll expects webEnrolled(X, Y), got {arg}")
    x, y = arg.args
    return [("del", Atom(ENROLLED, (x, y))), ("add", Atom(WEB_ENROLLED, (x, y)))]


def op_unregister(kb: DeductiveKB, arg: Formula) -> list[Effect]:
    """Turn every ``webEnrolled(Z, X)`` into ``enrolled(Z, X)``."""
    x = kb.canon(_individual(arg, "unregister"))
    effects: list[Effect] = []
    for f in sorted(kb.facts):
        if f.pred == WEB_ENROLLED and f.arity == 2 and f.args[1] == x:
            effects += [("del", f), ("add", Atom(ENROLLED, f.args))]
    return effects


def op_redistribute(kb: DeductiveKB, arg: Formula) -> list[Effect]:
    """Close class X and move its students, one by one, to the smallest class left."""
    x = kb.canon(_individual(arg, "redistribute"))
    facts = set(kb.facts)
    effects: list[Effect] = []
    closed = Atom(CLASS, (x,))
    if closed in facts:
        effects.append(("del", closed))
        facts.discard(closed)
    moves = sorted((f.args[1], f.pred) for f in kb.facts
                   if f.pred in (ENROLLED, WEB_ENROLLED) and f.arity == 2 and f.args[0] == x)
    targets = sorted(f.args[0] for f in facts if f.pred == CLASS and f.arity == 1
                     and f.args[0] != x)
    if moves and not targets:
        raise OperationError("redistribute target missing")

    def size(c: str) -> int:
        return len({f.args[1] for f in facts
                    if f.pred in (ENROLLED, WEB_ENROLLED) and f.arity == 2 and f.args[0] == c})

    for student, pred in moves:
        target = min(targets, key=lambda c: (size(c), c))
        old, new = Atom(pred, (x, student)), Atom(pred, (target, student))
        facts.discard(old)
        facts.add(new)
        effects += [("del", old), ("add", new)]
    return effects


PRIMITIVE_OPS = frozenset({"add", "del", "assertEqual"})
OP_ALIASES = {"assert": "assertEqual"}
COMPOUND_OPS: dict[str, Callable[[DeductiveKB, Formula], list[Effect]]] = {
    "redistribute": op_redistribute,
    "unregister": op_unregister,
    "webEnroll": op_webEnroll,
}
OPERATIONS = PRIMITIVE_OPS | frozenset(COMPOUND_OPS)


def canonical_op(op: str) -> str:
    return OP_ALIASES.get(op, op)


def effects_of(kb: DeductiveKB, op: str, arg: Formula) -> list[Effect]:
    op = canonical_op(op)
    if not arg.ground:
        raise OperationError(f"non-ground argument {arg} for {op}")
    if op in ("add", "del"):
        if not isinstance(arg, Atom) or arg.is_equality:
            raise OperationError(f"{op} expects an atom, got {arg}")
        return [(op, arg)]
    if op == "assertEqual":
        if not isinstance(arg, Atom) or not arg.is_equality:
            raise OperationError(f"assertEqual expects an equality, got {arg}")
        return [("merge", *arg.args)]
    if op in COMPOUND_OPS:
        return COMPOUND_OPS[op](kb, arg)
    raise OperationError(f"unknown operation {op}")


def apply_operation(kb: DeductiveKB, op: str, arg: Formula) -> DeductiveKB:
    """Apply one operation, expanding compound ones against ``kb``."""
    return _apply_effects(kb, effects_of(kb, op, arg))


def manage(actions: Iterable[tuple[str, Formula]], kb: DeductiveKB) -> DeductiveKB:
    """Apply a set of operations in one shot.

    Effects are all computed against the input kb, then equalities are merged,
    deletions performed and additions made, in that order.
    """
    actions = list(actions)
    if not actions:
        return kb
    if len(actions) == 1:
        return apply_operation(kb, *actions[0])
    effects = [e for op, arg in sorted(actions, key=lambda a: (a[0], str(a[1])))
               for e in effects_of(kb, op, arg)]
    order = {"merge": 0, "del": 1, "add": 2}
    return _apply_effects(kb, sorted(effects, key=lambda e: order[e[0]]))


class DeductiveLogic:
    """The context logic: accepted belief sets and management for DeductiveKB."""

    name = "deductive"
    operations = OPERATIONS

    def accept(self, kb: DeductiveKB) -> BeliefSet:
        return least_model(kb)

    def apply(self, kb: DeductiveKB, op: str, arg: Formula) -> DeductiveKB:
        return apply_operation(kb, op, arg)

    def manage(self, actions, kb: DeductiveKB) -> DeductiveKB:
        return manage(actions, kb)

    def is_primitive(self, op: str) -> bool:
        return canonical_op(op) in ("add", "del")

    def inert(self, kb: DeductiveKB, op: str, arg: Formula) -> bool:
        """True when the operation only deletes facts absent from ``kb`` or
        merges a constant with itself.

        Without other equality merges such an operation changes nothing, alone
        or applied together with others.
        """
        try:
            effects = effects_of(kb, canonical_op(op), arg)
        except OperationError:
            return False
        return all((e[0] == "del" and self.canon_atom(kb, e[1]) not in kb.facts)
                   or (e[0] == "merge" and e[1] == e[2]) for e in effects)

    def canon_atom(self, kb: DeductiveKB, atom: Atom) -> Atom:
        return atom.substitute(dict(kb.aliases)) if kb.aliases else atom

    def dependencies(self, kb: DeductiveKB):
        for r in kb.rules:
            for lit in r.body:
                yield r.head.pred, lit.atom.pred, lit.positive
        if kb.aliases:
            # every predicate is read modulo the equality relation
            for r in kb.rules:
                yield r.head.pred, EQ, True

    def constants(self, kb: DeductiveKB) -> set[str]:
        return kb.constants()

    def validate(self, kb: DeductiveKB) -> None:
        rule_strata(kb.rules)


DEDUCTIVE = DeductiveLogic()


def deductive_context(name: str, facts: Iterable[Atom] = (), rules: Iterable[HornRule] = (),
                      ops: Iterable[str] = (), bridge_ops: Iterable[str] = ("add",),
                      import_domain: Iterable[str] | None = None,
                      equalities: Iterable[tuple[str, str]] = ()):
    from .kernel import ManagedContext

    ops = frozenset(canonical_op(o) for o in ops)
    unknown = (ops | set(bridge_ops)) - OPERATIONS
    if unknown:
        raise OperationError(f"unknown operations {sorted(unknown)}")
    kb = DeductiveKB.build(facts, rules, equalities)
    DEDUCTIVE.validate(kb)
    return ManagedContext(name, kb, DEDUCTIVE, ops, frozenset(bridge_ops),
                          None if import_domain is None else frozenset(import_domain))
