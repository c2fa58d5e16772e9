"""Active integrity constraints over multi-context systems, and their repairs.

An AIC pairs a denial body with a disjunction of update actions that may
restore it. Given an MCS ``m`` and a set ``eta`` of AICs this module computes
update-set consistency, variants ``U(m)``, weak and grounded repairs, repair
trees, a brute-force oracle, and a bounded checker for AIC validity.

Repair trees come in two flavours (``strategy``):

``"minimal"``
    a node ``n`` with violated instance ``r`` gets a child ``n | U`` for every
    subset-minimal ``U`` of ``head(r)`` that restores ``r``.
``"wellfounded"``
    a node gets a child ``n | {a}`` for every action ``a`` in the head of
    every violated instance. Every grounded repair is a leaf of this tree.

The minimal tree can miss grounded repairs when a violation has several
derivations and restoring it takes actions coming from different AICs;
:func:`enumerate_grounded_repairs` therefore uses the well-founded tree
unless told otherwise.
"""
from __future__ import annotations

import hashlib
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import (BoundExceeded, InconsistentUpdateSet, InvalidAction,
                     LogicallyInconsistent, NoAcceptedBeliefSet, OperationError,
                     UnsafeRuleError)
from .kernel import (MCS, BeliefState, _named, active_domain, compute_equilibrium,
                     literal_constants)
from .logic import (Atom, Formula, Literal, Neg, _unify, body_holds, is_local, is_var,
                    render_literal, solutions, unsafe_variables)

PERMUTATION_BOUND = 16
GROUNDED_BOUND = 16
ORACLE_BOUND = 16


@dataclass(frozen=True)
class UpdateAction:
    context: int
    op: str
    arg: Formula

    def __post_init__(self):
        if self.op == "assert":
            object.__setattr__(self, "op", "assertEqual")

    @property
    def ground(self) -> bool:
        return self.arg.ground

    def variables(self) -> set[str]:
        return self.arg.variables()

    def substitute(self, binding) -> "UpdateAction":
        return UpdateAction(self.context, self.op, self.arg.substitute(binding))

    def render(self, names=None) -> str:
        ctx = names[self.context] if names else str(self.context)
        return f"({ctx}: {self.op}({self.arg}))"

    def short(self, names=None, qualify: bool = False) -> str:
        text = f"{self.op} {self.arg}"
        if qualify:
            ctx = names[self.context] if names else str(self.context)
            return f"{ctx}:{text}"
        return text


def action_key(a: UpdateAction):
    return (a.context, str(a.arg), a.op)


def sorted_actions(u: Iterable[UpdateAction]) -> list[UpdateAction]:
    return sorted(u, key=action_key)


def repair_key(u: Iterable[UpdateAction]):
    acts = sorted_actions(u)
    return (len(acts), [action_key(a) for a in acts])


@dataclass(frozen=True)
class AIC:
    body: tuple[Literal, ...]
    head: tuple[UpdateAction, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "head", tuple(self.head))
        if not self.head:
            raise ValueError("an AIC needs at least one head action")
        head_vars = set().union(*(a.variables() for a in self.head))
        if any(is_local(v) for v in head_vars):
            raise UnsafeRuleError("local variables cannot occur in AIC heads")
        unsafe = unsafe_variables(self.body, head_vars)
        if unsafe:
            raise UnsafeRuleError(f"unsafe variables {sorted(unsafe)} in AIC {self.name}".rstrip())

    def variables(self) -> list[str]:
        out: set[str] = set()
        for lit in self.body:
            out |= lit.variables()
        for a in self.head:
            out |= a.variables()
        return sorted(v for v in out if not is_local(v))

    def constants(self) -> set[str]:
        out = literal_constants(self.body)
        for a in self.head:
            atom = a.arg.atom if isinstance(a.arg, Neg) else a.arg
            out.update(x for x in atom.args if not is_var(x))
        return out

    def render(self, names=None) -> str:
        body = ", ".join(render_literal(l, names) for l in self.body)
        head = " | ".join(a.render(names) for a in self.head)
        return f"{body} => {head}"


@dataclass(frozen=True)
class GroundAIC:
    """A ground instance of the AIC at position ``index`` of its set."""

    label: str
    index: int
    body: tuple[Literal, ...]
    head: frozenset[UpdateAction]

    def render(self, names=None) -> str:
        body = ", ".join(render_literal(l, names) for l in self.body)
        head = " | ".join(a.render(names) for a in sorted_actions(self.head))
        return f"{self.label}: {body} => {head}"


@dataclass(frozen=True)
class Problem:
    """An MCS together with the AICs it must satisfy."""

    mcs: MCS
    aics: tuple[AIC, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "aics", tuple(self.aics))
        check_aics(self.mcs, self.aics)


def aic_label(eta: Sequence[AIC], i: int) -> str:
    return eta[i].name or f"r{i + 1}"


def check_aics(m: MCS, eta: Iterable[AIC]) -> None:
    for r in eta:
        for lit in r.body:
            if not 1 <= lit.context <= len(m):
                raise ValueError(f"literal context {lit.context} out of range")
        for a in r.head:
            check_action(m, a)


def check_action(m: MCS, a: UpdateAction) -> None:
    if not 1 <= a.context <= len(m):
        raise InvalidAction(f"action context {a.context} out of range")
    ctx = m.context(a.context)
    if a.op not in ctx.op_names:
        raise InvalidAction(f"operation {a.op} is not available in context {ctx.name}")


def instantiate(eta: Sequence[AIC], i: int, binding) -> GroundAIC:
    r = eta[i]
    return GroundAIC(aic_label(eta, i), i,
                     tuple(l.substitute(binding) for l in r.body),
                     frozenset(a.substitute(binding) for a in r.head))


def aic_domain(m: MCS, eta: Iterable[AIC]) -> frozenset[str]:
    extra: set[str] = set()
    for r in eta:
        extra |= r.constants()
    return active_domain(m, extra)


def ground_aics(m: MCS, eta: Sequence[AIC], domain: Optional[Iterable[str]] = None) -> list[GroundAIC]:
    """All groundings of every AIC over the active domain."""
    eta = tuple(eta)
    dom = sorted(domain if domain is not None else aic_domain(m, eta))
    out = []
    for i, r in enumerate(eta):
        vs = r.variables()
        for values in itertools.product(dom, repeat=len(vs)):
            out.append(instantiate(eta, i, dict(zip(vs, values))))
    return out


def violated_instances(state: BeliefState, eta: Sequence[AIC], domain) -> frozenset[GroundAIC]:
    """Ground instances whose body holds in ``state``, found by joining the body."""
    out = set()
    for i, r in enumerate(eta):
        for b in solutions(r.body, state, domain=domain):
            b = _named(b)
            # joins return class representatives; equal constants match too
            options = [sorted({m for bs in state for m in bs.members(v)} & domain
                              or {v}) for v in b.values()]
            if all(len(o) == 1 for o in options):
                out.add(instantiate(eta, i, b))
                continue
            for values in itertools.product(*options):
                g = instantiate(eta, i, dict(zip(b, values)))
                if body_holds(g.body, state):
                    out.add(g)
    return frozenset(out)


def satisfies(m: MCS, r: Union[AIC, GroundAIC]) -> bool:
    """``m |= r``: the equilibrium falsifies the body of every instance of ``r``."""
    s = compute_equilibrium(m)
    if s is None:
        raise LogicallyInconsistent("no equilibrium")
    if isinstance(r, GroundAIC):
        return not body_holds(r.body, s)
    return next(solutions(r.body, s, domain=aic_domain(m, [r])), None) is None


# -- update sets ----------------------------------------------------------------

def partition(u: Iterable[UpdateAction]) -> dict[int, list[UpdateAction]]:
    out: dict[int, list[UpdateAction]] = {}
    for a in sorted_actions(u):
        out.setdefault(a.context, []).append(a)
    return out


_ERROR = object()


def _outcome(fn):
    try:
        return fn()
    except OperationError:
        return _ERROR


def _reachable(logic, kb, ops: frozenset, memo: dict) -> frozenset:
    """Outcomes of applying ``ops`` one at a time in every order.

    Built from the outcomes of all one-smaller subsets, so the cost is
    ``n * 2**n`` applications instead of ``n!`` sequences.
    """
    got = memo.get(ops)
    if got is not None:
        return got
    if not ops:
        got = frozenset([kb])
    else:
        out = set()
        for op in ops:
            for prev in _reachable(logic, kb, ops - {op}, memo):
                out.add(prev if prev is _ERROR
                        else _outcome(lambda prev=prev: logic.apply(prev, *op)))
        got = frozenset(out)
    memo[ops] = got
    return got


def permutation_consistent(m: MCS, u: Iterable[UpdateAction],
                           bound: int = PERMUTATION_BOUND,
                           memo: Optional[dict] = None) -> bool:
    """Every order of each ``U_i`` gives the one-shot result.

    ``memo`` may be shared between calls on the same MCS; it maps a base kb
    to the outcomes already computed from it.
    """
    memo = {} if memo is None else memo
    for i, acts in partition(u).items():
        if len(acts) > bound:
            raise BoundExceeded(f"permutation check bound exceeded ({len(acts)} > {bound})")
        ctx = m.context(i)
        logic = ctx.logic
        ops = [(a.op, a.arg) for a in acts]
        target = _outcome(lambda: logic.manage(ops, ctx.kb))
        per_kb = memo.setdefault((i, ctx.kb), {})
        if _reachable(logic, ctx.kb, frozenset(ops), per_kb) != {target}:
            return False
    return True


def is_consistent_update_set(m: MCS, u: Iterable[UpdateAction],
                             bound: int = PERMUTATION_BOUND,
                             memo: Optional[dict] = None) -> bool:
    """Permutation independence of every per-context part of ``u``.

    Sets made only of ``add``/``del`` are decided directly: they are
    order-independent exactly when no atom is both added and deleted.
    """
    u = list(u)
    for a in u:
        check_action(m, a)
    for i, acts in partition(u).items():
        ctx = m.context(i)
        if all(ctx.logic.is_primitive(a.op) for a in acts):
            added = {ctx.logic.canon_atom(ctx.kb, a.arg) for a in acts if a.op == "add"}
            deleted = {ctx.logic.canon_atom(ctx.kb, a.arg) for a in acts if a.op == "del"}
            if added & deleted:
                return False
        elif not permutation_consistent(m, acts, bound, memo):
            return False
    return True


def apply_update_set(m: MCS, u: Iterable[UpdateAction]) -> MCS:
    """``U(m)``: each ``U_i`` applied to ``kb_i`` through its management function."""
    u = frozenset(u)
    if not u:
        return m
    if not is_consistent_update_set(m, u):
        raise InconsistentUpdateSet("update set is not permutation independent")
    kbs = [c.kb for c in m.contexts]
    for i, acts in partition(u).items():
        ctx = m.context(i)
        kbs[i - 1] = ctx.logic.manage([(a.op, a.arg) for a in acts], ctx.kb)
    return m.with_kbs(kbs)


# -- evaluation of variants -------------------------------------------------------

OK = "ok"
UPDATE_INCONSISTENT = "update-inconsistent"
UNDEFINED = "undefined"
NO_EQUILIBRIUM = "no-equilibrium"


@dataclass
class Variant:
    actions: frozenset[UpdateAction]
    status: str
    mcs: Optional[MCS] = None
    state: Optional[BeliefState] = None
    violated: Optional[frozenset[GroundAIC]] = None

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass
class TreeNode:
    actions: frozenset[UpdateAction]
    id: str
    depth: int
    logically_inconsistent: bool = False
    update_inconsistent: bool = False
    leaf: bool = True
    weak_repair: bool = False
    grounded_repair: bool = False

    @property
    def consistent(self) -> bool:
        return not (self.logically_inconsistent or self.update_inconsistent)

    def flags(self) -> dict[str, bool]:
        return {"consistent": self.consistent,
                "logically_inconsistent": self.logically_inconsistent,
                "update_inconsistent": self.update_inconsistent,
                "leaf": self.leaf,
                "weak_repair": self.weak_repair,
                "grounded_repair": self.grounded_repair}


@dataclass(frozen=True)
class TreeEdge:
    source: frozenset[UpdateAction]
    target: frozenset[UpdateAction]
    rule: GroundAIC

    @property
    def label(self) -> str:
        return self.rule.label


@dataclass
class RepairTree:
    """Repair tree stored as a DAG: equal action sets share one node."""

    mcs: MCS
    strategy: str
    nodes: dict[frozenset, TreeNode] = field(default_factory=dict)
    edges: list[TreeEdge] = field(default_factory=list)

    @property
    def root(self) -> TreeNode:
        return self.nodes[frozenset()]

    def children(self, node: Union[TreeNode, frozenset]) -> list[TreeNode]:
        key = node.actions if isinstance(node, TreeNode) else node
        return [self.nodes[e.target] for e in self.edges if e.source == key]

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.leaf]

    def weak_repairs(self) -> list[frozenset[UpdateAction]]:
        return sorted((n.actions for n in self.nodes.values() if n.weak_repair), key=repair_key)

    def grounded_repairs(self) -> list[frozenset[UpdateAction]]:
        return sorted((n.actions for n in self.nodes.values() if n.grounded_repair),
                      key=repair_key)


def node_id(actions: Iterable[UpdateAction], names=None) -> str:
    text = "\n".join(a.render(names) for a in sorted_actions(actions))
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]


class RepairSession:
    """Cached evaluation of variants of one ``(m, eta)`` pair.

    ``grounding="join"`` finds violated instances by joining AIC bodies with
    the equilibrium; ``grounding="brute"`` tests every ground instance over
    the active domain. Both must agree; the oracle uses the latter.
    """

    def __init__(self, m: MCS, eta: Iterable[AIC], grounding: str = "join",
                 perm_bound: int = PERMUTATION_BOUND):
        if grounding not in ("join", "brute"):
            raise ValueError(grounding)
        self.m = m
        self.eta = tuple(eta)
        check_aics(m, self.eta)
        self.grounding = grounding
        self.perm_bound = perm_bound
        self.names = m.names
        self.domain = aic_domain(m, self.eta)
        self._variants: dict[frozenset, Variant] = {}
        self._instances: Optional[list[GroundAIC]] = None
        self._universe: Optional[frozenset[UpdateAction]] = None
        self._text: dict[GroundAIC, str] = {}
        self._inert: dict[UpdateAction, bool] = {}
        self._reach: dict = {}
        self._merging = {a.context for r in self.eta for a in r.head if a.op == "assertEqual"}

    # -- basic evaluation

    def instances(self) -> list[GroundAIC]:
        if self._instances is None:
            self._instances = ground_aics(self.m, self.eta, self.domain)
        return self._instances

    def head_universe(self) -> frozenset[UpdateAction]:
        """Every ground action in the head of some ground instance."""
        if self._universe is None:
            self._universe = frozenset(a for g in self.instances() for a in g.head)
        return self._universe

    def in_head_universe(self, a: UpdateAction) -> bool:
        """Whether ``a`` is a ground instance of some head action template."""
        if self._universe is not None:
            return a in self._universe
        target = a.arg.atom if isinstance(a.arg, Neg) else a.arg
        for r in self.eta:
            for t in r.head:
                if (t.context, t.op, isinstance(t.arg, Neg)) != (a.context, a.op, isinstance(a.arg, Neg)):
                    continue
                pattern = t.arg.atom if isinstance(t.arg, Neg) else t.arg
                candidates = [target]
                if target.is_equality:
                    candidates.append(Atom(target.pred, target.args[::-1]))
                for cand in candidates:
                    b = _unify(pattern, cand, {})
                    if b is not None and all(x in self.domain for x in b.values()):
                        return True
        return False

    def inert(self, a: UpdateAction) -> bool:
        """Whether ``a`` can never change a kb; such actions are in no grounded repair."""
        v = self._inert.get(a)
        if v is None:
            ctx = self.m.context(a.context)
            test = getattr(ctx.logic, "inert", None)
            trivial = a.op == "assertEqual" and len(set(getattr(a.arg, "args", ()))) == 1
            v = ((trivial or a.context not in self._merging) and test is not None
                 and test(ctx.kb, a.op, a.arg))
            self._inert[a] = v
        return v

    def text(self, r: GroundAIC) -> str:
        t = self._text.get(r)
        if t is None:
            t = self._text[r] = r.render(self.names)
        return t

    def violated(self, state: BeliefState) -> frozenset[GroundAIC]:
        if self.grounding == "join":
            return violated_instances(state, self.eta, self.domain)
        return frozenset(g for g in self.instances() if body_holds(g.body, state))

    def variant(self, u: Iterable[UpdateAction]) -> Variant:
        u = frozenset(u)
        v = self._variants.get(u)
        if v is None:
            v = self._variants[u] = self._evaluate(u)
        return v

    def _evaluate(self, u: frozenset) -> Variant:
        if not is_consistent_update_set(self.m, u, self.perm_bound, self._reach):
            return Variant(u, UPDATE_INCONSISTENT)
        try:
            mm = apply_update_set(self.m, u)
        except OperationError:
            return Variant(u, UNDEFINED)
        state = compute_equilibrium(mm)
        if state is None:
            return Variant(u, NO_EQUILIBRIUM, mm)
        return Variant(u, OK, mm, state, self.violated(state))

    def satisfies(self, u: Iterable[UpdateAction], r: GroundAIC) -> bool:
        v = self.variant(u)
        if not v.ok:
            raise LogicallyInconsistent(f"variant is {v.status}")
        return r not in v.violated

    # -- repairs

    def is_weak_repair(self, u: Iterable[UpdateAction]) -> bool:
        v = self.variant(u)
        return v.ok and not v.violated

    def is_grounded_repair(self, u: Iterable[UpdateAction], bound: int = GROUNDED_BOUND) -> bool:
        """Weak repair whose every proper subset leaves a violation the rest can address.

        A subset whose variant has no equilibrium satisfies no instance, so any
        instance with a head action among the remaining ones serves.
        """
        u = frozenset(u)
        if not self.is_weak_repair(u):
            return False
        if len(u) > bound:
            raise BoundExceeded(f"grounded check bound exceeded ({len(u)} > {bound})")
        acts = sorted_actions(u)
        for size in range(len(acts)):
            for combo in itertools.combinations(acts, size):
                sub = frozenset(combo)
                rest = u - sub
                v = self.variant(sub)
                if v.ok:
                    supported = any(r.head & rest for r in v.violated)
                else:
                    supported = any(self.in_head_universe(a) for a in rest)
                if not supported:
                    return False
        return True

    # -- repair tree

    def _resolves(self, u: frozenset, r: GroundAIC) -> bool:
        v = self.variant(u)
        return not v.ok or r not in v.violated

    def _expansions(self, n: frozenset, r: GroundAIC, strategy: str) -> list[frozenset]:
        avail = sorted_actions(r.head - n)
        if strategy == "wellfounded":
            return [frozenset([a]) for a in avail if not self.inert(a)]
        found: list[frozenset] = []
        for size in range(1, len(avail) + 1):
            for combo in itertools.combinations(avail, size):
                cand = frozenset(combo)
                if any(f <= cand for f in found):
                    continue
                if self._resolves(n | cand, r):
                    found.append(cand)
        return found

    def _node(self, actions: frozenset, parent: Optional[frozenset], depth: int) -> TreeNode:
        v = self.variant(actions)
        node = TreeNode(actions, node_id(actions, self.names), depth)
        node.update_inconsistent = v.status == UPDATE_INCONSISTENT
        node.logically_inconsistent = v.status in (UNDEFINED, NO_EQUILIBRIUM)
        if parent is not None and node.consistent:
            pv = self.variant(parent)
            if not is_consistent_update_set(pv.mcs, actions - parent, self.perm_bound,
                                            self._reach):
                node.update_inconsistent = True
        return node

    def build_tree(self, strategy: str = "minimal", check_grounded: bool = True) -> RepairTree:
        if strategy not in ("minimal", "wellfounded"):
            raise ValueError(f"unknown strategy {strategy}")
        tree = RepairTree(self.m, strategy)
        root = frozenset()
        tree.nodes[root] = self._node(root, None, 0)
        seen_edges: set[tuple] = set()
        queue = deque([root])
        while queue:
            n = queue.popleft()
            node = tree.nodes[n]
            if not node.consistent:
                continue
            for r in sorted(self.variant(n).violated, key=self.text):
                for extra in self._expansions(n, r, strategy):
                    child = n | extra
                    node.leaf = False
                    if (n, child) not in seen_edges:
                        seen_edges.add((n, child))
                        tree.edges.append(TreeEdge(n, child, r))
                    if child not in tree.nodes:
                        tree.nodes[child] = self._node(child, n, node.depth + 1)
                        queue.append(child)
        for node in tree.nodes.values():
            if node.leaf and node.consistent and self.is_weak_repair(node.actions):
                node.weak_repair = True
                if check_grounded:
                    node.grounded_repair = self.is_grounded_repair(node.actions)
        return tree

    def grounded_repairs(self, strategy: str = "wellfounded") -> list[frozenset[UpdateAction]]:
        return self.build_tree(strategy).grounded_repairs()

    # -- oracle

    def relevant_universe(self, bound: int = ORACLE_BOUND) -> frozenset[UpdateAction]:
        """Least action set closed under heads of instances violated by its subsets.

        Every grounded repair lies inside it: for a grounded ``U`` and
        ``V = U & A`` the instance supporting ``U - V`` has its head in ``A``.
        Inert actions are left out. Falls back to all non-inert head actions
        when some subset is not ok, where that argument breaks down.
        """
        fallback = frozenset(a for a in self.head_universe() if not self.inert(a))
        root = self.variant(frozenset())
        if not root.ok:
            return fallback
        acts = frozenset(a for r in root.violated for a in r.head if not self.inert(a))
        while True:
            if len(acts) > bound:
                raise BoundExceeded(f"oracle universe exceeds {bound} actions")
            grown = set(acts)
            ordered = sorted_actions(acts)
            for size in range(len(ordered) + 1):
                for combo in itertools.combinations(ordered, size):
                    v = self.variant(frozenset(combo))
                    if not v.ok:
                        return fallback
                    for r in v.violated:
                        grown |= {a for a in r.head if not self.inert(a)}
            if grown == acts:
                return acts
            acts = frozenset(grown)

    def oracle(self, bound: int = ORACLE_BOUND, universe: str = "auto") -> list[frozenset[UpdateAction]]:
        """Grounded repairs by exhaustive search over subsets of an action universe.

        ``universe="full"`` searches every ground head action; ``"relevant"``
        (also the ``"auto"`` default) searches :meth:`relevant_universe`.
        """
        if universe == "full":
            pool = self.head_universe()
        elif universe in ("auto", "relevant"):
            pool = self.relevant_universe(bound)
        else:
            raise ValueError(f"unknown universe {universe}")
        if len(pool) > bound:
            raise BoundExceeded(f"oracle universe has {len(pool)} > {bound} actions")
        ordered = sorted_actions(pool)
        out = []
        for size in range(len(ordered) + 1):
            for combo in itertools.combinations(ordered, size):
                if self.is_grounded_repair(frozenset(combo)):
                    out.append(frozenset(combo))
        return sorted(out, key=repair_key)


# -- module-level entry points ------------------------------------------------------

def is_weak_repair(m: MCS, eta: Iterable[AIC], u: Iterable[UpdateAction]) -> bool:
    return RepairSession(m, eta).is_weak_repair(u)


def is_grounded_repair(m: MCS, eta: Iterable[AIC], u: Iterable[UpdateAction],
                       bound: int = GROUNDED_BOUND) -> bool:
    return RepairSession(m, eta).is_grounded_repair(u, bound)


def build_repair_tree(m: MCS, eta: Iterable[AIC], strategy: str = "minimal") -> RepairTree:
    return RepairSession(m, eta).build_tree(strategy)


def enumerate_grounded_repairs(m: MCS, eta: Iterable[AIC],
                               strategy: str = "wellfounded") -> list[frozenset[UpdateAction]]:
    """Leaves of the repair tree that pass the grounded-repair test."""
    return RepairSession(m, eta).grounded_repairs(strategy)


def oracle_grounded_repairs(m: MCS, eta: Iterable[AIC], bound: int = ORACLE_BOUND,
                            universe: str = "auto") -> list[frozenset[UpdateAction]]:
    return RepairSession(m, eta, grounding="brute").oracle(bound, universe)


# -- bounded validity -------------------------------------------------------------

VALID = "valid"
COUNTEREXAMPLE_1 = "counterexample-condition1"
COUNTEREXAMPLE_2 = "counterexample-condition2"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ValidityReport:
    verdict: str
    exhaustive: bool
    variants: int
    variant: Optional[frozenset[UpdateAction]] = None
    action: Optional[UpdateAction] = None
    witnesses: tuple[tuple[UpdateAction, frozenset[UpdateAction]], ...] = ()


def _toggles(m: MCS, atom_universe) -> list[UpdateAction]:
    out = []
    for item in atom_universe:
        if isinstance(item, tuple):
            targets, atom = [item[0]], item[1]
        else:
            atom = item
            targets = [i for i, c in enumerate(m.contexts, 1)
                       if {"add", "del"} <= c.op_names]
        for i in targets:
            ctx = m.context(i)
            present = ctx.logic.canon_atom(ctx.kb, atom) in ctx.kb.facts
            out.append(UpdateAction(i, "del" if present else "add", atom))
    return sorted_actions(set(out))


def bounded_validity_check(m: MCS, r: AIC, atom_universe: Iterable, bound: int) -> ValidityReport:
    """Check both validity conditions of ``r`` on variants of ``m`` within a bound.

    Variants are ``T(m)`` for every set ``T`` of at most ``bound`` toggles of
    atoms in ``atom_universe`` (an atom, or a ``(context, atom)`` pair).
    Condition 1: each logically consistent variant violating ``r`` is repaired
    by some subset of the head actions of its violated instances.
    Condition 2: each head action of ``r`` has a ground instance that repairs
    some violating variant on its own. A missing condition-2 witness is a
    counterexample only when the enumeration covered every variant over the
    universe.
    """
    toggles = _toggles(m, list(atom_universe))
    exhaustive = bound >= len(toggles)
    extra = {c for t in toggles for c in t.arg.args}
    dom = sorted(aic_domain(m, [r]) | extra)
    vs = r.variables()
    instances = []
    for values in itertools.product(dom, repeat=len(vs)):
        b = dict(zip(vs, values))
        instances.append((instantiate([r], 0, b), tuple(a.substitute(b) for a in r.head)))

    def violated(mm: MCS) -> Optional[list]:
        s = compute_equilibrium(mm)
        if s is None:
            return None
        return [(g, acts) for g, acts in instances if body_holds(g.body, s)]

    def repairs(mm: MCS, acts) -> bool:
        try:
            fixed = apply_update_set(mm, acts)
        except (OperationError, InconsistentUpdateSet):
            return False
        return violated(fixed) == []

    variants = []
    for size in range(min(bound, len(toggles)) + 1):
        for combo in itertools.combinations(toggles, size):
            variants.append(frozenset(combo))
    witnesses: dict[int, tuple[UpdateAction, frozenset]] = {}
    for t in variants:
        mm = apply_update_set(m, t)
        bad = violated(mm)
        if not bad:
            continue
        local_heads = sorted_actions({a for g, _ in bad for a in g.head})
        if not any(repairs(mm, combo)
                   for size in range(1, len(local_heads) + 1)
                   for combo in itertools.combinations(local_heads, size)):
            return ValidityReport(COUNTEREXAMPLE_1, exhaustive, len(variants), variant=t)
        for j in range(len(r.head)):
            if j in witnesses:
                continue
            for a in sorted_actions({acts[j] for _, acts in bad}):
                if repairs(mm, [a]):
                    witnesses[j] = (a, t)
                    break
    found = tuple(witnesses[j] for j in sorted(witnesses))
    for j, a in enumerate(r.head):
        if j not in witnesses:
            verdict = COUNTEREXAMPLE_2 if exhaustive else INCONCLUSIVE
            return ValidityReport(verdict, exhaustive, len(variants), action=a, witnesses=found)
    return ValidityReport(VALID, exhaustive, len(variants), witnesses=found)
