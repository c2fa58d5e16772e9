"""Encodings of ontologies and databases as managed multi-context systems.

An ontology becomes two deductive contexts: ``T`` (context 1) holds the
T-Box compiled to Horn rules and accepts no update actions; ``A`` (context 2)
holds the A-Box facts and offers the configured operations. Bridge rules port
every concept and role instance, and every equality, from ``A`` into ``T``.

A database becomes a single deductive context without rules whose
operations ``add`` and ``del`` play the roles of ``+`` and ``-``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .aic import AIC, Problem, UpdateAction
from .deductive import DISTINCT, HornRule, deductive_context, rule
from .errors import MCSError
from .kernel import MCS, BridgeRule
from .logic import Atom, Lit, eq_atom

T_CTX = 1
A_CTX = 2


class AxiomError(MCSError):
    """A T-Box axiom outside the supported Horn fragment."""


@dataclass(frozen=True)
class Some:
    """The concept ``∃R``, materialized as the derived concept ``exists_R``."""

    role: str

    @property
    def name(self) -> str:
        return f"exists_{self.role}"

    def __str__(self) -> str:
        return f"∃{self.role}"


Concept = Union[str, Some]


@dataclass(frozen=True)
class Inclusion:
    """``sub ⊑ sup``; with ``arity=2`` a role inclusion."""

    sub: str
    sup: Concept
    arity: int = 1

    def __str__(self) -> str:
        return f"{self.sub} ⊑ {self.sup}"


@dataclass(frozen=True)
class ExistsInclusion:
    """``∃R.C ⊑ sup``, or ``∃Rᴿ.C ⊑ sup`` when ``inverse``; no filler means ``∃R.⊤``."""

    role: str
    sup: Concept
    filler: Optional[str] = None
    inverse: bool = False

    def __str__(self) -> str:
        r = self.role + ("ᴿ" if self.inverse else "")
        f = f".{self.filler}" if self.filler else ""
        return f"∃{r}{f} ⊑ {self.sup}"


@dataclass(frozen=True)
class ConjunctionInclusion:
    parts: tuple[str, ...]
    sup: Concept

    def __str__(self) -> str:
        return f"{' ⊓ '.join(self.parts)} ⊑ {self.sup}"


TBoxAxiom = Union[Inclusion, ExistsInclusion, ConjunctionInclusion]


def _name_ok(name) -> bool:
    return isinstance(name, str) and bool(name) and not name.startswith("exists_")


def _head(sup: Concept, var: str, axiom) -> Atom:
    if isinstance(sup, Some):
        if not _name_ok(sup.role):
            raise AxiomError(f"unsupported axiom shape: {axiom}")
        return Atom(sup.name, (var,))
    if not _name_ok(sup):
        raise AxiomError(f"unsupported axiom shape: {axiom}")
    return Atom(sup, (var,))


def compile_tbox_axiom(axiom: TBoxAxiom) -> list[HornRule]:
    """Horn rules for one axiom. ``∃R`` heads become ``exists_R`` atoms."""
    if isinstance(axiom, Inclusion):
        if not _name_ok(axiom.sub):
            raise AxiomError(f"unsupported axiom shape: {axiom}")
        if axiom.arity == 1:
            return [rule(_head(axiom.sup, "X", axiom), Atom(axiom.sub, ("X",)))]
        if axiom.arity == 2 and _name_ok(axiom.sup):
            return [rule(Atom(axiom.sup, ("X", "Y")), Atom(axiom.sub, ("X", "Y")))]
        raise AxiomError(f"unsupported axiom shape: {axiom}")
    if isinstance(axiom, ExistsInclusion):
        if not _name_ok(axiom.role) or (axiom.filler is not None and not _name_ok(axiom.filler)):
            raise AxiomError(f"unsupported axiom shape: {axiom}")
        subj, obj = ("Y", "X") if axiom.inverse else ("X", "Y")
        body = [Atom(axiom.role, ("X", "Y"))]
        if axiom.filler is not None:
            body.append(Atom(axiom.filler, (obj,)))
        return [rule(_head(axiom.sup, subj, axiom), *body)]
    if isinstance(axiom, ConjunctionInclusion):
        if not axiom.parts or not all(_name_ok(p) for p in axiom.parts):
            raise AxiomError(f"unsupported axiom shape: {axiom}")
        return [rule(_head(axiom.sup, "X", axiom), *(Atom(p, ("X",)) for p in axiom.parts))]
    raise AxiomError(f"unsupported axiom shape: {axiom!r}")


def compile_tbox(axioms: Iterable[TBoxAxiom]) -> list[HornRule]:
    """Rules for all axioms plus ``exists_R(X) :- R(X, Y)`` for every ``∃R`` used."""
    out: list[HornRule] = []
    roles: list[str] = []
    for ax in axioms:
        out.extend(compile_tbox_axiom(ax))
        sup = ax.sup
        if isinstance(sup, Some) and sup.role not in roles:
            roles.append(sup.role)
    for r in roles:
        out.append(rule(Atom(f"exists_{r}", ("X",)), Atom(r, ("X", "Y"))))
    return list(dict.fromkeys(out))


def signature(axioms: Iterable[TBoxAxiom], facts: Iterable[Atom] = ()) -> dict[str, int]:
    """Atomic concept and role names with their arities."""
    sig: dict[str, int] = {}

    def note(name: str, arity: int, where) -> None:
        if sig.setdefault(name, arity) != arity:
            raise AxiomError(f"{name} used with arities {sig[name]} and {arity} ({where})")

    for ax in axioms:
        if isinstance(ax, Inclusion):
            note(ax.sub, ax.arity, ax)
            if isinstance(ax.sup, Some):
                note(ax.sup.role, 2, ax)
            else:
                note(ax.sup, ax.arity, ax)
        elif isinstance(ax, ExistsInclusion):
            note(ax.role, 2, ax)
            if ax.filler:
                note(ax.filler, 1, ax)
        elif isinstance(ax, ConjunctionInclusion):
            for p in ax.parts:
                note(p, 1, ax)
        if isinstance(ax, (ExistsInclusion, ConjunctionInclusion)):
            if isinstance(ax.sup, Some):
                note(ax.sup.role, 2, ax)
            else:
                note(ax.sup, 1, ax)
    for f in facts:
        if f.pred != DISTINCT:
            note(f.pred, f.arity, f)
    return sig


@dataclass(frozen=True)
class OntologyFixture:
    tbox: tuple[TBoxAxiom, ...] = ()
    abox: frozenset[Atom] = frozenset()
    ops: tuple[str, ...] = ("add", "del")
    aics: tuple[AIC, ...] = ()
    equalities: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tbox", tuple(self.tbox))
        object.__setattr__(self, "abox", frozenset(self.abox))
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "aics", tuple(self.aics))
        for f in self.abox:
            if not f.ground or f.is_equality or f.pred.startswith("exists_"):
                raise AxiomError(f"A-Box may only hold atomic instances: {f}")
            if f.pred != DISTINCT and f.arity not in (1, 2):
                raise AxiomError(f"A-Box may only hold atomic instances: {f}")


def porting_rules(sig: dict[str, int]) -> list[BridgeRule]:
    """``(T: add(P(X..))) <- (A: P(X..))`` per name, plus equality porting."""
    out = []
    for name in sorted(sig):
        args = ("X",) if sig[name] == 1 else ("X", "Y")
        out.append(BridgeRule(T_CTX, "add", Atom(name, args), (Lit(A_CTX, Atom(name, args)),)))
    eq = eq_atom("X", "Y")
    out.append(BridgeRule(T_CTX, "assertEqual", eq, (Lit(A_CTX, eq),)))
    return out


def encode_ontology(f: OntologyFixture) -> MCS:
    rules = compile_tbox(f.tbox)
    sig = signature(f.tbox, f.abox)
    t = deductive_context("T", (), rules, ops=(), bridge_ops=("add", "assertEqual"))
    a = deductive_context("A", f.abox, (), ops=f.ops, equalities=f.equalities)
    return MCS((t, a), porting_rules(sig))


def ontology_problem(f: OntologyFixture) -> Problem:
    return Problem(encode_ontology(f), f.aics)


# -- databases ----------------------------------------------------------------

DB_OPS = {"+": "add", "-": "del"}


@dataclass(frozen=True)
class DatabaseAIC:
    """``p1, ..., not q1, ... => +q1 | -p1 | ...`` over a plain database.

    ``body`` holds ``(atom, positive)`` pairs and ``head`` holds
    ``(sign, atom)`` pairs. Only body atoms may be updated: ``-`` positive
    ones, ``+`` negated ones.
    """

    body: tuple[tuple[Atom, bool], ...]
    head: tuple[tuple[str, Atom], ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "head", tuple(self.head))
        for sign, atom in self.head:
            if sign not in DB_OPS:
                raise ValueError(f"unknown database action {sign}{atom}")
            if (atom, sign == "-") not in self.body:
                raise ValueError(f"action {sign}{atom} does not update a body literal")

    def to_aic(self, context: int = 1) -> AIC:
        return AIC(tuple(Lit(context, a, pos) for a, pos in self.body),
                   tuple(UpdateAction(context, DB_OPS[s], a) for s, a in self.head),
                   self.name)


def encode_database(facts: Iterable[Atom], aics: Sequence[DatabaseAIC] = (),
                    name: str = "db") -> Problem:
    """``M(DB)``: one rule-free context over the facts, AICs translated literally."""
    ctx = deductive_context(name, facts, (), ops=("add", "del"))
    return Problem(MCS((ctx,)), tuple(r.to_aic(1) for r in aics))


# -- LUBM fragment ------------------------------------------------------------

LUBM_TBOX: tuple[TBoxAxiom, ...] = (
    Inclusion("gradStudent", "student"),
    Inclusion("webEnrolled", "enrolled", arity=2),
    ExistsInclusion("enrolled", "class", filler="student"),
    ExistsInclusion("hasEmail", "student", filler="email"),
    ExistsInclusion("webEnrolled", Some("hasEmail"), filler="class", inverse=True),
)


def lubm_abox(n_classes: int = 2, n_students: int = 12) -> frozenset[Atom]:
    """A synthetic A-Box: students spread round-robin over classes.

    Every fourth student is a graduate student and every even one has an
    asserted e-mail address.
    """
    facts: set[Atom] = set()
    classes = [f"c{i}" for i in range(1, n_classes + 1)]
    for c in classes:
        facts.add(Atom("class", (c,)))
    for i in range(1, n_students + 1):
        s = f"s{i}"
        facts.add(Atom("gradStudent" if i % 4 == 0 else "student", (s,)))
        if classes:
            facts.add(Atom("enrolled", (classes[(i - 1) % n_classes], s)))
        if i % 2 == 0:
            facts.add(Atom("hasEmail", (s, f"e{i}")))
            facts.add(Atom("email", (f"e{i}",)))
    return frozenset(facts)
