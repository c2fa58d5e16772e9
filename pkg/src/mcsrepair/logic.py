"""Terms, atoms, query literals, belief sets and body matching.

Terms are plain interned strings. A term is a variable when it starts with an
uppercase letter or an underscore; everything else is a constant. Variables
starting with ``_`` are local to the literal they occur in: inside a negated
literal they are read existentially (``not (T: hasEmail(X, _))``).
"""
from __future__ import annotations

import sys
from itertools import product
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

EQ = "="


def is_var(term: str) -> bool:
    return term[0].isupper() or term[0] == "_"


def is_local(term: str) -> bool:
    return term[0] == "_"


def intern(name: str) -> str:
    return sys.intern(name)


@dataclass(frozen=True, order=True)
class Atom:
    pred: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pred", intern(self.pred))
        object.__setattr__(self, "args", tuple(intern(a) for a in self.args))

    def __str__(self) -> str:
        if self.pred == EQ:
            return f"{self.args[0]} = {self.args[1]}"
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(self.args)})"

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_equality(self) -> bool:
        return self.pred == EQ

    @property
    def ground(self) -> bool:
        return not any(is_var(a) for a in self.args)

    def variables(self) -> set[str]:
        return {a for a in self.args if is_var(a)}

    def substitute(self, binding: Mapping[str, str]) -> "Atom":
        if not binding:
            return self
        args = tuple(binding.get(a, a) for a in self.args)
        if self.pred == EQ:
            return eq_atom(*args)
        return Atom(self.pred, args)


def eq_atom(left: str, right: str) -> Atom:
    """Equality atom; ground equalities are stored with sorted sides."""
    if not is_var(left) and not is_var(right) and right < left:
        left, right = right, left
    return Atom(EQ, (left, right))


@dataclass(frozen=True, order=True)
class Neg:
    """Negated formula, used as the argument of some compound operations."""

    atom: Atom

    def __str__(self) -> str:
        return f"not {self.atom}"

    @property
    def ground(self) -> bool:
        return self.atom.ground

    def variables(self) -> set[str]:
        return self.atom.variables()

    def substitute(self, binding: Mapping[str, str]) -> "Neg":
        return Neg(self.atom.substitute(binding))


Formula = Union[Atom, Neg]


@dataclass(frozen=True, order=True)
class Lit:
    """Context-qualified atom (or equality), possibly negated."""

    context: int
    atom: Atom
    positive: bool = True

    def variables(self) -> set[str]:
        return self.atom.variables()

    def substitute(self, binding: Mapping[str, str]) -> "Lit":
        return Lit(self.context, self.atom.substitute(binding), self.positive)


@dataclass(frozen=True, order=True)
class CountLit:
    """``(ctx: (<= bound role)(subject))``: at most ``bound`` role-successors."""

    context: int
    bound: int
    role: str
    subject: str
    positive: bool = True

    def variables(self) -> set[str]:
        return {self.subject} if is_var(self.subject) else set()

    def substitute(self, binding: Mapping[str, str]) -> "CountLit":
        return CountLit(self.context, self.bound, self.role,
                        binding.get(self.subject, self.subject), self.positive)


Literal = Union[Lit, CountLit]


def positive_atom_lits(body: Iterable[Literal]) -> list[Lit]:
    return [l for l in body
            if isinstance(l, Lit) and l.positive and not l.atom.is_equality]


def bound_variables(body: Iterable[Literal]) -> set[str]:
    """Variables bound by the positive literals of ``body``.

    Positive equalities and counts bind their variables too; they range over
    the active domain.
    """
    out: set[str] = set()
    for lit in body:
        if lit.positive:
            out |= lit.variables()
    return out


def unsafe_variables(body: Iterable[Literal], extra: Iterable[str] = ()) -> set[str]:
    """Named variables in negated literals or ``extra`` that no positive literal binds."""
    body = list(body)
    needed = set(extra)
    for lit in body:
        if not lit.positive:
            needed |= lit.variables()
    return {v for v in needed if not is_local(v)} - bound_variables(body)


@dataclass(frozen=True)
class BeliefSet:
    """Ground atoms plus an equality relation over constants.

    ``aliases`` maps every non-representative constant to the representative
    (lexicographically least member) of its class. Atoms are stored in
    canonical form; membership queries canonicalize first, so the set behaves
    as if it were closed under replacing equals by equals.
    """

    atoms: frozenset[Atom] = frozenset()
    aliases: frozenset[tuple[str, str]] = frozenset()
    _rep: dict = field(default=None, compare=False, hash=False, repr=False)
    _index: dict = field(default=None, compare=False, hash=False, repr=False)
    _classes: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        rep = dict(self.aliases)
        classes: dict[str, list[str]] = {}
        for member, r in rep.items():
            classes.setdefault(r, [r]).append(member)
        index: dict[str, list[Atom]] = {}
        for atom in self.atoms:
            index.setdefault(atom.pred, []).append(atom)
        object.__setattr__(self, "_rep", rep)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_classes", {r: sorted(ms) for r, ms in classes.items()})

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(sorted(self.atoms))

    def __contains__(self, atom: Atom) -> bool:
        return self.holds(atom)

    def canon(self, constant: str) -> str:
        return self._rep.get(constant, constant)

    def canon_atom(self, atom: Atom) -> Atom:
        if not self._rep:
            return atom
        return atom.substitute(self._rep)

    def members(self, constant: str) -> list[str]:
        r = self.canon(constant)
        return self._classes.get(r, [r])

    def equal(self, a: str, b: str) -> bool:
        return self.canon(a) == self.canon(b)

    def holds(self, atom: Atom) -> bool:
        if atom.is_equality:
            return self.equal(*atom.args)
        return self.canon_atom(atom) in self.atoms

    def by_pred(self, pred: str) -> list[Atom]:
        return self._index.get(pred, [])

    def count(self, role: str, subject: str) -> int:
        """Number of distinct equality classes ``y`` with ``role(subject, y)``."""
        s = self.canon(subject)
        return len({a.args[1] for a in self.by_pred(role)
                    if len(a.args) == 2 and a.args[0] == s})

    def constants(self) -> set[str]:
        out = {c for a in self.atoms for c in a.args}
        out.update(c for pair in self.aliases for c in pair)
        return out

    def equalities(self) -> list[tuple[str, str]]:
        return sorted(self.aliases)


def _unify(pattern: Atom, atom: Atom, binding: dict) -> Optional[dict]:
    if len(pattern.args) != len(atom.args):
        return None
    out = binding
    for p, a in zip(pattern.args, atom.args):
        if is_var(p):
            v = out.get(p)
            if v is None:
                if out is binding:
                    out = dict(binding)
                out[p] = a
            elif v != a:
                return None
        elif p != a:
            return None
    return out


def _canon_pattern(atom: Atom, bs: BeliefSet, binding: Mapping[str, str]) -> Atom:
    args = []
    for a in atom.args:
        if is_var(a):
            v = binding.get(a)
            args.append(a if v is None else bs.canon(v))
        else:
            args.append(bs.canon(a))
    return Atom(atom.pred, tuple(args))


def literal_holds(lit: Literal, states: Mapping[int, BeliefSet],
                  binding: Mapping[str, str]) -> bool:
    """Truth of a literal under a binding covering its named variables."""
    bs = states[lit.context]
    if isinstance(lit, CountLit):
        subject = binding.get(lit.subject, lit.subject)
        if is_var(subject):
            raise ValueError(f"unbound count subject {lit.subject}")
        value = bs.count(lit.role, subject) <= lit.bound
    elif lit.atom.is_equality:
        a, b = (binding.get(t, t) for t in lit.atom.args)
        if is_var(a) or is_var(b):
            raise ValueError(f"unbound equality side in {lit.atom}")
        value = bs.equal(a, b)
    else:
        pattern = _canon_pattern(lit.atom, bs, binding)
        if pattern.ground:
            value = pattern in bs.atoms
        else:
            if any(is_var(a) and not is_local(a) for a in pattern.args):
                raise ValueError(f"unbound variable in {lit.atom}")
            value = any(_unify(pattern, atom, {}) is not None
                        for atom in bs.by_pred(pattern.pred))
    return value if lit.positive else not value


def solutions(body: Iterable[Literal], states: Mapping[int, BeliefSet],
              binding: Optional[Mapping[str, str]] = None,
              domain: Optional[Iterable[str]] = None) -> Iterator[dict]:
    """Enumerate bindings under which every literal of ``body`` holds.

    Positive atoms are joined left to right; positive equalities may bind a
    free side to the members of the other side's class (or, with both sides
    free, to equal pairs over ``domain``); negations and counts filter.
    """
    body = list(body)
    joins = positive_atom_lits(body)
    eqs = [l for l in body if isinstance(l, Lit) and l.positive and l.atom.is_equality]
    counts = [l for l in body if isinstance(l, CountLit) and l.positive]
    filters = [l for l in body if l not in joins and l not in eqs]
    start = dict(binding or {})

    def join(i: int, b: dict) -> Iterator[dict]:
        if i == len(joins):
            yield from bind_eqs(0, b)
            return
        lit = joins[i]
        bs = states[lit.context]
        pattern = _canon_pattern(lit.atom, bs, b)
        if pattern.ground:
            if pattern in bs.atoms:
                yield from join(i + 1, b)
            return
        for atom in bs.by_pred(pattern.pred):
            b2 = _unify(pattern, atom, b)
            if b2 is not None:
                yield from join(i + 1, b2)

    def bind_counts(b: dict) -> Iterator[dict]:
        free = sorted({c.subject for c in counts if is_var(c.subject) and c.subject not in b})
        if not free:
            yield b
            return
        consts = sorted(set(domain) if domain is not None
                        else {x for c in counts for x in states[c.context].constants()})
        for values in product(consts, repeat=len(free)):
            yield {**b, **dict(zip(free, values))}

    def bind_eqs(i: int, b: dict) -> Iterator[dict]:
        if i == len(eqs):
            for b2 in bind_counts(b):
                if all(literal_holds(f, states, b2) for f in filters):
                    yield b2
            return
        lit = eqs[i]
        bs = states[lit.context]
        left, right = (b.get(t, t) for t in lit.atom.args)
        free = [t for t in (left, right) if is_var(t)]
        if not free:
            if bs.equal(left, right):
                yield from bind_eqs(i + 1, b)
        elif len(free) == 1:
            fixed = right if is_var(left) else left
            for m in bs.members(fixed):
                yield from bind_eqs(i + 1, {**b, free[0]: m})
        else:
            consts = sorted(set(domain) if domain is not None else bs.constants())
            for c in consts:
                for m in bs.members(c):
                    if left == right:
                        if m == c:
                            yield from bind_eqs(i + 1, {**b, left: c})
                    elif m in consts or domain is None:
                        yield from bind_eqs(i + 1, {**b, left: c, right: m})

    yield from join(0, start)


def body_holds(body: Iterable[Literal], states: Mapping[int, BeliefSet]) -> bool:
    """Truth of a ground body (local ``_`` variables aside).

    Local variables never span two literals, so each literal is checked on
    its own.
    """
    return all(literal_holds(lit, states, {}) for lit in body)


def render_literal(lit: Literal, names: Optional[Mapping[int, str]] = None) -> str:
    ctx = names[lit.context] if names else str(lit.context)
    if isinstance(lit, CountLit):
        inner = f"(<= {lit.bound} {lit.role})({lit.subject})"
    else:
        inner = str(lit.atom)
    text = f"({ctx}: {inner})"
    return text if lit.positive else f"not {text}"
