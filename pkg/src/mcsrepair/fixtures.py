"""Bundled example problems, addressable by name."""
from __future__ import annotations

from typing import Callable, Iterable

from .aic import Problem
from .logic import Atom
from .ontology import (LUBM_TBOX, ConjunctionInclusion, Inclusion, OntologyFixture,
                       encode_ontology)
from .surface.parser import parse_aics, parse_problem


def _facts(text: str) -> frozenset[Atom]:
    out = []
    for item in text.split(";"):
        item = item.strip()
        if item:
            pred, rest = item.split("(")
            out.append(Atom(pred.strip(), tuple(a.strip() for a in rest.rstrip(")").split(","))))
    return frozenset(out)


def _ontology(tbox, abox: Iterable[Atom], ops, aics: str) -> Problem:
    m = encode_ontology(OntologyFixture(tuple(tbox), frozenset(abox), tuple(ops)))
    return Problem(m, parse_aics(aics, m))


TOY_AIC = "aic (I: r(a)) => (E: del(p(a))) | (E: del(q(a)))."


def toy_view(facts: Iterable[str] = ("p(a)", "q(a)"), broken: bool = False) -> Problem:
    """``r`` is the view ``p ∪ q``; the AIC forbids ``r(a)``."""
    facts = list(facts)
    aic = TOY_AIC
    if broken:
        aic = aic[:-1] + " | (E: del(s(a)))."
    text = "\n".join([
        "context E ops add, del.",
        "context I.",
        f"fact E: {', '.join(facts)}." if facts else "",
        "bridge (I: r(X)) <- (E: p(X)).",
        "bridge (I: r(X)) <- (E: q(X)).",
        aic,
    ])
    return parse_problem(text)


def weird_repair() -> Problem:
    return _ontology(
        [Inclusion("B1", "D"), ConjunctionInclusion(("B2", "B3"), "D")],
        _facts("B1(a); B3(a)"),
        ("add", "del"),
        """
        aic r1: (T: D)(a) => (A: del(B1)(a)) | (A: del(B3)(a)).
        aic r2: not (T: B1)(a), not (T: B2)(a) => (A: add(B2)(a)).
        """)


def lubm_functional() -> Problem:
    return _ontology(
        LUBM_TBOX, _facts("hasEmail(x, e); hasEmail(y, e)"),
        ("add", "del", "assertEqual"),
        """
        aic functional: (A: hasEmail(X, Z)), (A: hasEmail(Y, Z)), not (T: X = Y)
            => (A: del(hasEmail(X, Z))) | (A: assert(X = Y)).
        """)


def lubm_domain() -> Problem:
    return _ontology(
        LUBM_TBOX, _facts("class(c1); enrolled(c1, s1); enrolled(c1, s2); student(s2)"),
        ("add", "del"),
        """
        aic domain: (T: enrolled(X, Y)), not (T: student(Y)) => (A: add(student(Y))).
        """)


def lubm_specific() -> Problem:
    return _ontology(
        LUBM_TBOX, _facts("student(john); gradStudent(john); gradStudent(mary)"),
        ("add", "del"),
        """
        aic specific: (A: gradStudent(X)), (A: student(X)) => (A: del(student(X))).
        """)


def _mincard_abox() -> frozenset[Atom]:
    facts = ["class(c1)", "class(c2)", "enrolled(c1, s1)", "enrolled(c1, s2)"]
    facts += [f"enrolled(c2, s{i})" for i in range(3, 14)]
    return _facts("; ".join(facts))


def lubm_mincard(guarded: bool = True) -> Problem:
    guard = "(T: class(X)), " if guarded else ""
    return _ontology(
        LUBM_TBOX, _mincard_abox(), ("add", "del", "redistribute"),
        f"aic mincard: {guard}(T: (<= 10 enrolled)(X)) => (A: redistribute(not class(X))).")


def lubm_missing_email() -> Problem:
    return _ontology(
        LUBM_TBOX,
        _facts("class(c1); webEnrolled(c1, s1); student(s1); "
               "webEnrolled(c1, s2); hasEmail(s2, e2); email(e2)"),
        ("add", "del", "unregister"),
        """
        aic explicit: (T: exists_hasEmail(X)), not (T: hasEmail(X, _))
            => (A: unregister(not exists_webEnrolled_R(X))).
        """)


WEBENROLL_ABOX = ("enrolled(c1, s1); hasEmail(s1, e1); email(e1); "
                  "webEnrolled(c2, s2); enrolled(c1, s2); student(s2)")


def lubm_webenroll(named: bool = True) -> Problem:
    first = "(T: hasEmail(Y, Z))" if named else "(T: exists_hasEmail(Y))"
    return _ontology(
        LUBM_TBOX, _facts(WEBENROLL_ABOX), ("add", "del", "webEnroll"),
        f"aic webenroll: {first}, (T: enrolled(X, Y)), not (T: webEnrolled(X, Y))"
        " => (A: webEnroll(webEnrolled(X, Y))).")


def oscillating() -> Problem:
    """A bridge rule that deletes its own premise: no equilibrium exists."""
    return parse_problem("""
        context A ops add, del.
        fact A: p(a).
        bridge (A: del(p(a))) <- (A: p(a)).
    """)


FIXTURES: dict[str, Callable[[], Problem]] = {
    "toy-view": toy_view,
    "toy-view-broken": lambda: toy_view(broken=True),
    "weird-repair": weird_repair,
    "lubm-functional": lubm_functional,
    "lubm-domain": lubm_domain,
    "lubm-specific": lubm_specific,
    "lubm-mincard": lubm_mincard,
    "lubm-mincard-unguarded": lambda: lubm_mincard(guarded=False),
    "lubm-missing-email": lubm_missing_email,
    "lubm-webenroll": lubm_webenroll,
    "lubm-webenroll-unnamed": lambda: lubm_webenroll(named=False),
    "oscillating": oscillating,
}


def all_fixtures() -> dict[str, Problem]:
    return {name: build() for name, build in FIXTURES.items()}


def fixture(name: str) -> Problem:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name}; known: {', '.join(sorted(FIXTURES))}") from None
