from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsrepair.aic import AIC, UpdateAction, ground_aics, violated_instances
from mcsrepair.deductive import (DeductiveKB, DeductiveLogic, UnionFind, deductive_context,
                                 least_model, manage, rule)
from mcsrepair.errors import OperationError, StratificationError, UnsafeRuleError
from mcsrepair.fixtures import fixture, toy_view
from mcsrepair.kernel import (MCS, BeliefState, BridgeRule, active_domain, compute_equilibrium,
                              ground_bridge_instances, is_equilibrium, iteration_bound, stratify)
from mcsrepair.logic import (Atom, BeliefSet, CountLit, Lit, body_holds, eq_atom, solutions,
                             unsafe_variables)
from mcsrepair.surface.parser import parse_problem

CONSTS = ("a", "b", "c")


def A(pred, *args):
    return Atom(pred, args)


# -- logic

def test_atom_basics():
    a = A("p", "X", "b")
    assert not a.ground and a.variables() == {"X"}
    assert a.substitute({"X": "a"}) == A("p", "a", "b")
    assert str(eq_atom("x", "y")) == "x = y"


def test_solutions_join_and_negation():
    bs = BeliefSet(frozenset({A("p", "a"), A("p", "b"), A("q", "b")}))
    body = [Lit(1, A("p", "X")), Lit(1, A("q", "X"), False)]
    assert [b["X"] for b in solutions(body, {1: bs})] == ["a"]


def test_local_variable_is_existential_under_negation():
    bs = BeliefSet(frozenset({A("p", "a"), A("p", "b"), A("e", "a", "m")}))
    body = [Lit(1, A("p", "X")), Lit(1, A("e", "X", "_G1"), False)]
    assert [b["X"] for b in solutions(body, {1: bs})] == ["b"]


def test_count_literal_is_closed_world():
    bs = BeliefSet(frozenset({A("r", "c1", "s1"), A("r", "c1", "s2")}))
    assert body_holds([CountLit(1, 2, "r", "c1")], {1: bs})
    assert not body_holds([CountLit(1, 1, "r", "c1")], {1: bs})
    assert body_holds([CountLit(1, 0, "r", "c9")], {1: bs})


def test_equality_lookup_modulo_aliases():
    bs = BeliefSet(frozenset({A("p", "x")}), frozenset({("y", "x")}))
    assert A("p", "y") in bs
    assert bs.equal("x", "y") and bs.members("y") == ["x", "y"]


def test_unsafe_variables():
    assert unsafe_variables([Lit(1, A("p", "X"), False)]) == {"X"}
    assert unsafe_variables([Lit(1, A("q", "X")), Lit(1, A("p", "X"), False)]) == set()
    assert unsafe_variables([Lit(1, A("p", "_G1"), False)]) == set()


# -- deductive

def test_least_model_stratified_negation():
    kb = DeductiveKB.build([A("p", "a"), A("p", "b"), A("q", "b")], [
        rule(A("d", "X"), A("p", "X"), (A("q", "X"), False)),
        rule(A("e", "X"), A("p", "X"), (A("d", "X"), False)),
    ])
    m = least_model(kb)
    assert A("d", "a") in m and A("d", "b") not in m
    assert A("e", "b") in m and A("e", "a") not in m


def test_unstratified_rules_rejected():
    with pytest.raises(StratificationError):
        deductive_context("C", [], [rule(A("p", "X"), A("d", "X"), (A("p", "X"), False))])


def test_unsafe_horn_rule():
    with pytest.raises(UnsafeRuleError):
        rule(A("p", "X"), (A("q", "X"), False))
    with pytest.raises(UnsafeRuleError):
        rule(A("p", "X"), A("q", "X"), eq_atom("X", "Y"))


def test_union_find_least_representative():
    uf = UnionFind()
    uf.union("m", "k")
    uf.union("z", "k")
    assert uf.find("z") == "k"
    assert uf.aliases() == frozenset({("m", "k"), ("z", "k")})


def test_merge_rewrites_facts():
    kb = DeductiveKB.build([A("p", "y"), A("q", "x")], equalities=[("x", "y")])
    assert kb.facts == frozenset({A("p", "x"), A("q", "x")})
    assert A("p", "y") in least_model(kb)


def test_manage_one_shot_order():
    kb = DeductiveKB.build([A("p", "a")])
    out = manage([("del", A("p", "a")), ("add", A("q", "a"))], kb)
    assert out.facts == frozenset({A("q", "a")})


def test_operation_errors():
    kb = DeductiveKB.build()
    with pytest.raises(OperationError):
        manage([("add", A("p", "X"))], kb)
    with pytest.raises(OperationError):
        manage([("frob", A("p", "a"))], kb)
    with pytest.raises(OperationError):
        deductive_context("C", ops=["frob"])


def test_inert_operations():
    logic = DeductiveLogic()
    kb = DeductiveKB.build([A("p", "a")])
    assert logic.inert(kb, "del", A("p", "b"))
    assert not logic.inert(kb, "del", A("p", "a"))
    assert not logic.inert(kb, "add", A("p", "b"))
    assert logic.inert(kb, "assertEqual", eq_atom("a", "a"))
    assert not logic.inert(kb, "assertEqual", eq_atom("a", "b"))


def test_compound_operations():
    facts = [A("class", "c1"), A("class", "c2"), A("enrolled", "c1", "s1"),
             A("webEnrolled", "c2", "s2")]
    kb = DeductiveKB.build(facts)
    logic = DeductiveLogic()
    out = logic.apply(kb, "webEnroll", A("webEnrolled", "c1", "s1"))
    assert A("webEnrolled", "c1", "s1") in out.facts and A("enrolled", "c1", "s1") not in out.facts
    from mcsrepair.logic import Neg
    out = logic.apply(kb, "unregister", Neg(A("exists_webEnrolled_R", "s2")))
    assert A("enrolled", "c2", "s2") in out.facts
    out = logic.apply(kb, "redistribute", Neg(A("class", "c1")))
    assert A("class", "c1") not in out.facts and A("enrolled", "c2", "s1") in out.facts
    with pytest.raises(OperationError):
        logic.apply(DeductiveKB.build([A("class", "c1"), A("enrolled", "c1", "s")]),
                    "redistribute", Neg(A("class", "c1")))


# -- kernel

def test_toy_equilibrium():
    p = toy_view()
    s = compute_equilibrium(p.mcs)
    assert A("r", "a") in s[2]
    assert is_equilibrium(p.mcs, s)


def test_oscillating_has_no_equilibrium():
    p = fixture("oscillating")
    assert compute_equilibrium(p.mcs) is None
    s = BeliefState((BeliefSet(frozenset({A("p", "a")})),))
    assert not is_equilibrium(p.mcs, s)


def test_iteration_bound_env(monkeypatch):
    p = toy_view()
    monkeypatch.setenv("MCS_REPAIR_MAX_ITER", "7")
    assert iteration_bound(p.mcs) == 7
    monkeypatch.delenv("MCS_REPAIR_MAX_ITER")
    assert iteration_bound(p.mcs) >= 1000


def test_trace_records_states():
    p = fixture("lubm-specific")
    trace = []
    final = compute_equilibrium(p.mcs, trace=trace)
    assert trace[-1] == final and len(trace) >= 2


def test_negative_bridge_cycle_rejected():
    p = parse_problem("""
        context A.
        context B.
        bridge (A: p(a)) <- not (B: q(a)).
        bridge (B: q(a)) <- (A: p(a)).
    """)
    with pytest.raises(StratificationError) as err:
        stratify(p.mcs)
    assert "A:p" in str(err.value)


def test_import_domain_restricts_grounding():
    p = parse_problem("""
        context A.
        context B domain a.
        fact A: p(a), p(b).
        bridge (B: q(X)) <- (A: p(X)).
    """)
    s = compute_equilibrium(p.mcs)
    assert set(s[2]) == {A("q", "a")}
    assert active_domain(p.mcs) == frozenset({"a", "b"})
    assert len(ground_bridge_instances(p.mcs, s)) == 1


def test_equality_porting():
    p = fixture("lubm-functional")
    s = compute_equilibrium(p.mcs)
    assert not s[1].equal("x", "y")
    m = p.mcs.with_kbs([p.mcs.contexts[0].kb,
                        manage([("assertEqual", eq_atom("x", "y"))], p.mcs.contexts[1].kb)])
    assert compute_equilibrium(m)[1].equal("x", "y")


# -- properties

atoms_unary = st.builds(lambda p, c: A(p, c), st.sampled_from("pqr"), st.sampled_from(CONSTS))


def naive_least_model(facts, rules):
    """Stratum-by-stratum naive fixpoint over all groundings."""
    level = {}
    preds = {r.head.pred for r in rules} | {l.atom.pred for r in rules for l in r.body} | \
        {f.pred for f in facts}
    for p in preds:
        level[p] = 0
    for _ in range(len(preds) + 1):
        for r in rules:
            for l in r.body:
                need = level[l.atom.pred] + (0 if l.positive else 1)
                level[r.head.pred] = max(level[r.head.pred], need)
    model = set(facts)
    for k in range(max(level.values(), default=0) + 1):
        layer = [r for r in rules if level[r.head.pred] == k]
        changed = True
        while changed:
            changed = False
            for r in layer:
                vs = sorted({v for l in r.body for v in l.atom.variables()} | r.head.variables())
                for values in itertools.product(CONSTS, repeat=len(vs)):
                    b = dict(zip(vs, values))
                    if all((l.atom.substitute(b) in model) == l.positive for l in r.body):
                        h = r.head.substitute(b)
                        if h not in model:
                            model.add(h)
                            changed = True
    return model


RULE_SHAPES = [
    lambda h, b1, b2: rule(A(h, "X"), A(b1, "X")),
    lambda h, b1, b2: rule(A(h, "X"), A(b1, "X"), A(b2, "X")),
    lambda h, b1, b2: rule(A(h, "X"), A(b1, "X"), (A(b2, "X"), False)),
]


@st.composite
def programs(draw):
    facts = draw(st.frozensets(atoms_unary, max_size=6))
    rules = []
    for i in range(draw(st.integers(0, 4))):
        shape = draw(st.sampled_from(RULE_SHAPES))
        # heads d0..d3 only depend on base predicates and earlier heads
        lower = list("pqr") + [f"d{j}" for j in range(i)]
        rules.append(shape(f"d{i}", draw(st.sampled_from(lower)), draw(st.sampled_from(lower))))
    return facts, rules


@settings(max_examples=150, deadline=None)
@given(programs())
def test_least_model_matches_naive_fixpoint(prog):
    facts, rules = prog
    got = set(least_model(DeductiveKB.build(facts, rules)))
    assert got == naive_least_model(facts, rules)


@st.composite
def aic_bodies(draw):
    lits = []
    for _ in range(draw(st.integers(1, 3))):
        args = tuple(draw(st.sampled_from(("X", "Y", "a"))) for _ in range(draw(st.integers(1, 2))))
        pred = f"p{len(args)}"
        lits.append(Lit(1, Atom(pred, args), draw(st.booleans())))
    pos_vars = {v for l in lits if l.positive for v in l.variables()}
    for l in lits:
        if not l.positive and not l.variables() <= pos_vars:
            return [l2 for l2 in lits if l2.positive] or [Lit(1, A("p1", "X"))]
    return lits


states = st.builds(
    lambda facts: BeliefSet(frozenset(facts)),
    st.frozensets(st.one_of(
        st.builds(lambda c: A("p1", c), st.sampled_from(CONSTS)),
        st.builds(lambda c, d: A("p2", c, d), st.sampled_from(CONSTS), st.sampled_from(CONSTS))),
        max_size=8))


@settings(max_examples=200, deadline=None)
@given(aic_bodies(), states)
def test_join_grounding_matches_brute_force(body, bs):
    m = MCS((deductive_context("C", [], [], ops=("add", "del")),))
    vs = sorted({v for l in body for v in l.variables()})
    head = (UpdateAction(1, "add", Atom("z", tuple(vs) or ("a",))),)
    eta = (AIC(tuple(body), head),)
    state = BeliefState((bs,))
    dom = frozenset(CONSTS)
    brute = {g for g in ground_aics(m, eta, dom) if body_holds(g.body, state)}
    assert violated_instances(state, eta, dom) == brute


@settings(max_examples=150, deadline=None)
@given(st.frozensets(atoms_unary, max_size=5),
       st.lists(st.tuples(st.sampled_from(("add", "del")), atoms_unary), max_size=4))
def test_primitive_manage_is_order_free_when_consistent(facts, actions):
    kb = DeductiveKB.build(facts)
    added = {a for op, a in actions if op == "add"}
    deleted = {a for op, a in actions if op == "del"}
    if added & deleted:
        return
    logic = DeductiveLogic()
    target = manage(actions, kb)
    for perm in itertools.permutations(actions):
        out = kb
        for op, a in perm:
            out = logic.apply(out, op, a)
        assert out == target


def test_bridge_rule_safety():
    with pytest.raises(UnsafeRuleError):
        BridgeRule(1, "add", A("p", "X"), (Lit(2, A("q", "X"), False),))
