from __future__ import annotations

import itertools

import pytest

from mcsrepair.aic import (AIC, COUNTEREXAMPLE_2, INCONCLUSIVE, VALID, RepairSession,
                           UpdateAction, apply_update_set, bounded_validity_check,
                           build_repair_tree, enumerate_grounded_repairs, ground_aics,
                           is_consistent_update_set, is_grounded_repair, is_weak_repair,
                           node_id, oracle_grounded_repairs, permutation_consistent, satisfies)
from mcsrepair.errors import BoundExceeded, InconsistentUpdateSet, InvalidAction, LogicallyInconsistent
from mcsrepair.fixtures import fixture, toy_view
from mcsrepair.logic import Atom, Lit, eq_atom
from mcsrepair.surface.parser import parse_problem
from mcsrepair.surface.render import render_update_set

from randgen import instances


def act(ctx, op, text):
    pred, rest = text.split("(")
    return UpdateAction(ctx, op, Atom(pred, tuple(a.strip() for a in rest.rstrip(")").split(","))))


DEL_P, DEL_Q = act(1, "del", "p(a)"), act(1, "del", "q(a)")


def test_update_action_assert_alias():
    a = UpdateAction(1, "assert", eq_atom("x", "y"))
    assert a.op == "assertEqual"


def test_toy_weak_repairs():
    p = toy_view()
    assert is_weak_repair(p.mcs, p.aics, {DEL_P, DEL_Q})
    # r(a) is still derived through q(a)
    assert not is_weak_repair(p.mcs, p.aics, {DEL_P})
    assert not is_weak_repair(p.mcs, p.aics, {DEL_Q})


def test_empty_set_repairs_consistent_mcs():
    p = toy_view(facts=())
    assert is_weak_repair(p.mcs, p.aics, ())
    assert enumerate_grounded_repairs(p.mcs, p.aics) == [frozenset()]
    t = build_repair_tree(p.mcs, p.aics)
    assert list(t.nodes) == [frozenset()]
    assert t.root.leaf and t.root.weak_repair


def test_toy_grounded():
    p = toy_view()
    assert is_grounded_repair(p.mcs, p.aics, {DEL_P, DEL_Q})
    assert not is_grounded_repair(p.mcs, p.aics, {DEL_P})


def test_toy_with_single_source():
    p = toy_view(facts=("p(a)",))
    assert enumerate_grounded_repairs(p.mcs, p.aics) == [frozenset({DEL_P})]


def test_toy_tree_single_child():
    p = toy_view()
    t = build_repair_tree(p.mcs, p.aics)
    assert set(t.nodes) == {frozenset(), frozenset({DEL_P, DEL_Q})}
    (edge,) = t.edges
    assert edge.label == "r1"
    assert t.nodes[edge.target].grounded_repair


FIXTURE_NAMES = ("toy-view", "weird-repair", "lubm-functional", "lubm-webenroll-unnamed")


def test_edge_contract_minimal_tree():
    for name in FIXTURE_NAMES:
        p = fixture(name)
        s = RepairSession(p.mcs, p.aics)
        for e in s.build_tree("minimal").edges:
            assert e.rule in s.variant(e.source).violated
            child = s.variant(e.target)
            assert not child.ok or e.rule not in child.violated
            assert e.source < e.target


def test_edge_contract_wellfounded_tree():
    # one head action of the violated rule per step, restored or not
    for name in FIXTURE_NAMES:
        p = fixture(name)
        s = RepairSession(p.mcs, p.aics)
        for e in s.build_tree("wellfounded").edges:
            assert e.rule in s.variant(e.source).violated
            (added,) = e.target - e.source
            assert added in e.rule.head


def test_apply_empty_update_set_is_identity():
    p = toy_view()
    assert apply_update_set(p.mcs, ()) is p.mcs


def test_apply_inconsistent_update_set_raises():
    p = toy_view()
    with pytest.raises(InconsistentUpdateSet):
        apply_update_set(p.mcs, {DEL_P, act(1, "add", "p(a)")})


def test_action_on_immutable_context_rejected():
    p = toy_view()
    with pytest.raises(InvalidAction):
        is_consistent_update_set(p.mcs, {act(2, "add", "r(a)")})


def test_satisfies_raises_without_equilibrium():
    p = fixture("oscillating")
    r = AIC((Lit(1, Atom("p", ("a",))),), (act(1, "del", "p(a)"),))
    with pytest.raises(LogicallyInconsistent):
        satisfies(p.mcs, r)


def test_satisfies_ground_and_open():
    p = toy_view()
    assert not satisfies(p.mcs, p.aics[0])
    q = toy_view(facts=())
    assert satisfies(q.mcs, q.aics[0])


def test_weird_repair_leaf_grounded():
    p = fixture("weird-repair")
    leaf = {act(2, "del", "B1(a)"), act(2, "add", "B2(a)"), act(2, "del", "B3(a)")}
    assert is_grounded_repair(p.mcs, p.aics, leaf)
    assert oracle_grounded_repairs(p.mcs, p.aics) == enumerate_grounded_repairs(p.mcs, p.aics)


SUBSET_GAP_TEXT = """
context A ops add, del.
context T.
fact A: B1(a), B2(a).
rule T: D(X) :- B1(X), not E(X).
rule T: D(X) :- B2(X), not E(X).
bridge (T: B1(X)) <- (A: B1(X)).
bridge (T: B2(X)) <- (A: B2(X)).
bridge (T: E(X)) <- (A: E(X)).
aic r1: (T: D(a)) => (A: del(B1(a))) | (A: add(E(a))).
aic r2: (A: B2(a)), not (A: B1(a)) => (A: del(B2(a))).
"""


def test_minimal_tree_misses_a_grounded_repair():
    # {del B1, del B2} is grounded, but no single rule forces both: r1 is
    # restored minimally only by add E, and r2 never fires at the root
    p = parse_problem(SUBSET_GAP_TEXT)
    s = RepairSession(p.mcs, p.aics)
    both = frozenset({act(1, "del", "B1(a)"), act(1, "del", "B2(a)")})
    add_e = frozenset({act(1, "add", "E(a)")})
    assert s.is_grounded_repair(both)
    assert s.grounded_repairs("minimal") == [add_e]
    assert s.grounded_repairs("wellfounded") == [add_e, both]
    assert s.oracle(universe="full") == [add_e, both]


def test_flags_for_inconsistent_nodes():
    p = parse_problem("""
        context A ops add, del.
        fact A: p(a).
        aic (A: p(a)) => (A: del(p(a))).
        aic (A: p(a)) => (A: add(q(a))).
        aic (A: q(a)), not (A: r(a)) => (A: del(q(a))) | (A: add(r(a))).
    """)
    t = build_repair_tree(p.mcs, p.aics)
    assert all(n.flags()["consistent"] == n.consistent for n in t.nodes.values())
    got = sorted(render_update_set(u, p.mcs) for u in t.grounded_repairs())
    assert got == ["del p(a)"]


def test_update_inconsistent_child_is_flagged():
    p = parse_problem("""
        context A ops add, del.
        fact A: p(a).
        aic (A: p(a)), not (A: q(a)) => (A: add(q(a))).
        aic (A: q(a)) => (A: del(q(a))) | (A: del(p(a))).
    """)
    s = RepairSession(p.mcs, p.aics)
    t = s.build_tree("minimal")
    flagged = [n for n in t.nodes.values() if n.update_inconsistent]
    assert flagged and all(n.leaf and not n.weak_repair for n in flagged)
    assert s.grounded_repairs() == oracle_grounded_repairs(p.mcs, p.aics)


def test_node_id_is_stable_hash():
    a = node_id([DEL_P, DEL_Q])
    assert a == node_id([DEL_Q, DEL_P])
    assert len(a) == 12 and a != node_id([DEL_P])


def test_grounded_bound():
    p = parse_problem("context A ops add, del.\n" +
                      "".join(f"aic (A: p{i}(a)) => (A: del(p{i}(a))).\n" for i in range(17)))
    u = {act(1, "add", f"q{i}(a)") for i in range(17)}
    with pytest.raises(BoundExceeded):
        is_grounded_repair(p.mcs, p.aics, u)


def test_oracle_bound():
    p = parse_problem("context A ops add, del.\nfact A: " +
                      ", ".join(f"p{i}(a)" for i in range(5)) + ".\n" +
                      "aic " + ", ".join(f"(A: p{i}(a))" for i in range(5)) + " => " +
                      " | ".join(f"(A: del(p{i}(a)))" for i in range(5)) + ".")
    assert len(oracle_grounded_repairs(p.mcs, p.aics, bound=5)) == 5
    with pytest.raises(BoundExceeded):
        oracle_grounded_repairs(p.mcs, p.aics, bound=4, universe="full")


def test_ground_aics_cover_domain():
    p = fixture("lubm-specific")
    ground = ground_aics(p.mcs, p.aics)
    dom = RepairSession(p.mcs, p.aics).domain
    assert len(ground) == len(dom)


def test_join_and_brute_grounding_agree_on_fixtures():
    for name in ("lubm-functional", "lubm-domain", "lubm-webenroll", "lubm-webenroll-unnamed",
                 "lubm-mincard", "lubm-mincard-unguarded", "lubm-missing-email", "weird-repair"):
        p = fixture(name)
        join = RepairSession(p.mcs, p.aics)
        brute = RepairSession(p.mcs, p.aics, grounding="brute")
        for u in [frozenset()] + [frozenset([a]) for a in sorted(join.head_universe(), key=str)[:6]]:
            vj, vb = join.variant(u), brute.variant(u)
            assert vj.status == vb.status
            assert vj.violated == vb.violated, (name, u)


def test_relevant_universe_matches_full_on_random_instances():
    for inst in instances(150, start=10_000):
        p = inst.problem
        s = RepairSession(p.mcs, p.aics, grounding="brute")
        assert s.oracle(universe="relevant") == s.oracle(universe="full"), inst.seed


def test_strategies_agree_with_oracle_on_more_seeds():
    missed = 0
    for inst in instances(300, start=50_000):
        p = inst.problem
        s = RepairSession(p.mcs, p.aics)
        oracle = oracle_grounded_repairs(p.mcs, p.aics)
        assert s.grounded_repairs("wellfounded") == oracle, inst.seed
        minimal = s.grounded_repairs("minimal")
        assert set(minimal) <= set(oracle)
        missed += minimal != oracle
    assert missed <= 300


def _naive_consistent(m, u):
    for i in {a.context for a in u}:
        ctx = m.context(i)
        acts = [(a.op, a.arg) for a in u if a.context == i]
        outcomes = set()
        for perm in itertools.permutations(acts):
            kb = ctx.kb
            try:
                for op, arg in perm:
                    kb = ctx.logic.apply(kb, op, arg)
            except Exception:
                kb = None
            outcomes.add(kb)
        try:
            target = ctx.logic.manage(acts, ctx.kb)
        except Exception:
            target = None
        if outcomes != {target}:
            return False
    return True


def test_permutation_dp_matches_naive():
    p = fixture("lubm-functional")
    s = RepairSession(p.mcs, p.aics)
    acts = sorted(s.head_universe(), key=str)
    for size in range(1, 4):
        for combo in itertools.combinations(acts, size):
            assert permutation_consistent(p.mcs, combo) == _naive_consistent(p.mcs, combo)


def test_primitive_fast_path():
    p = toy_view()
    assert not is_consistent_update_set(p.mcs, {DEL_P, act(1, "add", "p(a)")})
    assert is_consistent_update_set(p.mcs, {DEL_P, act(1, "add", "q(b)")})


def test_validity_example():
    p = toy_view()
    universe = [(1, Atom("p", ("a",))), (1, Atom("q", ("a",)))]
    report = bounded_validity_check(p.mcs, p.aics[0], universe, 2)
    assert report.verdict == VALID and report.exhaustive
    witnesses = {a: t for a, t in report.witnesses}
    assert witnesses[DEL_P] == frozenset({act(1, "del", "q(a)")})
    assert witnesses[DEL_Q] == frozenset({act(1, "del", "p(a)")})


def test_validity_condition2_and_inconclusive():
    p = toy_view(broken=True)
    universe = [Atom("p", ("a",)), Atom("q", ("a",)), Atom("s", ("a",))]
    report = bounded_validity_check(p.mcs, p.aics[0], universe, 3)
    assert report.verdict == COUNTEREXAMPLE_2
    assert report.action == act(1, "del", "s(a)")
    assert bounded_validity_check(p.mcs, p.aics[0], universe, 1).verdict == INCONCLUSIVE


def test_validity_domain_aic_add_only():
    p = fixture("lubm-domain")
    universe = [(1 + 1, Atom("enrolled", ("c1", "s1"))), (2, Atom("student", ("s1",))),
                (2, Atom("enrolled", ("c1", "s2"))), (2, Atom("student", ("s2",)))]
    assert bounded_validity_check(p.mcs, p.aics[0], universe, 4).verdict == VALID
