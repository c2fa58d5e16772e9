"""Walk through the smallest example: a view context fed by two base facts."""
from mcsrepair import RepairSession, compute_equilibrium, enumerate_grounded_repairs, fixture
from mcsrepair.surface.render import render_problem, render_update_set


def main() -> None:
    p = fixture("toy-view")
    print(render_problem(p))

    s = compute_equilibrium(p.mcs)
    print("view context holds:", sorted(map(str, s[2])))

    session = RepairSession(p.mcs, p.aics)
    print("violated before repair:", [session.text(g) for g in session.variant(frozenset()).violated])

    # deleting only one base fact leaves the other bridge firing
    for u in enumerate_grounded_repairs(p.mcs, p.aics):
        print("grounded repair:", render_update_set(u, p.mcs))
        v = session.variant(u)
        print("  view after repair:", sorted(map(str, v.state[2])) or "empty")


if __name__ == "__main__":
    main()
