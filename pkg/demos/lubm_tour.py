"""Run every university-ontology fixture and show what each repair does."""
from mcsrepair import RepairSession, enumerate_grounded_repairs, fixture
from mcsrepair.fixtures import FIXTURES
from mcsrepair.ontology import A_CTX
from mcsrepair.surface.render import render_update_set


def main() -> None:
    for name in sorted(n for n in FIXTURES if n.startswith("lubm")):
        p = fixture(name)
        session = RepairSession(p.mcs, p.aics)
        before = session.variant(frozenset())
        repairs = enumerate_grounded_repairs(p.mcs, p.aics)
        print(f"{name}: {len(before.violated)} violation(s), {len(repairs)} grounded repair(s)")
        for u in repairs:
            kb = session.variant(u).mcs.context(A_CTX).kb
            gone = sorted(map(str, before.mcs.context(A_CTX).kb.facts - kb.facts))
            new = sorted(map(str, kb.facts - before.mcs.context(A_CTX).kb.facts))
            print("  ", render_update_set(u, p.mcs))
            if gone:
                print("     removed:", ", ".join(gone))
            if new:
                print("     added:  ", ", ".join(new))


if __name__ == "__main__":
    main()
