"""A repair that has to pass through the same constraint twice."""
from mcsrepair import build_repair_tree, fixture, is_grounded_repair
from mcsrepair.surface.export import export_tree
from mcsrepair.surface.render import render_update_set


def main() -> None:
    p = fixture("weird-repair")
    tree = build_repair_tree(p.mcs, p.aics)
    print(export_tree(tree, "text").decode())

    (leaf,) = tree.leaves()
    print("leaf:", render_update_set(leaf.actions, p.mcs))
    print("grounded:", is_grounded_repair(p.mcs, p.aics, leaf.actions))
    print()
    print(export_tree(tree, "dot").decode())


if __name__ == "__main__":
    main()
