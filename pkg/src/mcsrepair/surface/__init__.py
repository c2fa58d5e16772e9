from .export import export_tree
from .parser import ParseError, parse_aics, parse_atoms, parse_problem
from .render import render_problem

__all__ = ["ParseError", "export_tree", "parse_aics", "parse_atoms", "parse_problem",
           "render_problem"]
