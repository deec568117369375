"""Parsing, rendering, and normalization of the supported code subset."""

from .nodes import EMPTY_SPAN, Module, Node, Span, SyntaxTree, iter_child_nodes, walk
from .normalize import NormalForm, normalize
from .parse import parse
from .render import render

__all__ = [
    "EMPTY_SPAN",
    "Module",
    "Node",
    "NormalForm",
    "Span",
    "SyntaxTree",
    "iter_child_nodes",
    "normalize",
    "parse",
    "render",
    "walk",
]
