"""Typed syntax-tree nodes for the supported source subset.

Trees are immutable; rewrites construct fresh nodes. Spans record the
source extent (lineno, col, end_lineno, end_col) and never participate
in structural equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Optional, Tuple

Span = Tuple[int, int, int, int]
EMPTY_SPAN: Span = (0, 0, 0, 0)


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Expr(Node):
    pass


@dataclass(frozen=True)
class Stmt(Node):
    pass


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Name(Expr):
    id: str
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True, eq=False)
class Constant(Expr):
    # eq defined manually: bool/int literals must not compare equal (True != 1).
    value: Any
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)

    def __eq__(self, other):
        if not isinstance(other, Constant):
            return NotImplemented
        return type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self):
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class BinOp(Expr):
    left: Expr
    op: str
    right: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str  # "and" | "or"
    values: Tuple[Expr, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class UnaryOp(Expr):
    op: str  # "-" | "+" | "not" | "~"
    operand: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Compare(Expr):
    left: Expr
    ops: Tuple[str, ...]
    comparators: Tuple[Expr, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Keyword(Node):
    arg: str
    value: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: Expr
    args: Tuple[Expr, ...]
    keywords: Tuple[Keyword, ...] = ()
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Attribute(Expr):
    value: Expr
    attr: str
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class SliceExpr(Expr):
    lower: Optional[Expr]
    upper: Optional[Expr]
    step: Optional[Expr] = None
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Subscript(Expr):
    value: Expr
    index: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class ListExpr(Expr):
    elts: Tuple[Expr, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class TupleExpr(Expr):
    elts: Tuple[Expr, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class SetExpr(Expr):
    elts: Tuple[Expr, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class DictExpr(Expr):
    keys: Tuple[Expr, ...]
    values: Tuple[Expr, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class IfExp(Expr):
    test: Expr
    body: Expr
    orelse: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


# --- statements ------------------------------------------------------------


@dataclass(frozen=True)
class Arg(Node):
    name: str
    annotation: Optional[Expr] = None


@dataclass(frozen=True)
class FunctionDef(Stmt):
    name: str
    args: Tuple[Arg, ...]
    body: Tuple[Stmt, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr  # Name | Subscript | Attribute | TupleExpr of Names
    value: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class AugAssign(Stmt):
    target: Expr  # Name | Subscript | Attribute
    op: str
    value: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class For(Stmt):
    target: Expr  # Name | TupleExpr of Names
    iter: Expr
    body: Tuple[Stmt, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class While(Stmt):
    test: Expr
    body: Tuple[Stmt, ...]
    paren: bool = False  # condition wrapped in redundant parentheses
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class If(Stmt):
    test: Expr
    body: Tuple[Stmt, ...]
    orelse: Tuple[Stmt, ...] = ()
    paren: bool = False
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class ExprStmt(Stmt):
    value: Expr
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Break(Stmt):
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Continue(Stmt):
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Pass(Stmt):
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Module(Node):
    body: Tuple[Stmt, ...]
    span: Span = field(default=EMPTY_SPAN, compare=False, repr=False, kw_only=True)


SyntaxTree = Module


def iter_child_nodes(node: Node):
    """Yield direct child nodes in deterministic field order."""
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node):
    """Pre-order traversal over node and all descendants."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(iter_child_nodes(current))))
