"""Parse the supported source subset into typed trees.

The front end leans on the standard `ast` module for tokenizing and
grammar, then converts into the toolkit's node set, rejecting anything
outside the subset with a structured error. Comments and blank lines do
not survive parsing.
"""

from __future__ import annotations

import ast as _py

from ..errors import SourceSyntaxError, UnsupportedConstructError
from . import nodes as n

_BINOPS = {
    _py.Add: "+", _py.Sub: "-", _py.Mult: "*", _py.Div: "/",
    _py.FloorDiv: "//", _py.Mod: "%", _py.Pow: "**",
    _py.BitAnd: "&", _py.BitOr: "|", _py.BitXor: "^",
    _py.LShift: "<<", _py.RShift: ">>",
}
_CMPOPS = {
    _py.Eq: "==", _py.NotEq: "!=", _py.Lt: "<", _py.LtE: "<=",
    _py.Gt: ">", _py.GtE: ">=", _py.In: "in", _py.NotIn: "not in",
    _py.Is: "is", _py.IsNot: "is not",
}
_UNARYOPS = {_py.USub: "-", _py.UAdd: "+", _py.Not: "not", _py.Invert: "~"}


def _span(node) -> n.Span:
    return (
        getattr(node, "lineno", 0),
        getattr(node, "col_offset", 0),
        getattr(node, "end_lineno", 0),
        getattr(node, "end_col_offset", 0),
    )


def _unsupported(node, what=None):
    raise UnsupportedConstructError(what or type(node).__name__, _span(node))


def _wrapped_in_parens(header: str) -> bool:
    """True if header text is `( ... ) :` with the parens matching."""
    s = header
    i = 0
    while i < len(s) and s[i] in " \t\n\\":
        i += 1
    if i >= len(s) or s[i] != "(":
        return False
    depth = 0
    quote = None
    j = i
    while j < len(s):
        ch = s[j]
        if quote:
            if ch == "\\":
                j += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                rest = s[j + 1:]
                k = 0
                while k < len(rest) and rest[k] in " \t\n\\":
                    k += 1
                return k < len(rest) and rest[k] == ":"
        j += 1
    return False


class _Converter:
    def __init__(self, source: str):
        self.lines = source.split("\n")

    # -- helpers ------------------------------------------------------------

    def _segment(self, from_pos, to_pos) -> str:
        (l1, c1), (l2, c2) = from_pos, to_pos
        if l1 == l2:
            return self.lines[l1 - 1][c1:c2]
        parts = [self.lines[l1 - 1][c1:]]
        parts.extend(self.lines[i] for i in range(l1, l2 - 1))
        parts.append(self.lines[l2 - 1][:c2])
        return "\n".join(parts)

    def _condition_paren(self, stmt, keyword_len) -> bool:
        """Detect redundant parentheses wrapping an if/while condition.

        True only when a single paren pair encloses the whole condition,
        i.e. the header reads `kw ( ... ):`. Parens around sub-expressions
        ("if (a) and (b):") do not count.
        """
        first = stmt.body[0]
        header = self._segment(
            (stmt.lineno, stmt.col_offset + keyword_len),
            (first.lineno, first.col_offset),
        )
        return _wrapped_in_parens(header)

    def _keyword_len(self, stmt) -> int:
        line = self.lines[stmt.lineno - 1][stmt.col_offset:]
        for kw in ("elif", "if", "while"):
            if line.startswith(kw):
                return len(kw)
        return 0

    # -- expressions ---------------------------------------------------------

    def expr(self, e) -> n.Expr:
        sp = _span(e)
        if isinstance(e, _py.Name):
            return n.Name(e.id, span=sp)
        if isinstance(e, _py.Constant):
            if isinstance(e.value, (bool, int, float, str)) or e.value is None:
                return n.Constant(e.value, span=sp)
            _unsupported(e, f"constant of type {type(e.value).__name__}")
        if isinstance(e, _py.BinOp):
            op = _BINOPS.get(type(e.op))
            if op is None:
                _unsupported(e, type(e.op).__name__)
            return n.BinOp(self.expr(e.left), op, self.expr(e.right), span=sp)
        if isinstance(e, _py.BoolOp):
            op = "and" if isinstance(e.op, _py.And) else "or"
            # flatten same-op nesting: `a and (b and c)` == `a and b and c`
            values = []
            for v in e.values:
                converted = self.expr(v)
                if isinstance(converted, n.BoolOp) and converted.op == op:
                    values.extend(converted.values)
                else:
                    values.append(converted)
            return n.BoolOp(op, tuple(values), span=sp)
        if isinstance(e, _py.UnaryOp):
            op = _UNARYOPS.get(type(e.op))
            if op is None:
                _unsupported(e, type(e.op).__name__)
            return n.UnaryOp(op, self.expr(e.operand), span=sp)
        if isinstance(e, _py.Compare):
            ops = []
            for o in e.ops:
                sym = _CMPOPS.get(type(o))
                if sym is None:
                    _unsupported(e, type(o).__name__)
                ops.append(sym)
            return n.Compare(
                self.expr(e.left), tuple(ops),
                tuple(self.expr(c) for c in e.comparators), span=sp,
            )
        if isinstance(e, _py.Call):
            kws = []
            for kw in e.keywords:
                if kw.arg is None:
                    _unsupported(e, "**kwargs call")
                kws.append(n.Keyword(kw.arg, self.expr(kw.value)))
            if any(isinstance(a, _py.Starred) for a in e.args):
                _unsupported(e, "*args call")
            return n.Call(
                self.expr(e.func), tuple(self.expr(a) for a in e.args),
                tuple(kws), span=sp,
            )
        if isinstance(e, _py.Attribute):
            return n.Attribute(self.expr(e.value), e.attr, span=sp)
        if isinstance(e, _py.Subscript):
            return n.Subscript(self.expr(e.value), self.slice_expr(e.slice), span=sp)
        if isinstance(e, _py.List):
            return n.ListExpr(tuple(self.expr(x) for x in e.elts), span=sp)
        if isinstance(e, _py.Tuple):
            return n.TupleExpr(tuple(self.expr(x) for x in e.elts), span=sp)
        if isinstance(e, _py.Set):
            return n.SetExpr(tuple(self.expr(x) for x in e.elts), span=sp)
        if isinstance(e, _py.Dict):
            if any(k is None for k in e.keys):
                _unsupported(e, "dict unpacking")
            return n.DictExpr(
                tuple(self.expr(k) for k in e.keys),
                tuple(self.expr(v) for v in e.values), span=sp,
            )
        if isinstance(e, _py.IfExp):
            return n.IfExp(self.expr(e.test), self.expr(e.body), self.expr(e.orelse), span=sp)
        _unsupported(e)

    def slice_expr(self, s) -> n.Expr:
        if isinstance(s, _py.Slice):
            return n.SliceExpr(
                self.expr(s.lower) if s.lower else None,
                self.expr(s.upper) if s.upper else None,
                self.expr(s.step) if s.step else None,
                span=_span(s),
            )
        if isinstance(s, _py.Tuple):
            _unsupported(s, "multi-dimensional subscript")
        return self.expr(s)

    # -- statements ----------------------------------------------------------

    def stmt(self, s) -> n.Stmt:
        sp = _span(s)
        if isinstance(s, _py.FunctionDef):
            a = s.args
            if a.posonlyargs or a.kwonlyargs or a.vararg or a.kwarg or a.defaults or a.kw_defaults:
                _unsupported(s, "non-positional or defaulted parameters")
            if s.decorator_list:
                _unsupported(s, "decorator")
            if s.returns is not None:
                _unsupported(s, "return annotation")
            args = tuple(
                n.Arg(x.arg, self.expr(x.annotation) if x.annotation else None)
                for x in a.args
            )
            return n.FunctionDef(s.name, args, self.block(s.body), span=sp)
        if isinstance(s, _py.Assign):
            if len(s.targets) != 1:
                _unsupported(s, "chained assignment")
            target = self.expr(s.targets[0])
            self._check_target(target, s)
            return n.Assign(target, self.expr(s.value), span=sp)
        if isinstance(s, _py.AugAssign):
            op = _BINOPS.get(type(s.op))
            if op is None:
                _unsupported(s, type(s.op).__name__)
            target = self.expr(s.target)
            if not isinstance(target, (n.Name, n.Subscript, n.Attribute)):
                _unsupported(s, "augmented-assignment target")
            return n.AugAssign(target, op, self.expr(s.value), span=sp)
        if isinstance(s, _py.For):
            if s.orelse:
                _unsupported(s, "for-else")
            target = self.expr(s.target)
            if not isinstance(target, n.Name) and not (
                isinstance(target, n.TupleExpr)
                and all(isinstance(e, n.Name) for e in target.elts)
            ):
                _unsupported(s, "loop target")
            return n.For(target, self.expr(s.iter), self.block(s.body), span=sp)
        if isinstance(s, _py.While):
            if s.orelse:
                _unsupported(s, "while-else")
            paren = self._condition_paren(s, self._keyword_len(s))
            return n.While(self.expr(s.test), self.block(s.body), paren, span=sp)
        if isinstance(s, _py.If):
            paren = self._condition_paren(s, self._keyword_len(s))
            return n.If(
                self.expr(s.test), self.block(s.body), self.block(s.orelse),
                paren, span=sp,
            )
        if isinstance(s, _py.Return):
            return n.Return(self.expr(s.value) if s.value else None, span=sp)
        if isinstance(s, _py.Expr):
            return n.ExprStmt(self.expr(s.value), span=sp)
        if isinstance(s, _py.Break):
            return n.Break(span=sp)
        if isinstance(s, _py.Continue):
            return n.Continue(span=sp)
        if isinstance(s, _py.Pass):
            return n.Pass(span=sp)
        _unsupported(s)

    def _check_target(self, target, stmt):
        if isinstance(target, (n.Name, n.Subscript, n.Attribute)):
            return
        if isinstance(target, n.TupleExpr) and all(
            isinstance(e, n.Name) for e in target.elts
        ):
            return
        _unsupported(stmt, "assignment target")

    def block(self, stmts) -> tuple:
        return tuple(self.stmt(s) for s in stmts)


def parse(source) -> n.Module:
    """Parse source text (or a SourceUnit) into a Module tree.

    Raises SourceSyntaxError for malformed text and
    UnsupportedConstructError for out-of-subset constructs.
    """
    text = getattr(source, "text", source)
    if not isinstance(text, str) or not text.strip():
        raise SourceSyntaxError("empty source", 1, 0)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    try:
        mod = _py.parse(text)
    except SyntaxError as exc:
        raise SourceSyntaxError(exc.msg, exc.lineno or 1, exc.offset or 0) from None
    conv = _Converter(text)
    body = conv.block(mod.body)
    return n.Module(body, span=(1, 0, len(conv.lines), len(conv.lines[-1])))
