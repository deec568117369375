"""Deterministic source rendering: one fixed style, minimal parentheses.

4-space indent, single spaces around binary operators and after commas.
The only optional styling rendered is the paren flag on if/while
conditions, which belongs to the transformation channel.
"""

from __future__ import annotations

from . import nodes as n

# Expression precedence levels (higher binds tighter).
_PREC_IFEXP = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_NOT = 4
_PREC_CMP = 5
_PREC_BITOR = 6
_PREC_BITXOR = 7
_PREC_BITAND = 8
_PREC_SHIFT = 9
_PREC_ADD = 10
_PREC_MUL = 11
_PREC_UNARY = 12
_PREC_POW = 13
_PREC_ATOM = 14

_BIN_PREC = {
    "|": _PREC_BITOR, "^": _PREC_BITXOR, "&": _PREC_BITAND,
    "<<": _PREC_SHIFT, ">>": _PREC_SHIFT,
    "+": _PREC_ADD, "-": _PREC_ADD,
    "*": _PREC_MUL, "/": _PREC_MUL, "//": _PREC_MUL, "%": _PREC_MUL,
    "**": _PREC_POW,
}


def _prec(e: n.Expr) -> int:
    if isinstance(e, n.IfExp):
        return _PREC_IFEXP
    if isinstance(e, n.BoolOp):
        return _PREC_OR if e.op == "or" else _PREC_AND
    if isinstance(e, n.UnaryOp):
        return _PREC_NOT if e.op == "not" else _PREC_UNARY
    if isinstance(e, n.Compare):
        return _PREC_CMP
    if isinstance(e, n.BinOp):
        return _BIN_PREC[e.op]
    return _PREC_ATOM


def _paren_if(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def expr(e: n.Expr) -> str:
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.Constant):
        return repr(e.value)
    if isinstance(e, n.BinOp):
        p = _BIN_PREC[e.op]
        if e.op == "**":  # right-associative
            left = _paren_if(expr(e.left), _prec(e.left) <= p)
            right = _paren_if(expr(e.right), _prec(e.right) < p)
        else:
            left = _paren_if(expr(e.left), _prec(e.left) < p)
            right = _paren_if(expr(e.right), _prec(e.right) <= p)
        return f"{left} {e.op} {right}"
    if isinstance(e, n.BoolOp):
        p = _prec(e)
        parts = [_paren_if(expr(v), _prec(v) < p) for v in e.values]
        return f" {e.op} ".join(parts)
    if isinstance(e, n.UnaryOp):
        p = _prec(e)
        inner = _paren_if(expr(e.operand), _prec(e.operand) < p)
        return f"not {inner}" if e.op == "not" else f"{e.op}{inner}"
    if isinstance(e, n.Compare):
        parts = [_paren_if(expr(e.left), _prec(e.left) <= _PREC_CMP)]
        for op, c in zip(e.ops, e.comparators):
            parts.append(op)
            parts.append(_paren_if(expr(c), _prec(c) <= _PREC_CMP))
        return " ".join(parts)
    if isinstance(e, n.Call):
        args = [expr(a) for a in e.args]
        args.extend(f"{kw.arg}={expr(kw.value)}" for kw in e.keywords)
        return f"{_postfix_base(e.func)}({', '.join(args)})"
    if isinstance(e, n.Attribute):
        return f"{_postfix_base(e.value)}.{e.attr}"
    if isinstance(e, n.Subscript):
        return f"{_postfix_base(e.value)}[{expr(e.index)}]"
    if isinstance(e, n.SliceExpr):
        lo = expr(e.lower) if e.lower else ""
        hi = expr(e.upper) if e.upper else ""
        if e.step is None:
            return f"{lo}:{hi}"
        return f"{lo}:{hi}:{expr(e.step)}"
    if isinstance(e, n.ListExpr):
        return f"[{', '.join(expr(x) for x in e.elts)}]"
    if isinstance(e, n.TupleExpr):
        if len(e.elts) == 1:
            return f"({expr(e.elts[0])},)"
        return f"({', '.join(expr(x) for x in e.elts)})"
    if isinstance(e, n.SetExpr):
        return f"{{{', '.join(expr(x) for x in e.elts)}}}"
    if isinstance(e, n.DictExpr):
        items = ", ".join(
            f"{expr(k)}: {expr(v)}" for k, v in zip(e.keys, e.values)
        )
        return f"{{{items}}}"
    if isinstance(e, n.IfExp):
        test = _paren_if(expr(e.test), _prec(e.test) <= _PREC_IFEXP)
        body = _paren_if(expr(e.body), _prec(e.body) <= _PREC_IFEXP)
        orelse = _paren_if(expr(e.orelse), _prec(e.orelse) < _PREC_IFEXP)
        return f"{body} if {test} else {orelse}"
    raise TypeError(f"cannot render {type(e).__name__}")


def _postfix_base(e: n.Expr) -> str:
    # Call/attribute/subscript bases bind tighter than any operator.
    needs = _prec(e) < _PREC_ATOM or (
        isinstance(e, n.Constant)
        and isinstance(e.value, (int, float))
        and not isinstance(e.value, bool)
    )
    return _paren_if(expr(e), needs)


def _target(e: n.Expr) -> str:
    if isinstance(e, n.TupleExpr):  # bare tuple target: a, b = ...
        return ", ".join(expr(x) for x in e.elts)
    return expr(e)


def _condition(test: n.Expr, paren: bool) -> str:
    return f"({expr(test)})" if paren else expr(test)


class _Writer:
    def __init__(self):
        self.lines = []

    def emit(self, depth: int, text: str):
        self.lines.append("    " * depth + text)

    def block(self, stmts, depth: int):
        if not stmts:
            self.emit(depth, "pass")
            return
        for s in stmts:
            self.stmt(s, depth)

    def stmt(self, s: n.Stmt, depth: int):
        if isinstance(s, n.FunctionDef):
            args = ", ".join(
                a.name if a.annotation is None else f"{a.name}: {expr(a.annotation)}"
                for a in s.args
            )
            self.emit(depth, f"def {s.name}({args}):")
            self.block(s.body, depth + 1)
        elif isinstance(s, n.Assign):
            self.emit(depth, f"{_target(s.target)} = {expr(s.value)}")
        elif isinstance(s, n.AugAssign):
            self.emit(depth, f"{expr(s.target)} {s.op}= {expr(s.value)}")
        elif isinstance(s, n.For):
            self.emit(depth, f"for {_target(s.target)} in {expr(s.iter)}:")
            self.block(s.body, depth + 1)
        elif isinstance(s, n.While):
            self.emit(depth, f"while {_condition(s.test, s.paren)}:")
            self.block(s.body, depth + 1)
        elif isinstance(s, n.If):
            self._if_chain(s, depth, "if")
        elif isinstance(s, n.Return):
            self.emit(depth, "return" if s.value is None else f"return {expr(s.value)}")
        elif isinstance(s, n.ExprStmt):
            self.emit(depth, expr(s.value))
        elif isinstance(s, n.Break):
            self.emit(depth, "break")
        elif isinstance(s, n.Continue):
            self.emit(depth, "continue")
        elif isinstance(s, n.Pass):
            self.emit(depth, "pass")
        else:
            raise TypeError(f"cannot render {type(s).__name__}")

    def _if_chain(self, s: n.If, depth: int, keyword: str):
        self.emit(depth, f"{keyword} {_condition(s.test, s.paren)}:")
        self.block(s.body, depth + 1)
        if not s.orelse:
            return
        if len(s.orelse) == 1 and isinstance(s.orelse[0], n.If):
            self._if_chain(s.orelse[0], depth, "elif")
        else:
            self.emit(depth, "else:")
            self.block(s.orelse, depth + 1)


def render(tree) -> str:
    """Render a tree (Module or single statement) to source text."""
    w = _Writer()
    if isinstance(tree, n.Module):
        for s in tree.body:
            w.stmt(s, 0)
    else:
        w.stmt(tree, 0)
    return "\n".join(w.lines) + "\n"
