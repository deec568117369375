"""Counter-loop recognition: the for/while mapping used by the rewrite
channel and by normalization.

A counter loop is `for v in range(start, stop, step)` or its expanded
form `v = start; while v <cmp> stop: body; v +/-= step`. Conversion is
only offered where the two forms are observably equivalent: constant
step, loop-invariant stop, counter untouched elsewhere, no continue.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Set, Tuple

from . import nodes as n


@dataclass(frozen=True)
class CounterLoop:
    var: str
    start: n.Expr
    stop: n.Expr
    step: int  # non-zero; sign fixes the comparison direction
    body: Tuple[n.Stmt, ...]  # loop body without the increment

    @property
    def cmp(self) -> str:
        return "<" if self.step > 0 else ">"


def const_int(e: n.Expr) -> Optional[int]:
    if isinstance(e, n.Constant) and type(e.value) is int:
        return e.value
    if (
        isinstance(e, n.UnaryOp)
        and e.op in "+-"
        and isinstance(e.operand, n.Constant)
        and type(e.operand.value) is int
    ):
        return e.operand.value if e.op == "+" else -e.operand.value
    return None


def _int_expr(value: int) -> n.Expr:
    if value < 0:
        return n.UnaryOp("-", n.Constant(-value))
    return n.Constant(value)


def match_increment(stmt: n.Stmt, var: str) -> Optional[int]:
    """Step of `var += k`, `var -= k`, `var = var + k`, `var = var - k`."""
    if isinstance(stmt, n.AugAssign):
        if (
            isinstance(stmt.target, n.Name)
            and stmt.target.id == var
            and stmt.op in "+-"
        ):
            k = const_int(stmt.value)
            if k is not None and k > 0:
                return k if stmt.op == "+" else -k
    elif isinstance(stmt, n.Assign):
        if (
            isinstance(stmt.target, n.Name)
            and stmt.target.id == var
            and isinstance(stmt.value, n.BinOp)
            and stmt.value.op in "+-"
            and isinstance(stmt.value.left, n.Name)
            and stmt.value.left.id == var
        ):
            k = const_int(stmt.value.right)
            if k is not None and k > 0:
                return k if stmt.value.op == "+" else -k
    return None


def from_for(node: n.For) -> Optional[CounterLoop]:
    """Structural match of a range-based for loop with constant step."""
    if not isinstance(node.target, n.Name):
        return None
    it = node.iter
    if not (
        isinstance(it, n.Call)
        and isinstance(it.func, n.Name)
        and it.func.id == "range"
        and not it.keywords
        and 1 <= len(it.args) <= 3
    ):
        return None
    if len(it.args) == 1:
        start, stop, step = n.Constant(0), it.args[0], 1
    elif len(it.args) == 2:
        start, stop = it.args
        step = 1
    else:
        start, stop = it.args[0], it.args[1]
        step = const_int(it.args[2])
        if step is None or step == 0:
            return None
    return CounterLoop(node.target.id, start, stop, step, node.body)


def match_counter_while(init: n.Stmt, loop: n.Stmt) -> Optional[CounterLoop]:
    """Structural match of `v = start` followed by a counting while."""
    if not (
        isinstance(init, n.Assign)
        and isinstance(init.target, n.Name)
        and isinstance(loop, n.While)
    ):
        return None
    var = init.target.id
    test = loop.test
    if not (
        isinstance(test, n.Compare)
        and len(test.ops) == 1
        and test.ops[0] in ("<", ">")
        and isinstance(test.left, n.Name)
        and test.left.id == var
    ):
        return None
    if len(loop.body) < 2:
        return None
    step = match_increment(loop.body[-1], var)
    if step is None:
        return None
    if (test.ops[0] == "<") != (step > 0):
        return None
    return CounterLoop(var, init.value, test.comparators[0], step, loop.body[:-1])


def materialize_for(cl: CounterLoop) -> n.For:
    """Minimal-argument range form: range(stop) / range(start, stop) / 3-arg."""
    if cl.step == 1 and cl.start == n.Constant(0):
        args = (cl.stop,)
    elif cl.step == 1:
        args = (cl.start, cl.stop)
    else:
        args = (cl.start, cl.stop, _int_expr(cl.step))
    it = n.Call(n.Name("range"), args)
    return n.For(n.Name(cl.var), it, cl.body)


def materialize_while(cl: CounterLoop) -> Tuple[n.Stmt, n.Stmt]:
    init = n.Assign(n.Name(cl.var), cl.start)
    incr = n.AugAssign(
        n.Name(cl.var), "+" if cl.step > 0 else "-", n.Constant(abs(cl.step))
    )
    test = n.Compare(n.Name(cl.var), (cl.cmp,), (cl.stop,))
    return init, n.While(test, cl.body + (incr,), paren=False)


# --- eligibility -----------------------------------------------------------


def expr_names(e: Optional[n.Expr]) -> Set[str]:
    if e is None:
        return set()
    return {x.id for x in n.walk(e) if isinstance(x, n.Name)}


def names_stored(stmts) -> Set[str]:
    out: Set[str] = set()
    for stmt in stmts:
        for node in n.walk(stmt):
            if isinstance(node, (n.Assign, n.AugAssign)):
                t = node.target
                if isinstance(t, n.Name):
                    out.add(t.id)
                elif isinstance(t, n.TupleExpr):
                    out.update(x.id for x in t.elts if isinstance(x, n.Name))
            elif isinstance(node, n.For) and isinstance(node.target, n.Name):
                out.add(node.target.id)
    return out


def names_used(nodes, skip_ids=frozenset()) -> Set[str]:
    """All identifier mentions, skipping subtrees whose id() is listed."""
    out: Set[str] = set()
    stack = list(nodes)
    while stack:
        node = stack.pop()
        if id(node) in skip_ids:
            continue
        if isinstance(node, n.Name):
            out.add(node.id)
        elif isinstance(node, n.FunctionDef):
            out.update(a.name for a in node.args)
        stack.extend(n.iter_child_nodes(node))
    return out


def _has_continue_at_level(stmts) -> bool:
    for stmt in stmts:
        if isinstance(stmt, n.Continue):
            return True
        if isinstance(stmt, n.If):
            if _has_continue_at_level(stmt.body) or _has_continue_at_level(stmt.orelse):
                return True
        # continue inside a nested loop binds to that loop
    return False


def _attr_call_targets(stmts) -> Set[str]:
    out: Set[str] = set()
    for stmt in stmts:
        for node in n.walk(stmt):
            if (
                isinstance(node, n.Call)
                and isinstance(node.func, n.Attribute)
                and isinstance(node.func.value, n.Name)
            ):
                out.add(node.func.value.id)
    return out


def invariant_expr(e: n.Expr) -> bool:
    """Conservatively loop-invariant shapes: names, ints, arithmetic, len()."""
    if isinstance(e, n.Name):
        return True
    if isinstance(e, n.Constant):
        return type(e.value) is int
    if isinstance(e, n.UnaryOp) and e.op in "+-":
        return invariant_expr(e.operand)
    if isinstance(e, n.BinOp) and e.op in ("+", "-", "*", "//", "%"):
        return invariant_expr(e.left) and invariant_expr(e.right)
    if (
        isinstance(e, n.Call)
        and isinstance(e.func, n.Name)
        and e.func.id == "len"
        and len(e.args) == 1
        and not e.keywords
        and isinstance(e.args[0], n.Name)
    ):
        return True
    return False


def eligible(cl: CounterLoop, outside_names: Set[str]) -> bool:
    """True when both loop forms are observably equivalent in context."""
    if cl.var in outside_names:
        return False
    stored = names_stored(cl.body)
    if cl.var in stored:
        return False
    stop_names = expr_names(cl.stop)
    if cl.var in stop_names or stop_names & stored:
        return False
    if not invariant_expr(cl.stop):
        return False
    if stop_names & _attr_call_targets(cl.body):
        return False
    if _has_continue_at_level(cl.body):
        return False
    return True
