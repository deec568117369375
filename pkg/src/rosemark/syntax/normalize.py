"""Canonicalization: map every styling of a program to one normal form.

Two programs that differ only by rewrite-channel choices (naming style,
loop form, loop condition spelling, condition nesting, assignment
operator form, condition parentheses) and/or consistent renaming share a
normal form. Equality of normal forms is the toolkit's semantic oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import looppat, nodes as n, scopes
from .render import render


@dataclass(frozen=True)
class NormalForm:
    tree: n.Module
    alpha_map: dict  # original identifier -> canonical placeholder
    text: str

    def __eq__(self, other):
        return isinstance(other, NormalForm) and self.text == other.text

    def __hash__(self):
        return hash(self.text)


def _map_stmts(stmts, fn):
    out = []
    for s in stmts:
        r = fn(s)
        out.extend(r if isinstance(r, list) else [r])
    return tuple(out)


# pass 1: augmented assignment on plain names -> regular assignment


def _plain_assign(stmt):
    if isinstance(stmt, n.AugAssign) and isinstance(stmt.target, n.Name):
        value = n.BinOp(n.Name(stmt.target.id), stmt.op, stmt.value)
        return n.Assign(stmt.target, value, span=stmt.span)
    return _descend(stmt, _plain_assign)


def _descend(stmt, fn):
    if isinstance(stmt, n.FunctionDef):
        return replace(stmt, body=_map_stmts(stmt.body, fn))
    if isinstance(stmt, n.For):
        return replace(stmt, body=_map_stmts(stmt.body, fn))
    if isinstance(stmt, n.While):
        return replace(stmt, body=_map_stmts(stmt.body, fn))
    if isinstance(stmt, n.If):
        return replace(
            stmt, body=_map_stmts(stmt.body, fn), orelse=_map_stmts(stmt.orelse, fn)
        )
    return stmt


# pass 2: loop canonicalization (counter whiles -> for, minimal range args,
#         `while 1` -> `while True`)


def _canonical_loops(tree: n.Module) -> n.Module:
    def rewrite_body(stmts, scope_body):
        out = []
        i = 0
        while i < len(stmts):
            stmt = stmts[i]
            nxt = stmts[i + 1] if i + 1 < len(stmts) else None
            if nxt is not None:
                cl = looppat.match_counter_while(stmt, nxt)
                if cl is not None:
                    outside = looppat.names_used(
                        scope_body, skip_ids={id(stmt), id(nxt)}
                    )
                    if looppat.eligible(cl, outside):
                        body = rewrite_body(cl.body, scope_body)
                        out.append(looppat.materialize_for(replace(cl, body=body)))
                        i += 2
                        continue
            out.append(rewrite_stmt(stmt, scope_body))
            i += 1
        return tuple(out)

    def rewrite_stmt(stmt, scope_body):
        if isinstance(stmt, n.FunctionDef):
            return replace(stmt, body=rewrite_body(stmt.body, stmt.body))
        if isinstance(stmt, n.For):
            body = rewrite_body(stmt.body, scope_body)
            cl = looppat.from_for(replace(stmt, body=body))
            if cl is not None:
                return looppat.materialize_for(cl)
            return replace(stmt, body=body)
        if isinstance(stmt, n.While):
            test = stmt.test
            if test == n.Constant(1):
                test = n.Constant(True)
            return replace(stmt, test=test, body=rewrite_body(stmt.body, scope_body))
        if isinstance(stmt, n.If):
            return replace(
                stmt,
                body=rewrite_body(stmt.body, scope_body),
                orelse=rewrite_body(stmt.orelse, scope_body),
            )
        return stmt

    return replace(tree, body=rewrite_body(tree.body, tree.body))


# pass 3: merge single-branch nested conditionals, flatten boolean chains


def flatten_bool(e: n.Expr) -> n.Expr:
    if not isinstance(e, n.Expr):
        return e
    if isinstance(e, n.BoolOp):
        values = []
        for v in e.values:
            fv = flatten_bool(v)
            if isinstance(fv, n.BoolOp) and fv.op == e.op:
                values.extend(fv.values)
            else:
                values.append(fv)
        return n.BoolOp(e.op, tuple(values), span=e.span)
    return _rebuild_exprs(e, flatten_bool)


def _rebuild_exprs(node, fn):
    changes = {}
    for f in scopes._fields_cache(type(node)):
        value = getattr(node, f)
        if isinstance(value, n.Expr):
            changes[f] = fn(value)
        elif isinstance(value, tuple) and value and isinstance(value[0], n.Expr):
            changes[f] = tuple(fn(v) for v in value)
        elif isinstance(value, n.Keyword):
            changes[f] = replace(value, value=fn(value.value))
        elif isinstance(value, tuple) and value and isinstance(value[0], n.Keyword):
            changes[f] = tuple(replace(k, value=fn(k.value)) for k in value)
    return replace(node, **changes) if changes else node


def merge_conjunction(outer_test: n.Expr, inner_test: n.Expr) -> n.Expr:
    values = []
    for t in (outer_test, inner_test):
        if isinstance(t, n.BoolOp) and t.op == "and":
            values.extend(t.values)
        else:
            values.append(t)
    return n.BoolOp("and", tuple(values))


def _merge_ifs(stmt):
    stmt = _descend(stmt, _merge_ifs)
    if isinstance(stmt, n.If) and not stmt.orelse:
        while (
            len(stmt.body) == 1
            and isinstance(stmt.body[0], n.If)
            and not stmt.body[0].orelse
        ):
            inner = stmt.body[0]
            stmt = n.If(
                merge_conjunction(stmt.test, inner.test),
                inner.body,
                (),
                stmt.paren,
                span=stmt.span,
            )
    return stmt


def _flatten_stmt(stmt):
    stmt = _descend(stmt, _flatten_stmt)
    return _rebuild_exprs(stmt, flatten_bool)


# pass 4: strip condition parentheses


def _strip_parens(stmt):
    stmt = _descend(stmt, _strip_parens)
    if isinstance(stmt, (n.If, n.While)) and stmt.paren:
        return replace(stmt, paren=False)
    return stmt


# pass 5: alpha-rename bound identifiers in declaration order


def _fresh_prefix(tree: n.Module) -> str:
    taken = scopes.all_identifiers(tree)
    prefix = "_nm"
    while any(name.startswith(prefix) for name in taken):
        prefix += "x"
    return prefix


def _alpha(tree: n.Module):
    infos = scopes.analyze(tree)
    prefix = _fresh_prefix(tree)
    module_map = {}
    func_maps = {}
    func_bound = {}
    alpha = {}
    for k, name in enumerate(infos[0].bound):
        module_map[name] = f"{prefix}{k}"
        alpha[name] = module_map[name]
    for fn_index, info in enumerate(infos[1:]):
        fmap = {}
        for k, name in enumerate(info.bound):
            fmap[name] = f"{prefix}f{fn_index}_{k}"
            alpha.setdefault(name, fmap[name])
        func_maps[fn_index] = fmap
        func_bound[fn_index] = set(info.bound)
    renamed = scopes.apply_renames(tree, module_map, func_maps, func_bound)
    return renamed, alpha


def normalize(tree: n.Module) -> NormalForm:
    """Canonical form, invariant under every rewrite-channel choice."""
    out = replace(tree, body=_map_stmts(tree.body, _plain_assign))
    out = _canonical_loops(out)
    out = replace(out, body=_map_stmts(out.body, _merge_ifs))
    out = replace(out, body=_map_stmts(out.body, _flatten_stmt))
    out = replace(out, body=_map_stmts(out.body, _strip_parens))
    out, alpha = _alpha(out)
    return NormalForm(out, alpha, render(out))
