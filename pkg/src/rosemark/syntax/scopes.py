"""Lexical scope analysis for the supported subset.

Scopes are flat: the module scope plus one scope per top-level function
(nested defs are outside the subset). Every Name either resolves to the
binding list of its enclosing scope or is free (builtins, globals).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dataclass_fields, replace
from typing import Dict, List, Set, Tuple

from . import nodes as n


@dataclass
class ScopeInfo:
    root: n.Node
    params: Tuple[str, ...]
    bound: Tuple[str, ...]  # params first, then locals in first-store order
    free: Set[str] = field(default_factory=set)

    @property
    def locals(self) -> Tuple[str, ...]:
        return self.bound[len(self.params):]


def _store_names(target: n.Expr) -> List[str]:
    if isinstance(target, n.Name):
        return [target.id]
    if isinstance(target, n.TupleExpr):
        return [e.id for e in target.elts if isinstance(e, n.Name)]
    return []  # subscript/attribute stores bind nothing


def _collect(body, params: Tuple[str, ...]):
    bound: List[str] = list(params)
    seen: Set[str] = set(params)
    loads: List[str] = []

    def visit(node):
        if isinstance(node, (n.Assign, n.AugAssign)):
            # value side first: `x = x + 1` loads x before (re)binding it
            visit_expr(node.value)
            for name in _store_names(node.target):
                if name not in seen:
                    seen.add(name)
                    bound.append(name)
            if not isinstance(node.target, (n.Name, n.TupleExpr)):
                visit_expr(node.target)
        elif isinstance(node, n.For):
            visit_expr(node.iter)
            for name in _store_names(node.target):
                if name not in seen:
                    seen.add(name)
                    bound.append(name)
            for s in node.body:
                visit(s)
        elif isinstance(node, n.While):
            visit_expr(node.test)
            for s in node.body:
                visit(s)
        elif isinstance(node, n.If):
            visit_expr(node.test)
            for s in node.body:
                visit(s)
            for s in node.orelse:
                visit(s)
        elif isinstance(node, n.Return):
            if node.value is not None:
                visit_expr(node.value)
        elif isinstance(node, n.ExprStmt):
            visit_expr(node.value)
        elif isinstance(node, (n.Break, n.Continue, n.Pass)):
            pass
        elif isinstance(node, n.FunctionDef):
            # module scope binds the function's name; its body is a new scope
            if node.name not in seen:
                seen.add(node.name)
                bound.append(node.name)
        else:
            visit_expr(node)

    def visit_expr(e):
        if isinstance(e, n.Name):
            loads.append(e.id)
            return
        for child in n.iter_child_nodes(e):
            visit_expr(child)

    for stmt in body:
        visit(stmt)
    free = {name for name in loads if name not in seen}
    return bound, free


def _annotation_names(func: n.FunctionDef) -> Set[str]:
    names: Set[str] = set()
    for a in func.args:
        if a.annotation is not None:
            for node in n.walk(a.annotation):
                if isinstance(node, n.Name):
                    names.add(node.id)
    return names


def analyze(tree: n.Module) -> List[ScopeInfo]:
    """Return scope info for the module and each top-level function."""
    scopes: List[ScopeInfo] = []
    bound, free = _collect(tree.body, ())
    scopes.append(ScopeInfo(tree, (), tuple(bound), free))
    for stmt in tree.body:
        if isinstance(stmt, n.FunctionDef):
            params = tuple(a.name for a in stmt.args)
            fbound, ffree = _collect(stmt.body, params)
            ffree |= _annotation_names(stmt) - set(fbound)
            scopes.append(ScopeInfo(stmt, params, tuple(fbound), ffree))
    return scopes


def scope_of(scopes: List[ScopeInfo], name_holder: n.Node) -> ScopeInfo:
    for info in scopes:
        if info.root is name_holder:
            return info
    return scopes[0]


def apply_renames(
    tree: n.Module,
    module_map: Dict[str, str],
    func_maps: Dict[int, Dict[str, str]],
    func_bound: Dict[int, Set[str]],
) -> n.Module:
    """Rename bound identifiers, scope-aware.

    Function scopes are keyed by ordinal (k-th function definition in the
    module). Inside a function, a name renames through that function's
    map when bound there; otherwise a free occurrence of a module-bound
    name follows the module map (flat lexical chain of the subset).
    Attribute names, keyword-argument names, and string contents are
    untouched.
    """
    counter = {"next": 0}

    def rename(name: str, ordinal) -> str:
        if ordinal is not None and name in func_bound.get(ordinal, set()):
            return func_maps.get(ordinal, {}).get(name, name)
        return module_map.get(name, name)

    def rebuild(node, ordinal):
        if isinstance(node, n.Name):
            new = rename(node.id, ordinal)
            return node if new == node.id else n.Name(new, span=node.span)
        if isinstance(node, n.FunctionDef):
            me = counter["next"]
            counter["next"] += 1
            args = tuple(
                n.Arg(rename(a.name, me),
                      rebuild(a.annotation, me) if a.annotation else None)
                for a in node.args
            )
            body = tuple(rebuild(s, me) for s in node.body)
            return n.FunctionDef(
                module_map.get(node.name, node.name), args, body, span=node.span
            )
        if node is None or not isinstance(node, n.Node):
            return node
        changes = {}
        for f in _fields_cache(type(node)):
            value = getattr(node, f)
            if isinstance(value, n.Node):
                changes[f] = rebuild(value, ordinal)
            elif isinstance(value, tuple) and value and isinstance(value[0], n.Node):
                changes[f] = tuple(rebuild(item, ordinal) for item in value)
        if not changes:
            return node
        return replace(node, **changes)

    return rebuild(tree, None)


_FIELDS: Dict[type, Tuple[str, ...]] = {}


def _fields_cache(cls) -> Tuple[str, ...]:
    cached = _FIELDS.get(cls)
    if cached is None:
        cached = tuple(
            f.name for f in dataclass_fields(cls) if f.name not in ("span",)
        )
        _FIELDS[cls] = cached
    return cached


def all_identifiers(tree: n.Module) -> Set[str]:
    """Every identifier textually present: bound, free, and attribute names."""
    names: Set[str] = set()
    for node in n.walk(tree):
        if isinstance(node, n.Name):
            names.add(node.id)
        elif isinstance(node, n.Attribute):
            names.add(node.attr)
        elif isinstance(node, n.FunctionDef):
            names.add(node.name)
            names.update(a.name for a in node.args)
        elif isinstance(node, n.Call):
            names.update(kw.arg for kw in node.keywords)
    return names
