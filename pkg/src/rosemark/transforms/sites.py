"""Transformation-site enumeration.

Walks a tree in pre-order and emits every location where the rewrite
channel can act: per-identifier naming style and rename sites, loop
form, infinite-loop condition spelling, condition nesting, assignment
operator form, and condition parentheses.

The loop-header machinery of a convertible counter loop (its init
assignment, comparison, and increment) belongs to the LoopType site and
is not independently transformable; this keeps the site lists of the
two loop forms aligned one-to-one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..syntax import looppat, nodes as n, scopes
from .naming import classify, realize, split_words, style_alternatives
from .vocab import default_vocab

AUG_OPS = ("+", "-", "*", "/", "//", "%", "**", "&", "|", "^", "<<", ">>")


class Family(enum.IntEnum):
    NAMING_STYLE = 0
    LOOP_TYPE = 1
    LOOP_CONDITION = 2
    NESTED_CONDITIONS = 3
    OPERATOR_SUBSTITUTION = 4
    PAREN_CONDITIONS = 5
    VARIABLE_RENAME = 6


# state encodings
FOR_FORM, WHILE_FORM = 0, 1
TRUE_FORM, ONE_FORM = 0, 1
MERGED, NESTED = 0, 1
REGULAR, AUGMENTED = 0, 1
PLAIN, WRAPPED = 0, 1


@dataclass(frozen=True)
class TransformSite:
    id: int
    family: Family
    span: n.Span
    current_state: int
    alternatives: Sequence[int]
    name: Optional[str] = None
    node: Optional[n.Node] = field(default=None, compare=False, repr=False)
    scope_id: int = 0


@dataclass
class SiteIndex:
    """Sites plus the structural bookkeeping the plan applier needs."""

    sites: List[TransformSite]
    claims: Dict[int, looppat.CounterLoop]  # id(While) -> matched counter loop
    claim_inits: Dict[int, int]  # id(init Assign) -> id(While)
    by_node: Dict[int, List[TransformSite]]
    scope_infos: List[scopes.ScopeInfo]

    def of_family(self, family: Family) -> List[TransformSite]:
        return [s for s in self.sites if s.family == family]


def _op_subst_state(stmt: n.Stmt) -> Optional[int]:
    if isinstance(stmt, n.AugAssign):
        if isinstance(stmt.target, n.Name) and stmt.op in AUG_OPS:
            return AUGMENTED
        return None
    if isinstance(stmt, n.Assign):
        if (
            isinstance(stmt.target, n.Name)
            and isinstance(stmt.value, n.BinOp)
            and stmt.value.op in AUG_OPS
            and isinstance(stmt.value.left, n.Name)
            and stmt.value.left.id == stmt.target.id
        ):
            return REGULAR
    return None


def _nested_state(stmt: n.If) -> Optional[int]:
    if stmt.orelse:
        return None
    if isinstance(stmt.test, n.BoolOp) and stmt.test.op == "and":
        return MERGED
    if (
        len(stmt.body) == 1
        and isinstance(stmt.body[0], n.If)
        and not stmt.body[0].orelse
    ):
        return NESTED
    return None


def _loop_condition_state(test: n.Expr) -> Optional[int]:
    if isinstance(test, n.Constant):
        if test.value is True:
            return TRUE_FORM
        if type(test.value) is int and test.value == 1:
            return ONE_FORM
    return None


class _Enumerator:
    def __init__(self, tree: n.Module, vocab: Sequence[str]):
        self.tree = tree
        self.vocab = list(vocab)
        self.vocab_index = {w: i for i, w in enumerate(self.vocab)}
        self.scope_infos = scopes.analyze(tree)
        self.existing = scopes.all_identifiers(tree)
        self.sites: List[TransformSite] = []
        self.claims: Dict[int, looppat.CounterLoop] = {}
        self.claim_inits: Dict[int, int] = {}
        self._seen_names: Dict[int, set] = {}

    def run(self) -> SiteIndex:
        self._walk_body(self.tree.body, self.scope_infos[0])
        by_node: Dict[int, List[TransformSite]] = {}
        for s in self.sites:
            if s.node is not None:
                by_node.setdefault(id(s.node), []).append(s)
        return SiteIndex(self.sites, self.claims, self.claim_inits, by_node, self.scope_infos)

    # -- emission helpers ----------------------------------------------------

    def _emit(self, family, node, state, alternatives, name=None, scope=None):
        self.sites.append(
            TransformSite(
                id=len(self.sites),
                family=family,
                span=getattr(node, "span", n.EMPTY_SPAN),
                current_state=state,
                alternatives=alternatives,
                name=name,
                node=node,
                scope_id=id(scope.root) if scope else 0,
            )
        )

    def _ident_sites(self, name: str, scope: scopes.ScopeInfo, node: n.Node):
        seen = self._seen_names.setdefault(id(scope.root), set())
        if name in seen or name not in scope.bound:
            return
        seen.add(name)
        alts = self._naming_alternatives(name)
        if len(alts) >= 2:
            self._emit(
                Family.NAMING_STYLE, node, classify(name), tuple(alts),
                name=name, scope=scope,
            )
        current = self.vocab_index.get(name, len(self.vocab))
        self._emit(
            Family.VARIABLE_RENAME, node, current,
            range(len(self.vocab) + 1), name=name, scope=scope,
        )

    def _naming_alternatives(self, name: str) -> List[int]:
        out = []
        words = split_words(name)
        for style in style_alternatives(name):
            spelled = realize(words, style)
            if spelled != name and spelled in self.existing:
                continue  # collides with an identifier already in the program
            out.append(style)
        return out

    def _bind_target(self, target: n.Expr, scope, node):
        if isinstance(target, n.Name):
            self._ident_sites(target.id, scope, node)
        elif isinstance(target, n.TupleExpr):
            for elt in target.elts:
                if isinstance(elt, n.Name):
                    self._ident_sites(elt.id, scope, node)

    # -- walk -----------------------------------------------------------------

    def _scope_body(self, scope: scopes.ScopeInfo):
        root = scope.root
        return root.body if isinstance(root, (n.FunctionDef, n.Module)) else ()

    def _walk_body(self, stmts, scope):
        i = 0
        while i < len(stmts):
            stmt = stmts[i]
            nxt = stmts[i + 1] if i + 1 < len(stmts) else None
            if nxt is not None and isinstance(nxt, n.While):
                cl = looppat.match_counter_while(stmt, nxt)
                if cl is not None:
                    outside = looppat.names_used(
                        self._scope_body(scope), skip_ids={id(stmt), id(nxt)}
                    )
                    if looppat.eligible(cl, outside):
                        self._bind_target(stmt.target, scope, stmt)
                        self._emit(
                            Family.LOOP_TYPE, nxt, WHILE_FORM, (FOR_FORM, WHILE_FORM),
                            name=cl.var, scope=scope,
                        )
                        self.claims[id(nxt)] = cl
                        self.claim_inits[id(stmt)] = id(nxt)
                        self._walk_body(cl.body, scope)
                        i += 2
                        continue
            self._walk_stmt(stmt, scope)
            i += 1

    def _walk_stmt(self, stmt, scope):
        if isinstance(stmt, n.FunctionDef):
            fscope = scopes.scope_of(self.scope_infos, stmt)
            for arg in stmt.args:
                self._ident_sites(arg.name, fscope, stmt)
            self._walk_body(stmt.body, fscope)
        elif isinstance(stmt, n.For):
            cl = looppat.from_for(stmt)
            if cl is not None:
                outside = looppat.names_used(
                    self._scope_body(scope), skip_ids={id(stmt)}
                )
                if looppat.eligible(cl, outside):
                    self._emit(
                        Family.LOOP_TYPE, stmt, FOR_FORM, (FOR_FORM, WHILE_FORM),
                        name=cl.var, scope=scope,
                    )
            self._bind_target(stmt.target, scope, stmt)
            self._walk_body(stmt.body, scope)
        elif isinstance(stmt, n.While):
            cond_state = _loop_condition_state(stmt.test)
            if cond_state is not None:
                self._emit(
                    Family.LOOP_CONDITION, stmt, cond_state, (TRUE_FORM, ONE_FORM),
                    scope=scope,
                )
            self._emit(
                Family.PAREN_CONDITIONS, stmt, WRAPPED if stmt.paren else PLAIN,
                (PLAIN, WRAPPED), scope=scope,
            )
            self._walk_body(stmt.body, scope)
        elif isinstance(stmt, n.If):
            nested = _nested_state(stmt)
            if nested is not None:
                self._emit(
                    Family.NESTED_CONDITIONS, stmt, nested, (MERGED, NESTED),
                    scope=scope,
                )
            self._emit(
                Family.PAREN_CONDITIONS, stmt, WRAPPED if stmt.paren else PLAIN,
                (PLAIN, WRAPPED), scope=scope,
            )
            self._walk_body(stmt.body, scope)
            self._walk_body(stmt.orelse, scope)
        elif isinstance(stmt, n.Assign):
            state = _op_subst_state(stmt)
            if state is not None:
                self._emit(
                    Family.OPERATOR_SUBSTITUTION, stmt, state, (REGULAR, AUGMENTED),
                    name=stmt.target.id, scope=scope,
                )
            self._bind_target(stmt.target, scope, stmt)
        elif isinstance(stmt, n.AugAssign):
            state = _op_subst_state(stmt)
            if state is not None:
                self._emit(
                    Family.OPERATOR_SUBSTITUTION, stmt, state, (REGULAR, AUGMENTED),
                    name=stmt.target.id, scope=scope,
                )
            self._bind_target(stmt.target, scope, stmt)


def enumerate_sites(tree: n.Module, vocab: Sequence[str] = None) -> List[TransformSite]:
    """Deterministic pre-order listing of all transformation sites."""
    return site_index(tree, vocab).sites


def site_index(tree: n.Module, vocab: Sequence[str] = None) -> SiteIndex:
    if vocab is None:
        vocab = default_vocab()
    return _Enumerator(tree, vocab).run()
