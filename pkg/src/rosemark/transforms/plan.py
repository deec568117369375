"""Transformation plans: validation, application, and state read-back.

A plan carries per-site alternative choices plus a capture-avoiding
variable rename map. Application preserves the normal form; a choice
equal to the current state reconstructs the original statement exactly.
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

from ..errors import CaptureError, InvalidPlanError
from ..syntax import looppat, nodes as n, scopes
from ..syntax.normalize import merge_conjunction
from ..syntax.parse import parse
from ..syntax.render import render
from .naming import realize, split_words
from .sites import (
    AUGMENTED,
    FOR_FORM,
    Family,
    MERGED,
    REGULAR,
    SiteIndex,
    TRUE_FORM,
    TransformSite,
    WHILE_FORM,
    WRAPPED,
    site_index,
)
from .vocab import default_vocab


@dataclass(frozen=True)
class TransformPlan:
    choices: Dict[int, int] = field(default_factory=dict)
    renames: Dict[str, str] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not self.choices and not self.renames


def _validate_choices(index: SiteIndex, plan: TransformPlan) -> Dict[int, TransformSite]:
    by_id = {s.id: s for s in index.sites}
    for site_id, choice in plan.choices.items():
        site = by_id.get(site_id)
        if site is None:
            raise InvalidPlanError("no such site", site_id=site_id)
        if site.family == Family.VARIABLE_RENAME:
            raise InvalidPlanError(
                "rename sites are driven by plan.renames", site_id=site_id
            )
        if choice not in site.alternatives:
            raise InvalidPlanError(
                f"alternative {choice} not applicable", site_id=site_id
            )
    return by_id


def _final_name_maps(index: SiteIndex, plan: TransformPlan):
    """Combine naming-style choices and renames into per-scope name maps.

    A rename fully supersedes a naming-style choice on the same
    identifier. Raises CaptureError when the resulting names collide
    with each other, with free names, or with keywords.
    """
    bound_anywhere = set()
    for info in index.scope_infos:
        bound_anywhere.update(info.bound)
    for name in plan.renames:
        if name not in bound_anywhere:
            raise InvalidPlanError("unknown variable", name=name)
    values = list(plan.renames.values())
    if len(set(values)) != len(values):
        raise CaptureError(
            next(v for v in values if values.count(v) > 1),
            "duplicate replacement identifier",
        )
    for value in values:
        if not value.isidentifier() or keyword.iskeyword(value):
            raise InvalidPlanError("not a usable identifier", name=value)

    restyled: Dict[int, Dict[str, str]] = {}
    for site in index.sites:
        if site.family != Family.NAMING_STYLE:
            continue
        choice = plan.choices.get(site.id)
        if choice is None or choice == site.current_state:
            continue
        if site.name in plan.renames:
            continue  # rename wins
        spelled = realize(split_words(site.name), choice)
        restyled.setdefault(site.scope_id, {})[site.name] = spelled

    module_map: Dict[str, str] = {}
    func_maps: Dict[int, Dict[str, str]] = {}
    func_bound: Dict[int, set] = {}
    fn_ordinal = -1
    for info in index.scope_infos:
        if not isinstance(info.root, n.Module):
            fn_ordinal += 1
        mapping: Dict[str, str] = {}
        scope_restyle = restyled.get(id(info.root), {})
        finals: Dict[str, str] = {}
        for name in info.bound:
            final = plan.renames.get(name) or scope_restyle.get(name) or name
            # every bound name passes through here, so pairwise collisions
            # (including renaming onto a name that keeps its spelling) are
            # caught once the second party is processed
            if final in finals.values():
                raise CaptureError(final, "collides with another identifier")
            if final != name and final in info.free:
                raise CaptureError(final, "captures a free name in scope")
            finals[name] = final
        mapping = {k: v for k, v in finals.items() if k != v}
        if isinstance(info.root, n.Module):
            module_map = mapping
        else:
            func_maps[fn_ordinal] = mapping
            func_bound[fn_ordinal] = set(info.bound)
    return module_map, func_maps, func_bound


class _Applier:
    def __init__(self, index: SiteIndex, plan: TransformPlan):
        self.index = index
        self.plan = plan

    def _choice(self, site: TransformSite) -> int:
        return self.plan.choices.get(site.id, site.current_state)

    def _site(self, node, family) -> Optional[TransformSite]:
        for site in self.index.by_node.get(id(node), ()):
            if site.family == family:
                return site
        return None

    def body(self, stmts) -> tuple:
        out: List[n.Stmt] = []
        i = 0
        while i < len(stmts):
            stmt = stmts[i]
            nxt = stmts[i + 1] if i + 1 < len(stmts) else None
            if nxt is not None and self.index.claim_inits.get(id(stmt)) == id(nxt):
                cl = self.index.claims[id(nxt)]
                site = self._site(nxt, Family.LOOP_TYPE)
                rebuilt = replace(cl, body=self.body(cl.body))
                if self._choice(site) == FOR_FORM:
                    out.append(looppat.materialize_for(rebuilt))
                else:
                    loop = nxt
                    out.append(stmt)
                    out.append(replace(loop, body=rebuilt.body + (loop.body[-1],)))
                i += 2
                continue
            rebuilt = self.stmt(stmt)
            if isinstance(rebuilt, _Pair):
                out.extend(rebuilt.stmts)
            else:
                out.append(rebuilt)
            i += 1
        return tuple(out)

    def stmt(self, stmt) -> n.Stmt:
        if isinstance(stmt, n.FunctionDef):
            return replace(stmt, body=self.body(stmt.body))
        if isinstance(stmt, n.For):
            site = self._site(stmt, Family.LOOP_TYPE)
            rebuilt_body = self.body(stmt.body)
            if site is not None and self._choice(site) == WHILE_FORM:
                cl = looppat.from_for(stmt)
                init, loop = looppat.materialize_while(replace(cl, body=rebuilt_body))
                # two statements; caller flattens
                return _Pair(init, loop)
            return replace(stmt, body=rebuilt_body)
        if isinstance(stmt, n.While):
            test = stmt.test
            cond_site = self._site(stmt, Family.LOOP_CONDITION)
            if cond_site is not None:
                choice = self._choice(cond_site)
                if choice != cond_site.current_state:
                    test = n.Constant(True) if choice == TRUE_FORM else n.Constant(1)
            paren = self._paren(stmt)
            return replace(stmt, test=test, paren=paren, body=self.body(stmt.body))
        if isinstance(stmt, n.If):
            return self._if(stmt)
        if isinstance(stmt, n.Assign):
            site = self._site(stmt, Family.OPERATOR_SUBSTITUTION)
            if site is not None and self._choice(site) == AUGMENTED:
                return n.AugAssign(
                    stmt.target, stmt.value.op, stmt.value.right, span=stmt.span
                )
            return stmt
        if isinstance(stmt, n.AugAssign):
            site = self._site(stmt, Family.OPERATOR_SUBSTITUTION)
            if site is not None and self._choice(site) == REGULAR:
                value = n.BinOp(n.Name(stmt.target.id), stmt.op, stmt.value)
                return n.Assign(stmt.target, value, span=stmt.span)
            return stmt
        return stmt

    def _paren(self, stmt) -> bool:
        site = self._site(stmt, Family.PAREN_CONDITIONS)
        if site is None:
            return stmt.paren
        return self._choice(site) == WRAPPED

    def _if(self, stmt: n.If) -> n.Stmt:
        paren = self._paren(stmt)
        body = self.body(stmt.body)
        orelse = self.body(stmt.orelse)
        site = self._site(stmt, Family.NESTED_CONDITIONS)
        if site is not None and self._choice(site) != site.current_state:
            if site.current_state == MERGED:
                # split the first conjunct off into an outer condition
                values = stmt.test.values
                inner_test = values[1] if len(values) == 2 else n.BoolOp("and", values[1:])
                inner = n.If(inner_test, body, (), paren)
                return n.If(values[0], (inner,), (), paren, span=stmt.span)
            # merge with the single nested conditional
            inner = body[0]
            if isinstance(inner, n.If) and not inner.orelse:
                merged_test = merge_conjunction(stmt.test, inner.test)
                return n.If(merged_test, inner.body, (), paren, span=stmt.span)
        return replace(stmt, paren=paren, body=body, orelse=orelse)


class _Pair:
    """Marker for one statement expanding to two (for -> init+while)."""

    def __init__(self, first, second):
        self.stmts = (first, second)


def apply_plan(tree: n.Module, plan: TransformPlan, vocab: Sequence[str] = None) -> n.Module:
    """Execute a plan; the result re-parses with fresh spans.

    The output's normal form always equals the input's, and re-reading
    state reproduces the plan's choices on surviving sites.
    """
    if vocab is None:
        vocab = default_vocab()
    index = site_index(tree, vocab)
    _validate_choices(index, plan)
    module_map, func_maps, func_bound = _final_name_maps(index, plan)
    applier = _Applier(index, plan)
    structural = replace(tree, body=applier.body(tree.body))
    renamed = scopes.apply_renames(structural, module_map, func_maps, func_bound)
    return parse(render(renamed))


def rename_variables(tree: n.Module, renames: Dict[str, str]) -> n.Module:
    """Consistently rename bound variables, capture-avoiding."""
    return apply_plan(tree, TransformPlan(renames=dict(renames)))


def read_state(tree: n.Module, vocab: Sequence[str] = None) -> TransformPlan:
    """Current channel state: site id -> state for every site."""
    sites = site_index(tree, vocab).sites
    return TransformPlan(choices={s.id: s.current_state for s in sites})


def random_plan(
    tree: n.Module,
    rng,
    vocab: Sequence[str] = None,
    choice_prob: float = 0.6,
    max_renames: int = 2,
    families: Sequence[Family] = None,
) -> TransformPlan:
    """Sample a valid plan: used by robustness tests and benchmarks."""
    if vocab is None:
        vocab = default_vocab()
    index = site_index(tree, vocab)
    taken = set(scopes.all_identifiers(tree))
    choices: Dict[int, int] = {}
    spelled_by_scope: Dict[int, set] = {}
    renames: Dict[str, str] = {}

    rename_sites = [s for s in index.sites if s.family == Family.VARIABLE_RENAME]
    rng.shuffle(rename_sites)
    for site in rename_sites[: rng.integers(0, max_renames + 1)]:
        word = _fresh_word(vocab, rng, taken)
        if word is not None:
            renames[site.name] = word
            taken.add(word)

    for site in index.sites:
        if site.family == Family.VARIABLE_RENAME:
            continue
        if families is not None and site.family not in families:
            continue
        if rng.random() > choice_prob:
            continue
        alts = list(site.alternatives)
        choice = int(alts[rng.integers(0, len(alts))])
        if site.family == Family.NAMING_STYLE:
            if site.name in renames or choice == site.current_state:
                continue
            spelled = realize(split_words(site.name), choice)
            used = spelled_by_scope.setdefault(site.scope_id, set())
            if spelled in taken or spelled in used:
                continue
            used.add(spelled)
        choices[site.id] = choice
    return TransformPlan(choices=choices, renames=renames)


def _fresh_word(vocab, rng, taken):
    for _ in range(16):
        word = vocab[int(rng.integers(0, len(vocab)))]
        if word not in taken:
            return word
    return None
