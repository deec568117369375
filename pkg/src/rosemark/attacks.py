"""Adversary simulators for robustness evaluation.

Both attacks preserve the program's normal form: the adversary wants
working code with the signature gone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .syntax import scopes
from .transforms import Family, TransformPlan, apply_plan, site_index
from .transforms.sites import (
    AUGMENTED,
    FOR_FORM,
    MERGED,
    PLAIN,
    TRUE_FORM,
)
from .transforms.naming import SNAKE
from .transforms.vocab import default_vocab


@dataclass(frozen=True)
class AttackConfig:
    kind: str = "VariableRename"  # "VariableRename" | "StyleNormalize"
    fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind == "VariableRename" and not 0.0 <= self.fraction <= 1.0:
            raise ValueError("rename fraction must lie in [0, 1]")


def variable_rename_attack(tree, cfg: AttackConfig,
                           vocab: Optional[Sequence[str]] = None):
    """Rename ceil(fraction * |variables|) bound variables to fresh
    vocabulary words, chosen uniformly under a seeded generator."""
    if vocab is None:
        vocab = default_vocab()
    rng = np.random.default_rng(cfg.seed)
    index = site_index(tree, vocab)
    rename_sites = index.of_family(Family.VARIABLE_RENAME)
    if not rename_sites or cfg.fraction == 0.0:
        return tree
    count = math.ceil(cfg.fraction * len(rename_sites))
    chosen = rng.choice(len(rename_sites), size=count, replace=False)
    taken = set(scopes.all_identifiers(tree))
    renames = {}
    for pos in sorted(int(c) for c in chosen):
        site = rename_sites[pos]
        word = _fresh(vocab, rng, taken)
        if word is None:
            continue
        renames[site.name] = word
        taken.add(word)
    if not renames:
        return tree
    return apply_plan(tree, TransformPlan(renames=renames), vocab)


def _fresh(vocab, rng, taken):
    for _ in range(32):
        word = vocab[int(rng.integers(0, len(vocab)))]
        if word not in taken:
            return word
    return None


_CANONICAL_STATE = {
    Family.NAMING_STYLE: SNAKE,
    Family.LOOP_TYPE: FOR_FORM,
    Family.LOOP_CONDITION: TRUE_FORM,
    Family.NESTED_CONDITIONS: MERGED,
    Family.OPERATOR_SUBSTITUTION: AUGMENTED,
    Family.PAREN_CONDITIONS: PLAIN,
}


def style_normalize_attack(tree, vocab: Optional[Sequence[str]] = None):
    """Deterministically rewrite every site to one fixed house style,
    erasing all syntactic watermark choices. Idempotent."""
    if vocab is None:
        vocab = default_vocab()
    from .transforms.naming import realize, split_words

    index = site_index(tree, vocab)
    taken = set(scopes.all_identifiers(tree))
    spelled_per_scope = {}
    choices = {}
    for site in index.sites:
        if site.family == Family.VARIABLE_RENAME:
            continue
        target = _CANONICAL_STATE[site.family]
        if target not in site.alternatives or target == site.current_state:
            continue
        if site.family == Family.NAMING_STYLE:
            spelled = realize(split_words(site.name), target)
            used = spelled_per_scope.setdefault(site.scope_id, set())
            if spelled in taken or spelled in used:
                continue  # restyle would collide; leave this identifier
            used.add(spelled)
        choices[site.id] = target
    if not choices:
        return tree
    return apply_plan(tree, TransformPlan(choices=choices), vocab)
