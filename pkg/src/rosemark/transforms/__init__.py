"""The rewrite channel: six syntactic families plus variable renaming."""

from .naming import STYLE_NAMES, classify, realize, split_words, style_alternatives
from .plan import (
    TransformPlan,
    apply_plan,
    random_plan,
    read_state,
    rename_variables,
)
from .sites import Family, SiteIndex, TransformSite, enumerate_sites, site_index
from .vocab import default_vocab, load_vocab

__all__ = [
    "Family",
    "STYLE_NAMES",
    "SiteIndex",
    "TransformPlan",
    "TransformSite",
    "apply_plan",
    "classify",
    "default_vocab",
    "enumerate_sites",
    "load_vocab",
    "random_plan",
    "read_state",
    "realize",
    "rename_variables",
    "site_index",
    "split_words",
    "style_alternatives",
]
