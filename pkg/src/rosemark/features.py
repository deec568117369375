"""Raw code features: hashed token n-grams plus a channel-state summary.

The summary block exposes per-family site-state counts directly, so the
extractor can read the style channel without relearning tokenization;
the n-gram block carries identifier content for the rename channel.
"""

from __future__ import annotations

import re
import zlib
from typing import List, Sequence

import numpy as np

from .syntax import render
from .transforms import Family, TransformSite

TOKEN_RE = re.compile(
    r"[A-Za-z_][A-Za-z_0-9]*"      # identifiers and keywords
    r"|\d+(?:\.\d+)?"               # numbers
    r"|\"(?:[^\"\\]|\\.)*\""        # double-quoted strings
    r"|'(?:[^'\\]|\\.)*'"           # single-quoted strings
    r"|[^\sA-Za-z_0-9]+"            # operator/punctuation runs
)

N_FAMILIES = 7
STATE_SLOTS = 10
SUMMARY_DIM = N_FAMILIES * STATE_SLOTS


def tokens(text: str) -> List[str]:
    return TOKEN_RE.findall(text)


def _bucket(gram: str, n_buckets: int) -> int:
    return zlib.crc32(gram.encode("utf-8")) % n_buckets


def _summary_slot(site: TransformSite) -> int:
    if site.family == Family.VARIABLE_RENAME:
        # coarse: replacement drawn from the vocabulary or not
        in_vocab = site.current_state < len(site.alternatives) - 1
        slot = 1 if in_vocab else 0
    else:
        slot = min(site.current_state, STATE_SLOTS - 1)
    return int(site.family) * STATE_SLOTS + slot


def featurize(
    tree, sites: Sequence[TransformSite], n_buckets: int,
    summary_scale: float = 4.0,
) -> np.ndarray:
    """Feature vector of length n_buckets + SUMMARY_DIM (float32).

    The summary block is scaled up so the narrow style channel is not
    drowned by the wide n-gram block in downstream projections.
    """
    toks = tokens(render(tree))
    counts = np.zeros(n_buckets, dtype=np.float32)
    for size in (1, 2, 3):
        for i in range(len(toks) - size + 1):
            gram = "\x1f".join(toks[i : i + size])
            counts[_bucket(gram, n_buckets)] += 1.0
    summary = np.zeros(SUMMARY_DIM, dtype=np.float32)
    for site in sites:
        summary[_summary_slot(site)] += 1.0
    return np.concatenate([np.log1p(counts), summary * summary_scale])


def raw_dim(n_buckets: int) -> int:
    return n_buckets + SUMMARY_DIM
