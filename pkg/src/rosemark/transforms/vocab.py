"""Replacement-identifier vocabulary for the rename channel.

One identifier per line, UTF-8, shipped as package data. Words are
plain snake-style tokens, filtered against keywords and common builtin
names so substitutions stay collision-friendly.
"""

from __future__ import annotations

import keyword
from functools import lru_cache
from importlib import resources
from typing import List

_DATA_PACKAGE = "rosemark.transforms.data"
_DEFAULT_FILE = "identifiers.txt"

_BLOCKED = set(keyword.kwlist) | {
    "len", "range", "print", "sum", "min", "max", "abs", "str", "int",
    "float", "list", "dict", "set", "tuple", "sorted", "enumerate", "zip",
    "map", "filter", "round", "bool", "input", "open", "type", "all", "any",
}


def load_vocab(path=None) -> List[str]:
    """Load the identifier list from a file path or the packaged default."""
    if path is None:
        text = resources.files(_DATA_PACKAGE).joinpath(_DEFAULT_FILE).read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    words = []
    seen = set()
    for line in text.splitlines():
        word = line.strip()
        if not word or word in seen:
            continue
        if not word.isidentifier() or word in _BLOCKED:
            continue
        seen.add(word)
        words.append(word)
    return words


@lru_cache(maxsize=1)
def default_vocab() -> tuple:
    return tuple(load_vocab())
