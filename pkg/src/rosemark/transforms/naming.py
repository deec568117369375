"""Identifier naming-style classification and restyling.

Five styles form the per-identifier channel: PascalCase, camelCase,
snake_case, leading-underscore snake, and ALL_CAPS. An identifier is
stylable only when classification and realization round-trip, so state
can always be read back off rendered code.
"""

from __future__ import annotations

import re
from typing import List, Optional

PASCAL, CAMEL, SNAKE, UNDERSCORE, ALLCAPS = range(5)
STYLE_NAMES = ("PascalCase", "camelCase", "snake_case", "_underscore_init", "ALL_CAPS")
N_STYLES = 5

_HUMP_RE = re.compile(r"[A-Za-z][a-z0-9]*|[0-9]+")


def split_words(name: str) -> List[str]:
    """Lower-cased word parts: underscores and case humps both split."""
    parts: List[str] = []
    for chunk in name.strip("_").split("_"):
        if not chunk:
            continue
        if chunk.upper() == chunk:
            parts.append(chunk.lower())  # all-caps/digit chunk is one word
        else:
            parts.extend(m.group(0).lower() for m in _HUMP_RE.finditer(chunk))
    return parts or [name.strip("_").lower() or name]


def realize(words: List[str], style: int) -> str:
    if style == SNAKE:
        return "_".join(words)
    if style == CAMEL:
        return words[0] + "".join(w.capitalize() for w in words[1:])
    if style == PASCAL:
        return "".join(w.capitalize() for w in words)
    if style == UNDERSCORE:
        return "_" + "_".join(words)
    if style == ALLCAPS:
        return "_".join(words).upper()
    raise ValueError(f"unknown style {style}")


def classify(name: str) -> Optional[int]:
    """Deterministic style of an identifier; None when unreadable."""
    if not name:
        return None
    has_alpha = any(c.isalpha() for c in name)
    if not has_alpha:
        return None
    if name[0] == "_":
        return UNDERSCORE
    if name.upper() == name:
        return ALLCAPS
    if "_" in name:
        return SNAKE
    if name[0].isupper():
        return PASCAL
    if any(c.isupper() for c in name):
        return CAMEL
    return SNAKE  # plain lowercase word


def stylable(name: str) -> bool:
    """True when the current style can be read back off the spelling."""
    style = classify(name)
    if style is None:
        return False
    return realize(split_words(name), style) == name


def style_alternatives(name: str) -> List[int]:
    """Styles reachable from this identifier with distinct, readable spellings."""
    if not stylable(name):
        return []
    words = split_words(name)
    seen = {}
    out = []
    for style in range(N_STYLES):
        spelled = realize(words, style)
        if classify(spelled) != style or realize(split_words(spelled), style) != spelled:
            continue  # spelling would read back as a different style
        if spelled in seen:
            continue
        seen[spelled] = style
        out.append(style)
    return out
