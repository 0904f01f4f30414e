"""Seeded generators for fuzzing round trips.

Everything here is deterministic in the seed, so a failing case can be
replayed from its number alone. Generated documents stay within the
representable subset: no object key carries a colon or edge whitespace,
no text contains a complete special-token string, and nested tag heads
avoid their root's head so flattening cannot conflict.
"""

from __future__ import annotations

import json
import random

from llmon.machine import DEFAULT_REGISTRY, SpecialTokenRegistry
from llmon.model import (
    Document,
    ListNode,
    Node,
    ObjectNode,
    Scalar,
    ScalarKind,
    TagPath,
    TagSegment,
    Tagged,
)

__all__ = [
    "rand_document",
    "rand_json_value",
    "rand_json_text",
    "rand_special_soup",
    "NASTY_STRINGS",
]

# Tag-name pool; deliberately avoids object/item/list, the cast names,
# and the instr/data/exec vocabulary.
_NAMES = (
    "alpha", "beta", "gamma", "delta", "omega", "kappa",
    "title", "body", "note", "part", "meta", "w0", "field7",
)
_INSTANCES = ("1", "2", "3", "a", "b", "z9", "07")
_KEYS = (
    "name", "size", "two words", "Purpose", "k9", "_hidden",
    "mixedCase", "a.b", "trailing.", "x",
)
_WORDS = ("lorem", "ipsum", "fox", "jumps", "v2", "x_y")

NASTY_STRINGS = (
    "plain words",
    "",
    "  padded  ",
    "true",
    "false",
    "null",
    "42",
    "-7",
    "3.14",
    "1e-07",
    "comma, separated, stuff",
    "colon: in text",
    "back\\slash and /slash/",
    "ends with backslash\\",
    "newline\nin the middle",
    "tab\tand  double space",
    "quote \" and 'single'",
    "unicode café αβγ 中文 \U0001f642",
    "<|open",
    "|>",
    "<| not a token |>",
    "a.b.c",
    "instr:q",
    "{json: like}",
    "[1, 2]",
)

_FLOAT_RAWS = ("3.5", "-0.25", "1e-07", "2.0", "0.125", "6.02e+23")


def _rand_scalar(rng: random.Random) -> Scalar:
    r = rng.random()
    if r < 0.55:
        return Scalar(rng.choice(NASTY_STRINGS))
    if r < 0.70:
        return Scalar(str(rng.randint(-999, 999)), ScalarKind.INTEGER, True)
    if r < 0.80:
        return Scalar(rng.choice(_FLOAT_RAWS), ScalarKind.FLOAT, True)
    if r < 0.90:
        return Scalar(
            rng.choice(("true", "false")), ScalarKind.BOOLEAN, rng.random() < 0.5
        )
    return Scalar("null", ScalarKind.NULL, rng.random() < 0.5)


def _rand_segment(rng: random.Random, exclude: str | None) -> TagSegment:
    names = [n for n in _NAMES if n != exclude]
    inst = rng.choice(_INSTANCES) if rng.random() < 0.25 else None
    return TagSegment(rng.choice(names), inst)


def _rand_tag_path(rng: random.Random, parent_full: TagPath | None) -> TagPath:
    # Occasionally spell out a full extension of the enclosing path.
    if parent_full is not None and rng.random() < 0.15:
        return TagPath(parent_full.segments + (_rand_segment(rng, None),))
    exclude = parent_full.head if parent_full is not None else None
    segs = [_rand_segment(rng, exclude)]
    while rng.random() < 0.2 and len(segs) < 3:
        segs.append(_rand_segment(rng, None))
    return TagPath(tuple(segs))


def _full_of(parent_full: TagPath | None, path: TagPath) -> TagPath:
    if parent_full is None:
        return path
    if path.head == parent_full.head:
        return path
    return parent_full.join(path)


def _rand_node(
    rng: random.Random, budget: list[int], parent_full: TagPath | None, depth: int
) -> Node:
    budget[0] -= 1
    r = rng.random()
    if depth >= 4 or budget[0] <= 0 or r < 0.35:
        return _rand_scalar(rng)
    if r < 0.75:
        path = _rand_tag_path(rng, parent_full)
        if rng.random() < 0.1:
            return Tagged(path, (), self_closed=True)
        full = _full_of(parent_full, path)
        return Tagged(path, _rand_children(rng, budget, full, depth + 1))
    if r < 0.9:
        items = []
        for _ in range(rng.randint(0, 3)):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            key = rng.choice(_KEYS)
            items.append((key, _rand_node(rng, budget, parent_full, depth + 1)))
        return ObjectNode(tuple(items))
    elements = []
    for _ in range(rng.randint(0, 4)):
        if budget[0] <= 0:
            break
        elements.append(_rand_node(rng, budget, parent_full, depth + 1))
    return ListNode(tuple(elements))


def _rand_children(
    rng: random.Random, budget: list[int], parent_full: TagPath, depth: int
) -> tuple[Node, ...]:
    kids = []
    for _ in range(rng.randint(0, 3)):
        if budget[0] <= 0:
            break
        kids.append(_rand_node(rng, budget, parent_full, depth))
    return tuple(kids)


def rand_document(seed: int) -> Document:
    """A document of at most ~40 nodes, representable in both syntaxes."""
    rng = random.Random(seed)
    budget = [rng.randint(4, 40)]
    roots: list[Node] = []
    for _ in range(rng.randint(1, 3)):
        if budget[0] <= 0:
            break
        budget[0] -= 1
        if rng.random() < 0.8:
            path = _rand_tag_path(rng, None)
            roots.append(Tagged(path, _rand_children(rng, budget, path, 1)))
        else:
            roots.append(_rand_scalar(rng))
    if not roots:
        roots.append(_rand_scalar(rng))
    return Document(tuple(roots))


_JSON_STRINGS = NASTY_STRINGS + ("Tokyo", "New York", "0x10", "-")
_JSON_NUMS = (-2.5, 0.125, 3.4, 1e-07, 6.02e23, 0.0)


def rand_json_value(seed: int):
    rng = random.Random(seed)
    budget = [rng.randint(1, 50)]
    return _rand_json(rng, budget, 0)


def _rand_json(rng: random.Random, budget: list[int], depth: int):
    budget[0] -= 1
    r = rng.random()
    if depth >= 4 or budget[0] <= 0 or r < 0.4:
        c = rng.random()
        if c < 0.5:
            return rng.choice(_JSON_STRINGS)
        if c < 0.7:
            return rng.randint(-(10**9), 10**9)
        if c < 0.85:
            return rng.choice(_JSON_NUMS)
        if c < 0.95:
            return rng.random() < 0.5
        return None
    if r < 0.75:
        obj = {}
        for i in range(rng.randint(0, 4)):
            if budget[0] <= 0:
                break
            key = rng.choice(_KEYS)
            if key in obj:
                key = f"{key}{i}"
            obj[key] = _rand_json(rng, budget, depth + 1)
        return obj
    return [
        _rand_json(rng, budget, depth + 1)
        for _ in range(rng.randint(0, 4))
        if budget[0] > 0
    ]


def rand_json_text(seed: int) -> str:
    """JSON text with randomized formatting on top of a random value."""
    rng = random.Random(seed ^ 0x5EED)
    value = rand_json_value(seed)
    indent = rng.choice((None, None, 2, 4))
    return json.dumps(value, ensure_ascii=rng.random() < 0.5, indent=indent)


def rand_special_soup(
    seed: int, registry: SpecialTokenRegistry = DEFAULT_REGISTRY
) -> str:
    """Text mixing complete specials, near-miss fragments, words, and
    whitespace; for tokenizer atomicity checks, not for parsing."""
    rng = random.Random(seed)
    pieces = []
    for _ in range(rng.randint(1, 60)):
        r = rng.random()
        if r < 0.35:
            pieces.append(rng.choice(registry.strings))
        elif r < 0.6:
            pieces.append(rng.choice(_WORDS))
        elif r < 0.8:
            pieces.append(rng.choice((" ", "  ", "\n", "\t", " \n ")))
        else:
            pieces.append(
                rng.choice(("<|", "|>", "<|ope", "n|>", "<|close", "close|>", ".", ":", ","))
            )
    return "".join(pieces)
