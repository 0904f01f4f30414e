"""Document model: tag paths, nodes, and whole documents.

A Document is an ordered forest. Tagged spans carry dotted tag paths whose
segments may have `:instance` suffixes; Object/List/Scalar mirror JSON.
Node identity is positional: a node's id is its preorder index.
"""

from __future__ import annotations

import contextlib
import re
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from llmon.errors import ParseError

__all__ = [
    "TagSegment",
    "TagPath",
    "parse_tag_path",
    "serialize_tag_path",
    "ScalarKind",
    "Scalar",
    "Tagged",
    "ObjectNode",
    "ListNode",
    "Node",
    "Document",
    "iter_spans",
    "children_of",
    "MAX_DEPTH",
]

# First character of a whole tag is [_a-zA-Z]; later segment names may start
# with digits (the tag-text charset only constrains the first character).
_NAME_RE = re.compile(r"[_a-zA-Z0-9]+")
_FIRST_NAME_RE = re.compile(r"[_a-zA-Z][_a-zA-Z0-9]*")
_INSTANCE_RE = re.compile(r"[_a-zA-Z0-9]+")

MAX_DEPTH = 1024


@dataclass(frozen=True, slots=True)
class TagSegment:
    """One dotted path segment: a name plus optional instance suffix."""

    name: str
    instance: str | None = None

    def serialize(self) -> str:
        if self.instance is None:
            return self.name
        return f"{self.name}:{self.instance}"


@dataclass(frozen=True, slots=True)
class TagPath:
    segments: tuple[TagSegment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ParseError("EMPTY_SEGMENT", "tag path has no segments")
        for i, seg in enumerate(self.segments):
            name_re = _FIRST_NAME_RE if i == 0 else _NAME_RE
            if not name_re.fullmatch(seg.name):
                raise ParseError(
                    "INVALID_TAG_TEXT", f"bad segment name {seg.name!r}"
                )
            if seg.instance is not None and not _INSTANCE_RE.fullmatch(seg.instance):
                raise ParseError(
                    "INVALID_TAG_TEXT", f"bad instance {seg.instance!r} in {seg.name!r}"
                )

    @property
    def head(self) -> str:
        return self.segments[0].name

    @property
    def last(self) -> TagSegment:
        return self.segments[-1]

    def serialize(self) -> str:
        return ".".join(seg.serialize() for seg in self.segments)

    def startswith(self, prefix: TagPath) -> bool:
        return self.segments[: len(prefix.segments)] == prefix.segments

    def join(self, suffix: TagPath) -> TagPath:
        return TagPath(self.segments + suffix.segments)

    def __str__(self) -> str:
        return self.serialize()


def parse_tag_path(text: str, *, offset: int | None = None) -> TagPath:
    """Parse dotted `name:instance` path text into a TagPath.

    Raises ParseError with code EMPTY_SEGMENT for empty segment/instance
    parts and INVALID_TAG_TEXT for charset or structure violations.
    """
    segments: list[TagSegment] = []
    for piece in text.split("."):
        if piece == "":
            raise ParseError(
                "EMPTY_SEGMENT", f"empty segment in tag {text!r}", offset=offset
            )
        name, colon, instance = piece.partition(":")
        if not colon:
            seg_instance = None
        elif instance == "":
            raise ParseError(
                "EMPTY_SEGMENT", f"empty instance in tag {text!r}", offset=offset
            )
        elif ":" in instance:
            raise ParseError(
                "INVALID_TAG_TEXT",
                f"more than one ':' in segment {piece!r} of tag {text!r}",
                offset=offset,
            )
        else:
            seg_instance = instance
        if name == "":
            raise ParseError(
                "EMPTY_SEGMENT", f"empty name in segment {piece!r} of tag {text!r}",
                offset=offset,
            )
        segments.append(TagSegment(name, seg_instance))
    try:
        return TagPath(tuple(segments))
    except ParseError as exc:
        raise ParseError(exc.code, f"{exc.message} in tag {text!r}", offset=offset)


def serialize_tag_path(path: TagPath) -> str:
    return path.serialize()


class ScalarKind(Enum):
    STRING = "string"
    INTEGER = "integer"
    FLOAT = "float"
    BOOLEAN = "boolean"
    NULL = "null"


# Literal grammars for non-string scalar kinds. Float deliberately accepts
# plain integer digits ("3" is a fine float literal) but not inf/nan, to
# stay inside JSON's number grammar.
INT_RE = re.compile(r"-?\d+")
FLOAT_RE = re.compile(r"-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")


@dataclass(frozen=True, slots=True)
class Scalar:
    """A leaf value. ``raw`` is the literal text; ``kind`` its type.

    ``cast_explicit`` records whether the type came from a cast tag (or a
    construction-time decision) rather than a bare literal. It is display
    metadata: two scalars with the same raw and kind are equal even when
    one was spelled with a cast and the other bare.
    """

    raw: str
    kind: ScalarKind = ScalarKind.STRING
    cast_explicit: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        ok = True
        if self.kind is ScalarKind.INTEGER:
            ok = INT_RE.fullmatch(self.raw) is not None
        elif self.kind is ScalarKind.FLOAT:
            ok = FLOAT_RE.fullmatch(self.raw) is not None
        elif self.kind is ScalarKind.BOOLEAN:
            ok = self.raw in ("true", "false")
        elif self.kind is ScalarKind.NULL:
            ok = self.raw == "null"
        if not ok:
            raise ValueError(f"raw {self.raw!r} is not a {self.kind.value} literal")


@dataclass(frozen=True, slots=True)
class Tagged:
    """A user-tagged span: ``\\tag\\ children /tag/`` or self-closed ``\\tag/``."""

    tag: TagPath
    children: tuple[Node, ...] = ()
    self_closed: bool = False

    def __post_init__(self) -> None:
        if self.self_closed and self.children:
            raise ValueError("self-closed span cannot have children")


@dataclass(frozen=True, slots=True)
class ObjectNode:
    """Ordered key/value pairs. Duplicate keys are allowed and preserved."""

    items: tuple[tuple[str, Node], ...] = ()


@dataclass(frozen=True, slots=True)
class ListNode:
    elements: tuple[Node, ...] = ()


Node = Union[Tagged, ObjectNode, ListNode, Scalar]


def children_of(node: Node) -> tuple[Node, ...]:
    if isinstance(node, Tagged):
        return node.children
    if isinstance(node, ObjectNode):
        return tuple(value for _key, value in node.items)
    if isinstance(node, ListNode):
        return node.elements
    return ()


@dataclass(frozen=True, slots=True)
class Document:
    """An ordered, nonempty forest of nodes.

    ``source_spans`` maps NodeId to a byte range in the text the document
    was parsed from; absent for programmatically built documents. Equality
    is structural (roots only).
    """

    roots: tuple[Node, ...]
    source_spans: dict[int, tuple[int, int]] | None = field(
        default=None, compare=False, repr=False
    )
    _preorder: tuple[Node, ...] | None = field(
        default=None, init=False, compare=False, repr=False
    )
    _ids: dict[int, int] | None = field(
        default=None, init=False, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if not self.roots:
            raise ValueError("document needs at least one root")

    def _index(self) -> tuple[tuple[Node, ...], dict[int, int]]:
        if self._preorder is None:
            order: list[Node] = []
            ids: dict[int, int] = {}
            stack = list(reversed(self.roots))
            while stack:
                node = stack.pop()
                if id(node) in ids:
                    raise ValueError("node appears twice in the document")
                ids[id(node)] = len(order)
                order.append(node)
                stack.extend(reversed(children_of(node)))
            object.__setattr__(self, "_preorder", tuple(order))
            object.__setattr__(self, "_ids", ids)
        assert self._preorder is not None and self._ids is not None
        return self._preorder, self._ids

    def nodes(self) -> tuple[Node, ...]:
        """All nodes in preorder; a node's index here is its NodeId."""
        return self._index()[0]

    def node_at(self, node_id: int) -> Node:
        order = self._index()[0]
        if not 0 <= node_id < len(order):
            raise KeyError(node_id)
        return order[node_id]

    def node_id_of(self, node: Node) -> int:
        return self._index()[1][id(node)]


def iter_spans(doc: Document) -> Iterator[tuple[int, TagPath | str, int]]:
    """Preorder span walk: yields (node_id, tag path or structural kind, depth).

    Structural kinds are the strings "object", "list", and "scalar".
    """
    doc._index()
    stack: list[tuple[Node, int]] = [(r, 0) for r in reversed(doc.roots)]
    next_id = 0
    while stack:
        node, depth = stack.pop()
        if isinstance(node, Tagged):
            label: TagPath | str = node.tag
        elif isinstance(node, ObjectNode):
            label = "object"
        elif isinstance(node, ListNode):
            label = "list"
        else:
            label = "scalar"
        yield next_id, label, depth
        next_id += 1
        stack.extend((c, depth + 1) for c in reversed(children_of(node)))


@contextlib.contextmanager
def deep_recursion() -> Iterator[None]:
    """Headroom for recursive descent near MAX_DEPTH (limit checks fire first)."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, MAX_DEPTH * 6 + 200))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)
