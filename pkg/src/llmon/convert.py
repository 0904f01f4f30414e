"""Cross-format conversion: flattening, JSON bridging, syntax translation.

Flattening rewrites nested user tags to carry their ancestor path as a
dotted prefix (machine text is always printed flattened). JSON conversion
is lossless at Document level in the JSON-to-Document-to-JSON direction.
"""

from __future__ import annotations

import json
from typing import Iterator

from llmon.errors import ConvertError
from llmon.machine import (
    DEFAULT_REGISTRY,
    SpecialTokenRegistry,
    parse_machine,
    print_machine,
)
from llmon.model import (
    FLOAT_RE,
    INT_RE,
    Document,
    ListNode,
    Node,
    ObjectNode,
    Scalar,
    ScalarKind,
    TagPath,
    Tagged,
)
from llmon.surface import parse_surface, print_surface

__all__ = [
    "flatten",
    "iter_flatten_conflicts",
    "surface_to_machine",
    "machine_to_surface",
    "json_to_llmon",
    "llmon_to_json",
]


def _flatten_path(path: TagPath, ancestor: TagPath | None) -> TagPath | None:
    """New path for a tagged node under ``ancestor`` (already flattened).
    Returns None on conflict."""
    if ancestor is None:
        return path
    if path.head == ancestor.head:
        # Same head name: the child must spell out the full ancestor path
        # and extend it, i.e. it is already (partly) flattened.
        if path.startswith(ancestor) and len(path.segments) > len(ancestor.segments):
            return path
        return None
    return ancestor.join(path)


def iter_flatten_conflicts(doc: Document) -> Iterator[int]:
    """NodeIds of tagged nodes whose path cannot be joined to their
    ancestor's flattened path."""
    stack: list[tuple[Node, TagPath | None]] = [
        (r, None) for r in reversed(doc.roots)
    ]
    while stack:
        node, ancestor = stack.pop()
        new_ancestor = ancestor
        if isinstance(node, Tagged):
            flat = _flatten_path(node.tag, ancestor)
            if flat is None:
                yield doc.node_id_of(node)
                flat = node.tag  # keep walking below the conflict
            new_ancestor = flat
        if isinstance(node, Tagged):
            kids = node.children
        elif isinstance(node, ObjectNode):
            kids = tuple(v for _k, v in node.items)
        elif isinstance(node, ListNode):
            kids = node.elements
        else:
            kids = ()
        stack.extend((c, new_ancestor) for c in reversed(kids))


def flatten(doc: Document) -> Document:
    """Prefix nested user tags with their ancestor path. Idempotent;
    Object/List wrappers are transparent. Raises
    ConvertError(FLATTEN_CONFLICT) on inconsistent pre-flattened names."""

    def walk(node: Node, ancestor: TagPath | None) -> Node:
        if isinstance(node, Tagged):
            flat = _flatten_path(node.tag, ancestor)
            if flat is None:
                raise ConvertError(
                    "FLATTEN_CONFLICT",
                    f"tag {node.tag} does not extend ancestor {ancestor}",
                )
            children = tuple(walk(c, flat) for c in node.children)
            if flat == node.tag and children == node.children:
                return node
            return Tagged(flat, children, node.self_closed)
        if isinstance(node, ObjectNode):
            items = tuple((k, walk(v, ancestor)) for k, v in node.items)
            if items == node.items:
                return node
            return ObjectNode(items)
        if isinstance(node, ListNode):
            elements = tuple(walk(e, ancestor) for e in node.elements)
            if elements == node.elements:
                return node
            return ListNode(elements)
        return node

    roots = tuple(walk(r, None) for r in doc.roots)
    if roots == doc.roots:
        return doc
    return Document(roots)


def surface_to_machine(
    text: str, registry: SpecialTokenRegistry = DEFAULT_REGISTRY
) -> str:
    """Surface text to machine text; nested tags are flattened on the way."""
    return print_machine(flatten(parse_surface(text)), registry)


def machine_to_surface(
    text: str,
    registry: SpecialTokenRegistry = DEFAULT_REGISTRY,
    *,
    style: str = "indented",
) -> str:
    """Machine text to surface text. Does not un-flatten tag paths."""
    doc, _tokens = parse_machine(text, registry)
    return print_surface(doc, style)


# ---------------------------------------------------------------------------
# JSON


class _JsonPairs:
    """Marker wrapper so JSON objects stay distinguishable from arrays
    while preserving duplicate keys and order."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: list):
        self.pairs = pairs


def _reject_constant(name: str) -> float:
    raise ConvertError("INVALID_JSON", f"JSON constant {name} is not supported")


_NEEDS_STRING_CAST = ("true", "false", "null")


def _string_scalar(raw: str, in_list: bool) -> Scalar:
    cast = (
        raw == ""
        or raw != raw.strip()
        or raw in _NEEDS_STRING_CAST
        or INT_RE.fullmatch(raw) is not None
        or FLOAT_RE.fullmatch(raw) is not None
        or (in_list and "," in raw)
    )
    return Scalar(raw, ScalarKind.STRING, cast_explicit=cast)


def json_to_llmon(text: str) -> Document:
    """Parse JSON text into a structural Document.

    Strings that could be mistaken for other literals (or trimmed away)
    become explicit string casts; numbers, booleans, and null become cast
    scalars so no type information rides on parse-mode defaults.
    """
    try:
        data = json.loads(
            text, object_pairs_hook=_JsonPairs, parse_constant=_reject_constant
        )
    except json.JSONDecodeError as exc:
        raise ConvertError("INVALID_JSON", str(exc)) from None

    def build(value, in_list: bool) -> Node:
        if isinstance(value, _JsonPairs):
            return ObjectNode(
                tuple((k, build(v, False)) for k, v in value.pairs)
            )
        if isinstance(value, list):
            return ListNode(tuple(build(v, True) for v in value))
        if isinstance(value, str):
            return _string_scalar(value, in_list)
        if isinstance(value, bool):
            return Scalar(
                "true" if value else "false", ScalarKind.BOOLEAN, cast_explicit=True
            )
        if isinstance(value, int):
            return Scalar(str(value), ScalarKind.INTEGER, cast_explicit=True)
        if isinstance(value, float):
            return Scalar(repr(value), ScalarKind.FLOAT, cast_explicit=True)
        return Scalar("null", ScalarKind.NULL, cast_explicit=True)

    return Document((build(data, False),))


def llmon_to_json(doc: Document) -> str:
    """Serialize a structural Document as JSON text.

    Accepts one root, optionally wrapped in a single user tag (the wrapper
    is dropped). Tagged spans anywhere else raise
    ConvertError(UNTRANSLATABLE_NODE). Duplicate object keys are emitted
    as-is, numbers in canonical form.
    """
    if len(doc.roots) != 1:
        raise ConvertError(
            "UNTRANSLATABLE_NODE", f"JSON needs one root, document has {len(doc.roots)}"
        )
    root = doc.roots[0]
    if isinstance(root, Tagged):
        if root.self_closed or len(root.children) != 1:
            raise ConvertError(
                "UNTRANSLATABLE_NODE",
                "a wrapper tag must contain exactly one value",
            )
        root = root.children[0]

    def ser(node: Node) -> str:
        if isinstance(node, ObjectNode):
            body = ",".join(
                f"{json.dumps(k, ensure_ascii=False)}:{ser(v)}"
                for k, v in node.items
            )
            return "{" + body + "}"
        if isinstance(node, ListNode):
            return "[" + ",".join(ser(e) for e in node.elements) + "]"
        if isinstance(node, Scalar):
            if node.kind is ScalarKind.STRING:
                return json.dumps(node.raw, ensure_ascii=False)
            if node.kind is ScalarKind.INTEGER:
                return str(int(node.raw))
            if node.kind is ScalarKind.FLOAT:
                return repr(float(node.raw))
            return node.raw
        raise ConvertError(
            "UNTRANSLATABLE_NODE", f"tagged span {node.tag} has no JSON form"
        )

    return ser(root)
