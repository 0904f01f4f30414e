r"""Machine syntax: the special-token form of the language.

Tags become special-token groups (`<|open|>tag<|close|>` and friends) and
ordinary text is split on whitespace runs. There is no escaping in this
form; a scalar containing a registry string is unrepresentable. Special
tokens are atomic: the tokenizer matches them longest-first before any
ordinary splitting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from llmon import _kernels
from llmon.errors import ParseError, PrintError
from llmon.model import (
    FLOAT_RE,
    INT_RE,
    MAX_DEPTH,
    Document,
    ListNode,
    Node,
    ObjectNode,
    Scalar,
    ScalarKind,
    TagPath,
    Tagged,
    deep_recursion,
    parse_tag_path,
)
from llmon.surface import CAST_TAGS

__all__ = [
    "SpecialTokenRegistry",
    "DEFAULT_REGISTRY",
    "Token",
    "TokenSequence",
    "tokenize",
    "detokenize",
    "parse_machine",
    "print_machine",
    "ORDINARY_ID_BASE",
]

# Role indices into SpecialTokenRegistry.strings; also the token ids.
OPEN, OPEN_END, CLOSE, SELF_CLOSE, DOT, COLON, LIST_SEP = range(7)

_ROLE_NAMES = ("open", "open_end", "close", "self_close", "dot", "colon", "list_separator")

ORDINARY_ID_BASE = 1000
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def ordinary_token_id(text: str) -> int:
    """Stable content-derived id for a non-special token."""
    return ORDINARY_ID_BASE + (_fnv1a64(text.encode("utf-8")) % (1 << 31))


@dataclass(frozen=True)
class SpecialTokenRegistry:
    """The special-token vocabulary. ``strings[i]`` has token id ``i``;
    the first seven entries are the fixed structural roles."""

    strings: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.strings) < 7:
            raise ValueError("registry needs the seven structural strings")
        if len(set(self.strings)) != len(self.strings):
            raise ValueError("registry strings must be distinct")
        if any(not s for s in self.strings):
            raise ValueError("registry strings must be non-empty")

    @classmethod
    def build(cls, overrides: dict | None = None) -> SpecialTokenRegistry:
        """Build a registry from an optional mapping of role name to string
        plus an "extra" list. Substring collisions between entries are
        recorded as warnings; longest match wins at scan time."""
        overrides = dict(overrides or {})
        extra = tuple(overrides.pop("extra", ()))
        base = {
            "open": "<|open|>",
            "open_end": "<|open_end|>",
            "close": "<|close|>",
            "self_close": "<|self_close|>",
            "dot": "<|.|>",
            "colon": "<|:|>",
            "list_separator": "<|list-separator|>",
        }
        for key, value in overrides.items():
            if key not in base:
                raise ValueError(f"unknown registry role {key!r}")
            base[key] = value
        strings = tuple(base[name] for name in _ROLE_NAMES) + extra
        warnings = tuple(
            f"special {a!r} is a substring of {b!r}"
            for i, a in enumerate(strings)
            for j, b in enumerate(strings)
            if i != j and a in b
        )
        return cls(strings, warnings)

    @classmethod
    def from_json(cls, text: str) -> SpecialTokenRegistry:
        return cls.build(json.loads(text))

    @cached_property
    def _scan(self) -> tuple[tuple[str, ...], tuple[int, ...]]:
        order = sorted(range(len(self.strings)), key=lambda i: -len(self.strings[i]))
        return (
            tuple(self.strings[i] for i in order),
            tuple(order),
        )

    def id_of(self, text: str) -> int | None:
        try:
            return self.strings.index(text)
        except ValueError:
            return None


DEFAULT_REGISTRY = SpecialTokenRegistry.build()


@dataclass(frozen=True, slots=True)
class Token:
    id: int
    text: str
    is_special: bool


def tokenize(
    text: str, registry: SpecialTokenRegistry = DEFAULT_REGISTRY
) -> list[Token]:
    """Reference tokenizer: atomic special tokens, whitespace-run splitting
    for everything else. Lossless; ``detokenize`` restores the input."""
    scan_strings, scan_ids = registry._scan
    tokens: list[Token] = []
    for start, end, idx in _kernels.segment_specials(text, scan_strings):
        run = text[start:end]
        if idx >= 0:
            tokens.append(Token(scan_ids[idx], run, True))
        else:
            tokens.append(Token(ordinary_token_id(run), run, False))
    return tokens


def detokenize(tokens: Iterable[Token]) -> str:
    return "".join(t.text for t in tokens)


@dataclass(frozen=True)
class TokenSequence:
    """Tokens of a parsed machine text plus the span index.

    ``span_index`` maps NodeId to an inclusive (first, last) token range;
    nesting follows the tree (parent ranges contain child ranges).
    """

    tokens: tuple[Token, ...]
    document: Document
    span_index: dict[int, tuple[int, int]]


class _MCursor:
    __slots__ = ("tokens", "pos")

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok


class _MParser:
    def __init__(
        self,
        tokens: list[Token],
        text: str,
        registry: SpecialTokenRegistry,
        *,
        strict_literals: bool,
        permissive_close: bool,
        warnings: list[str] | None,
    ):
        self.cur = _MCursor(tokens)
        self.registry = registry
        self.strict_literals = strict_literals
        self.permissive_close = permissive_close
        self.warnings = warnings
        self.token_spans: dict[int, tuple[int, int]] = {}  # id(node) -> tok range
        # Byte offset of each token, for error messages and source spans.
        self.byte_starts: list[int] = []
        pos = 0
        ascii_only = text.isascii()
        for tok in tokens:
            self.byte_starts.append(pos)
            pos += len(tok.text) if ascii_only else len(tok.text.encode("utf-8"))
        self.byte_starts.append(pos)

    # -- helpers -----------------------------------------------------

    def _role(self, tok: Token) -> int:
        return tok.id if tok.is_special and tok.id < 7 else -1

    def _fail(self, code: str, message: str, at: int | None = None) -> ParseError:
        idx = self.cur.pos if at is None else at
        offset = self.byte_starts[min(idx, len(self.byte_starts) - 1)]
        tok = self.cur.tokens[idx] if idx < len(self.cur.tokens) else None
        found = repr(tok.text) if tok is not None else "end of input"
        return ParseError(code, message, offset=offset, found=found)

    def _note(self, node: Node, first: int, last: int) -> None:
        self.token_spans[id(node)] = (first, last)

    def _check_depth(self, depth: int, at: int) -> None:
        if depth > MAX_DEPTH:
            raise self._fail("DEPTH_EXCEEDED", f"nesting deeper than {MAX_DEPTH}", at)

    def _read_tag_text(self, open_idx: int) -> tuple[str, int]:
        """After OPEN/OPEN_END: assemble tag text. Returns (text, closing
        role) and leaves the cursor past the CLOSE/SELF_CLOSE token."""
        parts: list[str] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "tag text never closes", open_idx)
            role = self._role(tok)
            if role in (CLOSE, SELF_CLOSE):
                self.cur.advance()
                return "".join(parts), role
            if role == DOT:
                parts.append(".")
            elif role == COLON:
                parts.append(":")
            elif role == -1 and not tok.is_special:
                if tok.text.isspace():
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "whitespace inside tag text"
                    )
                parts.append(tok.text)
            else:
                raise self._fail("UNEXPECTED_TOKEN", "bad token inside tag text")
            self.cur.advance()

    def _start_tag(self) -> tuple[str, int, int]:
        """Consume OPEN + tag text + CLOSE/SELF_CLOSE."""
        open_idx = self.cur.pos
        self.cur.advance()
        text, closing = self._read_tag_text(open_idx)
        return text, closing, open_idx

    def _end_tag(self, expect: str, open_idx: int) -> int:
        """Consume OPEN_END + tag text + CLOSE; returns last token index."""
        end_idx = self.cur.pos
        tok = self.cur.peek()
        if tok is None:
            raise self._fail("UNCLOSED_TAG", f"span {expect!r} never closes", open_idx)
        if self._role(tok) is not OPEN_END:
            raise self._fail("UNEXPECTED_TOKEN", f"expected end tag for {expect!r}")
        self.cur.advance()
        text, closing = self._read_tag_text(end_idx)
        if closing is not CLOSE:
            raise self._fail(
                "UNEXPECTED_TOKEN", "end tag cannot self-close", end_idx
            )
        if text != expect:
            if self.permissive_close:
                if self.warnings is not None:
                    self.warnings.append(
                        f"MISMATCHED_CLOSE_TAG: close tag {text!r} "
                        f"does not match {expect!r}"
                    )
            else:
                raise self._fail(
                    "MISMATCHED_CLOSE_TAG",
                    f"close tag {text!r} does not match {expect!r}",
                    end_idx,
                )
        return self.cur.pos - 1

    # -- entry -------------------------------------------------------

    def parse(self) -> Document:
        with deep_recursion():
            items = self.parse_items(stop_at_end=False, depth=0)
        if self.cur.peek() is not None:
            raise self._fail("UNEXPECTED_TOKEN", "trailing input after document")
        if not items:
            raise ParseError("EMPTY_DOCUMENT", "no content to parse")
        return Document(tuple(items))

    # -- contexts ----------------------------------------------------

    def parse_items(self, stop_at_end: bool, depth: int) -> list[Node]:
        items: list[Node] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                return items
            role = self._role(tok)
            if role is OPEN_END:
                if stop_at_end:
                    return items
                raise self._fail("UNEXPECTED_TOKEN", "unmatched end tag")
            if role is OPEN:
                items.append(self.parse_structural(depth))
            elif role in (DOT, COLON) or not tok.is_special:
                node = self._scalar_item()
                if node is not None:
                    items.append(node)
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "structural special token outside structure"
                )

    def _scalar_piece(self, tok: Token) -> str | None:
        # Content text piece for a token, or None if it ends the run.
        role = self._role(tok)
        if role == DOT:
            return "."
        if role == COLON:
            return ":"
        if not tok.is_special:
            return tok.text
        return None

    def _scalar_item(self) -> Scalar | None:
        parts: list[str] = []
        first = last = -1
        while True:
            tok = self.cur.peek()
            piece = self._scalar_piece(tok) if tok is not None else None
            if piece is None:
                break
            if first < 0:
                first = self.cur.pos
            last = self.cur.pos
            self.cur.advance()
            parts.append(piece)
        merged = "".join(parts).strip()
        if not merged:
            return None
        node = _typed(merged, self.strict_literals)
        self._note(node, *self._shrink(first, last))
        return node

    def _shrink(self, first: int, last: int) -> tuple[int, int]:
        # Trim whitespace tokens off a content run's span.
        toks = self.cur.tokens
        while first < last and toks[first].text.isspace():
            first += 1
        while last > first and toks[last].text.isspace():
            last -= 1
        return first, last

    def parse_structural(self, depth: int) -> Node:
        text, closing, open_idx = self._start_tag()
        if closing is SELF_CLOSE:
            if text == "null":
                node: Node = Scalar("null", ScalarKind.NULL, cast_explicit=True)
            elif text in CAST_TAGS or text in (
                "object", "item", "object.item", "list", "object.list",
            ):
                raise self._fail(
                    "UNEXPECTED_TOKEN", f"tag {text!r} cannot self-close", open_idx
                )
            else:
                path = parse_tag_path(text, offset=self.byte_starts[open_idx])
                node = Tagged(path, (), self_closed=True)
            self._note(node, open_idx, self.cur.pos - 1)
            return node
        if text == "object":
            return self.parse_object(text, open_idx, depth)
        if text in ("item", "object.item"):
            raise self._fail(
                "UNEXPECTED_TOKEN",
                "object item is only valid inside an object",
                open_idx,
            )
        if text in ("list", "object.list"):
            return self.parse_list(text, open_idx, depth)
        if text in CAST_TAGS:
            return self.parse_cast(text, open_idx, depth)
        return self.parse_tagged(text, open_idx, depth)

    def parse_tagged(self, text: str, open_idx: int, depth: int) -> Tagged:
        self._check_depth(depth + 1, open_idx)
        path = parse_tag_path(text, offset=self.byte_starts[open_idx])
        children = self.parse_items(stop_at_end=True, depth=depth + 1)
        last = self._end_tag(text, open_idx)
        node = Tagged(path, tuple(children))
        self._note(node, open_idx, last)
        return node

    def parse_cast(self, name: str, open_idx: int, depth: int) -> Scalar:
        self._check_depth(depth + 1, open_idx)
        parts: list[str] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail(
                    "UNCLOSED_TAG", f"cast {name!r} never closes", open_idx
                )
            if self._role(tok) is OPEN_END:
                break
            piece = self._scalar_piece(tok)
            if piece is None:
                raise self._fail(
                    "UNEXPECTED_TOKEN", f"cast {name!r} content must be scalar"
                )
            parts.append(piece)
            self.cur.advance()
        last = self._end_tag(name, open_idx)
        raw = "".join(parts)
        node = self._cast(name, raw, open_idx)
        self._note(node, open_idx, last)
        return node

    def _cast(self, name: str, raw: str, open_idx: int) -> Scalar:
        if name == "string":
            return Scalar(raw, ScalarKind.STRING, cast_explicit=True)
        trimmed = raw.strip()
        if name == "int":
            if not INT_RE.fullmatch(trimmed):
                raise self._fail(
                    "INVALID_CAST_LITERAL", f"{trimmed!r} is not an int", open_idx
                )
            return Scalar(trimmed, ScalarKind.INTEGER, cast_explicit=True)
        if name == "float":
            if not FLOAT_RE.fullmatch(trimmed):
                raise self._fail(
                    "INVALID_CAST_LITERAL", f"{trimmed!r} is not a float", open_idx
                )
            return Scalar(trimmed, ScalarKind.FLOAT, cast_explicit=True)
        if name == "bool":
            if trimmed not in ("true", "false"):
                raise self._fail(
                    "INVALID_CAST_LITERAL", f"{trimmed!r} is not a bool", open_idx
                )
            return Scalar(trimmed, ScalarKind.BOOLEAN, cast_explicit=True)
        if trimmed not in ("", "null"):
            raise self._fail(
                "INVALID_CAST_LITERAL", f"{trimmed!r} is not null", open_idx
            )
        return Scalar("null", ScalarKind.NULL, cast_explicit=True)

    def parse_object(self, spelling: str, open_idx: int, depth: int) -> ObjectNode:
        self._check_depth(depth + 1, open_idx)
        items: list[tuple[str, Node]] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "object never closes", open_idx)
            role = self._role(tok)
            if role is OPEN_END:
                last = self._end_tag(spelling, open_idx)
                node = ObjectNode(tuple(items))
                self._note(node, open_idx, last)
                return node
            if role is OPEN:
                item_idx = self.cur.pos
                text, closing, _ = self._start_tag()
                if text not in ("item", "object.item") or closing is not CLOSE:
                    raise self._fail(
                        "UNEXPECTED_TOKEN",
                        "objects contain only object items",
                        item_idx,
                    )
                items.append(self.parse_object_item(text, item_idx, depth + 1))
            elif not tok.is_special and tok.text.isspace():
                self.cur.advance()
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "objects contain only object items"
                )

    def parse_object_item(
        self, spelling: str, open_idx: int, depth: int
    ) -> tuple[str, Node]:
        self._check_depth(depth + 1, open_idx)
        key_parts: list[str] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "object item never closes", open_idx)
            role = self._role(tok)
            if role is COLON:
                self.cur.advance()
                break
            if role is OPEN_END:
                raise self._fail(
                    "MISSING_COLON_SEPARATOR", "object item has no separator"
                )
            if role == DOT:
                key_parts.append(".")
            elif not tok.is_special:
                key_parts.append(tok.text)
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "expected separator after object item key"
                )
            self.cur.advance()
        key = "".join(key_parts).strip()
        value = self._parse_item_value(open_idx, depth)
        last = self._end_tag(spelling, open_idx)
        return key, value

    def _parse_item_value(self, open_idx: int, depth: int) -> Node:
        parts: list[str] = []
        first = last = -1
        value: Node | None = None
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "object item never closes", open_idx)
            role = self._role(tok)
            if role is OPEN_END:
                break
            if role is OPEN:
                if value is not None or "".join(parts).strip():
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "object item takes one value"
                    )
                parts.clear()
                value = self.parse_structural(depth)
                continue
            piece = self._scalar_piece(tok)
            if piece is None:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "unexpected special token in object item"
                )
            if first < 0:
                first = self.cur.pos
            last = self.cur.pos
            self.cur.advance()
            parts.append(piece)
        merged = "".join(parts).strip()
        if value is not None:
            if merged:
                raise self._fail("UNEXPECTED_TOKEN", "object item takes one value")
            return value
        node = _typed(merged, self.strict_literals)
        if first >= 0:
            self._note(node, *self._shrink(first, last))
        return node

    def parse_list(self, spelling: str, open_idx: int, depth: int) -> ListNode:
        self._check_depth(depth + 1, open_idx)
        elements: list[Node] = []
        parts: list[str] = []
        pending: Node | None = None
        first = last = -1
        separators = 0

        def finalize(at_sep: bool) -> None:
            nonlocal pending, first, last
            merged = "".join(parts).strip()
            if pending is not None:
                if merged:
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "list elements need a separator"
                    )
                elements.append(pending)
            elif merged:
                node = _typed(merged, self.strict_literals)
                if first >= 0:
                    self._note(node, *self._shrink(first, last))
                elements.append(node)
            elif at_sep or separators:
                raise self._fail("EMPTY_LIST_ELEMENT", "empty list element")
            parts.clear()
            pending = None
            first = last = -1

        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "list never closes", open_idx)
            role = self._role(tok)
            if role is LIST_SEP:
                self.cur.advance()
                separators += 1
                finalize(True)
            elif role is OPEN_END:
                finalize(False)
                end_idx = self._end_tag(spelling, open_idx)
                node = ListNode(tuple(elements))
                self._note(node, open_idx, end_idx)
                return node
            elif role is OPEN:
                if pending is not None or "".join(parts).strip():
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "list elements need a separator"
                    )
                parts.clear()
                pending = self.parse_structural(depth)
            else:
                piece = self._scalar_piece(tok)
                if piece is None:
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "unexpected special token in list"
                    )
                if first < 0:
                    first = self.cur.pos
                last = self.cur.pos
                self.cur.advance()
                parts.append(piece)


def _typed(text: str, strict_literals: bool) -> Scalar:
    if text == "true" or text == "false":
        return Scalar(text, ScalarKind.BOOLEAN)
    if text == "null":
        return Scalar(text, ScalarKind.NULL)
    if strict_literals:
        if INT_RE.fullmatch(text):
            return Scalar(text, ScalarKind.INTEGER)
        if FLOAT_RE.fullmatch(text):
            return Scalar(text, ScalarKind.FLOAT)
    return Scalar(text, ScalarKind.STRING)


def parse_machine(
    text: str,
    registry: SpecialTokenRegistry = DEFAULT_REGISTRY,
    *,
    strict_literals: bool = False,
    permissive_close: bool = False,
    warnings: list[str] | None = None,
) -> tuple[Document, TokenSequence]:
    """Parse machine text into a Document plus its TokenSequence."""
    tokens = tokenize(text, registry)
    parser = _MParser(
        tokens,
        text,
        registry,
        strict_literals=strict_literals,
        permissive_close=permissive_close,
        warnings=warnings,
    )
    doc = parser.parse()
    span_index: dict[int, tuple[int, int]] = {}
    source_spans: dict[int, tuple[int, int]] = {}
    for node in doc.nodes():
        rng = parser.token_spans.get(id(node))
        if rng is not None:
            node_id = doc.node_id_of(node)
            span_index[node_id] = rng
            source_spans[node_id] = (
                parser.byte_starts[rng[0]],
                parser.byte_starts[rng[1] + 1],
            )
    object.__setattr__(doc, "source_spans", source_spans)
    return doc, TokenSequence(tuple(tokens), doc, span_index)


# ---------------------------------------------------------------------------
# Printing

_REF_PARENT_HEADS = ("exec",)
_SELECTOR_NAMES = ("instr", "input")


class _MPrinter:
    pad = "  "

    def __init__(self, registry: SpecialTokenRegistry):
        self.reg = registry.strings

    def _guard(self, text: str, what: str) -> str:
        for s in self.reg:
            if s in text:
                raise PrintError(
                    "UNREPRESENTABLE_SCALAR",
                    f"{what} {text!r} contains special token {s!r}",
                )
        return text

    def tag_text(self, path: TagPath) -> str:
        parts: list[str] = []
        for i, seg in enumerate(path.segments):
            if i:
                parts.append(self.reg[DOT])
            parts.append(seg.name)
            if seg.instance is not None:
                parts.append(self.reg[COLON])
                parts.append(seg.instance)
        return "".join(parts)

    def open(self, text: str) -> str:
        return f"{self.reg[OPEN]}{text}{self.reg[CLOSE]}"

    def close(self, text: str) -> str:
        return f"{self.reg[OPEN_END]}{text}{self.reg[CLOSE]}"

    def render_doc(self, doc: Document) -> str:
        lines: list[str] = []
        prev_scalar = False
        for root in doc.roots:
            lines.extend(self.render(root, 0, in_exec=False, after_scalar=prev_scalar))
            prev_scalar = isinstance(root, Scalar)
        return "\n".join(lines) + "\n"

    def scalar_text(
        self, node: Scalar, in_exec_selector: bool, force_wrap: bool = False
    ) -> str:
        wrap = force_wrap or node.cast_explicit
        if node.kind is ScalarKind.STRING:
            if in_exec_selector and not node.cast_explicit:
                try:
                    ref = parse_tag_path(node.raw.strip())
                except ParseError:
                    ref = None
                if ref is not None:
                    return self.tag_text(ref)
            raw = self._guard(node.raw, "scalar")
            # Bare spellings that would retrim, retype, or merge into an
            # adjacent content run must be cast.
            wrap = (
                wrap
                or raw == ""
                or raw != raw.strip()
                or raw in ("true", "false", "null")
                or INT_RE.fullmatch(raw) is not None
                or FLOAT_RE.fullmatch(raw) is not None
            )
            if wrap:
                return f"{self.open('string')}{raw}{self.close('string')}"
            return raw
        if node.kind in (ScalarKind.INTEGER, ScalarKind.FLOAT):
            name = "int" if node.kind is ScalarKind.INTEGER else "float"
            return f"{self.open(name)}{node.raw}{self.close(name)}"
        if node.kind is ScalarKind.BOOLEAN:
            if wrap:
                return f"{self.open('bool')}{node.raw}{self.close('bool')}"
            return node.raw
        if wrap:
            return f"{self.reg[OPEN]}null{self.reg[SELF_CLOSE]}"
        return "null"

    def render(
        self, node: Node, depth: int, in_exec: bool, after_scalar: bool = False
    ) -> list[str]:
        pad = self.pad * depth
        if isinstance(node, Scalar):
            return [pad + self.scalar_text(node, False, force_wrap=after_scalar)]
        if isinstance(node, Tagged):
            return self.render_tagged(node, depth, in_exec)
        if isinstance(node, ObjectNode):
            return self.render_object(node, depth)
        return self.render_list(node, depth)

    def _is_selector(self, node: Tagged, in_exec: bool) -> bool:
        return (
            in_exec
            and node.tag.last.name in _SELECTOR_NAMES
            and node.tag.last.instance is None
        )

    def render_tagged(self, node: Tagged, depth: int, in_exec: bool) -> list[str]:
        pad = self.pad * depth
        text = self.tag_text(node.tag)
        if node.self_closed:
            return [pad + f"{self.reg[OPEN]}{text}{self.reg[SELF_CLOSE]}"]
        child_exec = node.tag.last.name in _REF_PARENT_HEADS
        selector = self._is_selector(node, in_exec)
        if len(node.children) == 1 and isinstance(node.children[0], Scalar):
            inline = self.scalar_text(node.children[0], selector)
            if "\n" not in inline:
                return [pad + f"{self.open(text)} {inline} {self.close(text)}"]
        if not node.children:
            return [pad + f"{self.open(text)}{self.close(text)}"]
        lines = [pad + self.open(text)]
        prev_scalar = False
        for child in node.children:
            lines.extend(self.render(child, depth + 1, child_exec, prev_scalar))
            prev_scalar = isinstance(child, Scalar)
        lines.append(pad + self.close(text))
        return lines

    def render_object(self, node: ObjectNode, depth: int) -> list[str]:
        pad = self.pad * depth
        if not node.items:
            return [pad + f"{self.open('object')}{self.close('object')}"]
        lines = [pad + self.open("object")]
        for key, value in node.items:
            lines.extend(self.render_item(key, value, depth + 1))
        lines.append(pad + self.close("object"))
        return lines

    def render_item(self, key: str, value: Node, depth: int) -> list[str]:
        pad = self.pad * depth
        key_txt = self._guard(key, "object key")
        if key != key.strip():
            raise PrintError(
                "UNREPRESENTABLE_KEY", f"key {key!r} has boundary whitespace"
            )
        head = f"{self.open('item')}{key_txt}{self.reg[COLON]}"
        if isinstance(value, Scalar):
            inline = self.scalar_text(value, False)
            if "\n" not in inline:
                return [pad + f"{head} {inline} {self.close('item')}"]
        vlines = self.render(value, depth + 1, False)
        if len(vlines) == 1:
            return [pad + f"{head} {vlines[0].strip()} {self.close('item')}"]
        return [pad + head] + vlines + [pad + self.close("item")]

    def render_list(self, node: ListNode, depth: int) -> list[str]:
        pad = self.pad * depth
        if not node.elements:
            return [pad + f"{self.open('list')}{self.close('list')}"]
        rendered = [self.render(el, depth + 1, False) for el in node.elements]
        sep = self.reg[LIST_SEP]
        if all(len(r) == 1 for r in rendered):
            joined = f" {sep} ".join(r[0].strip() for r in rendered)
            line = f"{self.open('list')} {joined} {self.close('list')}"
            if len(pad + line) <= 120:
                return [pad + line]
        lines = [pad + self.open("list")]
        for i, r in enumerate(rendered):
            if i < len(rendered) - 1:
                r = r[:-1] + [r[-1] + " " + sep]
            lines.extend(r)
        lines.append(pad + self.close("list"))
        return lines


def print_machine(
    doc: Document, registry: SpecialTokenRegistry = DEFAULT_REGISTRY
) -> str:
    """Render a Document as machine text.

    Raises PrintError(UNREPRESENTABLE_SCALAR) when scalar or key text
    contains a registry string, since this form has no escaping.
    """
    with deep_recursion():
        return _MPrinter(registry).render_doc(doc)
