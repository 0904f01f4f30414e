r"""Surface syntax: `\tag\ content /tag/` with `\tag/` self-close.

Backslash and slash are the only markup characters and must be escaped
(`\\`, `\/`) in regular text. The lexer emits `:` and `,` as separator
tokens everywhere; the parser merges them back into scalar text wherever
they are not structural, so detokenization stays lossless and the token
kinds stay context-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

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

__all__ = [
    "TokenKind",
    "SurfaceToken",
    "lex_surface",
    "parse_surface",
    "print_surface",
    "escape_scalar_text",
    "CAST_TAGS",
]

# Reserved single-segment tags that cast their content.
CAST_TAGS = ("int", "float", "bool", "string", "null")

_ITEM_SPELLINGS = ("item", "object.item")
_LIST_SPELLINGS = ("list", "object.list")


class TokenKind(Enum):
    SCALAR_TEXT = auto()
    START_USER_TAG = auto()
    END_USER_TAG = auto()
    SELF_CLOSE_USER_TAG = auto()
    START_OBJECT_TAG = auto()
    END_OBJECT_TAG = auto()
    START_OBJECT_ITEM_TAG = auto()
    END_OBJECT_ITEM_TAG = auto()
    START_LIST_TAG = auto()
    END_LIST_TAG = auto()
    COLON_SEPARATOR = auto()
    LIST_SEPARATOR = auto()


_START_KINDS = {
    TokenKind.START_USER_TAG,
    TokenKind.START_OBJECT_TAG,
    TokenKind.START_OBJECT_ITEM_TAG,
    TokenKind.START_LIST_TAG,
    TokenKind.SELF_CLOSE_USER_TAG,
}
_SCALARISH = {
    TokenKind.SCALAR_TEXT,
    TokenKind.COLON_SEPARATOR,
    TokenKind.LIST_SEPARATOR,
}


@dataclass(frozen=True, slots=True)
class SurfaceToken:
    """One lexeme. ``text`` is raw source; ``value`` is the decoded scalar
    text or the tag text without delimiters. ``byte_range`` indexes the
    UTF-8 encoding of the input."""

    kind: TokenKind
    text: str
    value: str
    byte_range: tuple[int, int]


def escape_scalar_text(s: str) -> str:
    return s.replace("\\", "\\\\").replace("/", "\\/")


def _byte_offsets(text: str) -> list[int] | None:
    # None means offsets are identity (pure ASCII).
    if text.isascii():
        return None
    table = [0] * (len(text) + 1)
    pos = 0
    for i, ch in enumerate(text):
        pos += len(ch.encode("utf-8"))
        table[i + 1] = pos
    return table


def _classify_start(tag_text: str) -> TokenKind:
    if tag_text == "object":
        return TokenKind.START_OBJECT_TAG
    if tag_text in _ITEM_SPELLINGS:
        return TokenKind.START_OBJECT_ITEM_TAG
    if tag_text in _LIST_SPELLINGS:
        return TokenKind.START_LIST_TAG
    return TokenKind.START_USER_TAG


def _classify_end(tag_text: str) -> TokenKind:
    if tag_text == "object":
        return TokenKind.END_OBJECT_TAG
    if tag_text in _ITEM_SPELLINGS:
        return TokenKind.END_OBJECT_ITEM_TAG
    if tag_text in _LIST_SPELLINGS:
        return TokenKind.END_LIST_TAG
    return TokenKind.END_USER_TAG


def lex_surface(text: str) -> list[SurfaceToken]:
    """Lex surface text. Lossless: concatenating token ``text`` fields
    reproduces the input exactly."""
    table = _byte_offsets(text)
    try:
        segments = _kernels.scan_surface(text)
    except ValueError as exc:
        code, cp = exc.args[0]
        offset = cp if table is None else table[cp]
        raise ParseError(code, f"lex failure at byte {offset}", offset=offset) from None
    tokens: list[SurfaceToken] = []
    for kind_code, start, end, raw, value in segments:
        if table is not None:
            start, end = table[start], table[end]
        if kind_code == _kernels.SEG_SCALAR:
            kind = TokenKind.SCALAR_TEXT
        elif kind_code == _kernels.SEG_START:
            kind = _classify_start(value)
        elif kind_code == _kernels.SEG_END:
            kind = _classify_end(value)
        elif kind_code == _kernels.SEG_SELF_CLOSE:
            kind = TokenKind.SELF_CLOSE_USER_TAG
        elif kind_code == _kernels.SEG_COLON:
            kind = TokenKind.COLON_SEPARATOR
        else:
            kind = TokenKind.LIST_SEPARATOR
        tokens.append(SurfaceToken(kind, raw, value, (start, end)))
    return tokens


def _typed_or_string(text: str, strict_literals: bool) -> Scalar:
    # Bare literal typing for a trimmed scalar run standing alone.
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


class _Cursor:
    __slots__ = ("tokens", "pos", "consumed")

    def __init__(self, tokens: list[SurfaceToken]):
        self.tokens = tokens
        self.pos = 0
        self.consumed = 0

    def peek(self) -> SurfaceToken | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def advance(self) -> SurfaceToken:
        tok = self.tokens[self.pos]
        self.pos += 1
        self.consumed += 1
        return tok


class _Parser:
    def __init__(
        self,
        tokens: list[SurfaceToken],
        *,
        strict_literals: bool,
        permissive_close: bool,
        warnings: list[str] | None,
    ):
        self.cur = _Cursor(tokens)
        self.strict_literals = strict_literals
        self.permissive_close = permissive_close
        self.warnings = warnings
        self.spans: dict[int, tuple[int, int]] = {}  # id(node) -> byte range

    # -- helpers -----------------------------------------------------

    def _fail(
        self,
        code: str,
        message: str,
        tok: SurfaceToken | None = None,
        *,
        expected: str | None = None,
    ) -> ParseError:
        offset = tok.byte_range[0] if tok is not None else None
        found = f"{tok.kind.name} {tok.text!r}" if tok is not None else "end of input"
        return ParseError(
            code, message, offset=offset, expected=expected, found=found
        )

    def _note_span(self, node: Node, start: int, end: int) -> None:
        self.spans[id(node)] = (start, end)

    def _check_depth(self, depth: int, tok: SurfaceToken) -> None:
        if depth > MAX_DEPTH:
            raise self._fail(
                "DEPTH_EXCEEDED", f"nesting deeper than {MAX_DEPTH}", tok
            )

    # -- entry -------------------------------------------------------

    def parse(self) -> Document:
        with deep_recursion():
            items = self.parse_items(frozenset(), 0)
        tok = self.cur.peek()
        if tok is not None:
            raise self._fail("UNEXPECTED_TOKEN", "trailing input after document", tok)
        if not items:
            raise ParseError("EMPTY_DOCUMENT", "no content to parse")
        assert self.cur.consumed == len(self.cur.tokens)
        doc = Document(tuple(items))
        spans = {}
        for node in doc.nodes():
            if id(node) in self.spans:
                spans[doc.node_id_of(node)] = self.spans[id(node)]
        object.__setattr__(doc, "source_spans", spans)
        return doc

    # -- contexts ----------------------------------------------------

    def parse_items(self, stop: frozenset[TokenKind], depth: int) -> list[Node]:
        """Item sequence for root and user-tag content."""
        items: list[Node] = []
        while True:
            tok = self.cur.peek()
            if tok is None or tok.kind in stop:
                return items
            if tok.kind in _SCALARISH:
                node = self._scalar_item()
                if node is not None:
                    items.append(node)
            elif tok.kind in _START_KINDS:
                items.append(self.parse_structural(depth))
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", f"unmatched close tag {tok.text!r}", tok
                )

    def _scalar_item(self) -> Scalar | None:
        # Merge a run of scalar/colon/comma tokens into one scalar item.
        parts: list[str] = []
        start = end = -1
        while True:
            tok = self.cur.peek()
            if tok is None or tok.kind not in _SCALARISH:
                break
            self.cur.advance()
            parts.append(tok.value)
            if start < 0:
                start = tok.byte_range[0]
            end = tok.byte_range[1]
        merged = "".join(parts).strip()
        if not merged:
            return None
        node = _typed_or_string(merged, self.strict_literals)
        self._note_span(node, start, end)
        return node

    def parse_structural(self, depth: int) -> Node:
        tok = self.cur.peek()
        assert tok is not None
        if tok.kind is TokenKind.START_USER_TAG:
            if tok.value in CAST_TAGS:
                return self.parse_cast(depth)
            return self.parse_tagged(depth)
        if tok.kind is TokenKind.SELF_CLOSE_USER_TAG:
            return self.parse_self_close()
        if tok.kind is TokenKind.START_OBJECT_TAG:
            return self.parse_object(depth)
        if tok.kind is TokenKind.START_LIST_TAG:
            return self.parse_list(depth)
        raise self._fail(
            "UNEXPECTED_TOKEN", "object item is only valid inside an object", tok
        )

    def parse_tagged(self, depth: int) -> Tagged:
        open_tok = self.cur.advance()
        self._check_depth(depth + 1, open_tok)
        path = parse_tag_path(open_tok.value, offset=open_tok.byte_range[0])
        children = self.parse_items(frozenset({TokenKind.END_USER_TAG}), depth + 1)
        close = self.cur.peek()
        if close is None:
            raise self._fail(
                "UNCLOSED_TAG", f"span \\{open_tok.value}\\ never closes", open_tok
            )
        self.cur.advance()
        if close.value != open_tok.value:
            if self.permissive_close:
                if self.warnings is not None:
                    self.warnings.append(
                        "MISMATCHED_CLOSE_TAG: close tag "
                        f"/{close.value}/ does not match \\{open_tok.value}\\"
                    )
            else:
                raise self._fail(
                    "MISMATCHED_CLOSE_TAG",
                    f"expected /{open_tok.value}/",
                    close,
                    expected=f"/{open_tok.value}/",
                )
        node = Tagged(path, tuple(children))
        self._note_span(node, open_tok.byte_range[0], close.byte_range[1])
        return node

    def parse_self_close(self) -> Node:
        tok = self.cur.advance()
        if tok.value == "null":
            node: Node = Scalar("null", ScalarKind.NULL, cast_explicit=True)
        elif tok.value in CAST_TAGS:
            raise self._fail(
                "UNEXPECTED_TOKEN", f"cast tag \\{tok.value}/ cannot self-close", tok
            )
        else:
            path = parse_tag_path(tok.value, offset=tok.byte_range[0])
            node = Tagged(path, (), self_closed=True)
        self._note_span(node, *tok.byte_range)
        return node

    def parse_cast(self, depth: int) -> Scalar:
        open_tok = self.cur.advance()
        self._check_depth(depth + 1, open_tok)
        name = open_tok.value
        parts: list[str] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail(
                    "UNCLOSED_TAG", f"cast \\{name}\\ never closes", open_tok
                )
            if tok.kind in _SCALARISH:
                parts.append(self.cur.advance().value)
            elif tok.kind is TokenKind.END_USER_TAG:
                break
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", f"cast \\{name}\\ content must be scalar", tok
                )
        close = self.cur.advance()
        if close.value != name:
            raise self._fail(
                "MISMATCHED_CLOSE_TAG",
                f"expected /{name}/",
                close,
                expected=f"/{name}/",
            )
        raw = "".join(parts)
        node = self._cast_scalar(name, raw, open_tok)
        self._note_span(node, open_tok.byte_range[0], close.byte_range[1])
        return node

    def _cast_scalar(self, name: str, raw: str, open_tok: SurfaceToken) -> Scalar:
        if name == "string":
            return Scalar(raw, ScalarKind.STRING, cast_explicit=True)
        trimmed = raw.strip()
        if name == "int":
            if not INT_RE.fullmatch(trimmed):
                raise self._fail(
                    "INVALID_CAST_LITERAL", f"{trimmed!r} is not an int", open_tok
                )
            return Scalar(trimmed, ScalarKind.INTEGER, cast_explicit=True)
        if name == "float":
            if not FLOAT_RE.fullmatch(trimmed):
                raise self._fail(
                    "INVALID_CAST_LITERAL", f"{trimmed!r} is not a float", open_tok
                )
            return Scalar(trimmed, ScalarKind.FLOAT, cast_explicit=True)
        if name == "bool":
            if trimmed not in ("true", "false"):
                raise self._fail(
                    "INVALID_CAST_LITERAL", f"{trimmed!r} is not a bool", open_tok
                )
            return Scalar(trimmed, ScalarKind.BOOLEAN, cast_explicit=True)
        # Verbose null form: content must be empty or the literal itself.
        if trimmed not in ("", "null"):
            raise self._fail(
                "INVALID_CAST_LITERAL", f"{trimmed!r} is not null", open_tok
            )
        return Scalar("null", ScalarKind.NULL, cast_explicit=True)

    def parse_object(self, depth: int) -> ObjectNode:
        open_tok = self.cur.advance()
        self._check_depth(depth + 1, open_tok)
        items: list[tuple[str, Node]] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "object never closes", open_tok)
            if tok.kind in _SCALARISH:
                run = self.cur.advance()
                if run.value.strip():
                    raise self._fail(
                        "UNEXPECTED_TOKEN",
                        "objects contain only object items",
                        run,
                    )
            elif tok.kind is TokenKind.START_OBJECT_ITEM_TAG:
                items.append(self.parse_object_item(depth + 1))
            elif tok.kind is TokenKind.END_OBJECT_TAG:
                close = self.cur.advance()
                if close.value != open_tok.value:
                    raise self._fail(
                        "MISMATCHED_CLOSE_TAG",
                        f"expected /{open_tok.value}/",
                        close,
                        expected=f"/{open_tok.value}/",
                    )
                node = ObjectNode(tuple(items))
                self._note_span(node, open_tok.byte_range[0], close.byte_range[1])
                return node
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "objects contain only object items", tok
                )

    def parse_object_item(self, depth: int) -> tuple[str, Node]:
        open_tok = self.cur.advance()
        self._check_depth(depth + 1, open_tok)
        key_parts: list[str] = []
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "object item never closes", open_tok)
            if tok.kind is TokenKind.COLON_SEPARATOR:
                self.cur.advance()
                break
            if tok.kind in (TokenKind.SCALAR_TEXT, TokenKind.LIST_SEPARATOR):
                key_parts.append(self.cur.advance().value)
            elif tok.kind is TokenKind.END_OBJECT_ITEM_TAG:
                raise self._fail(
                    "MISSING_COLON_SEPARATOR", "object item has no ':'", tok
                )
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "expected ':' after object item key", tok
                )
        key = "".join(key_parts).strip()
        value = self._parse_item_value(open_tok, depth)
        close = self.cur.advance()  # _parse_item_value leaves END at cursor
        if close.value != open_tok.value:
            raise self._fail(
                "MISMATCHED_CLOSE_TAG",
                f"expected /{open_tok.value}/",
                close,
                expected=f"/{open_tok.value}/",
            )
        return key, value

    def _parse_item_value(self, open_tok: SurfaceToken, depth: int) -> Node:
        parts: list[str] = []
        start = end = -1
        value: Node | None = None
        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "object item never closes", open_tok)
            if tok.kind in _SCALARISH:
                self.cur.advance()
                parts.append(tok.value)
                if start < 0:
                    start = tok.byte_range[0]
                end = tok.byte_range[1]
            elif tok.kind is TokenKind.END_OBJECT_ITEM_TAG:
                break
            elif tok.kind in _START_KINDS:
                if value is not None or "".join(parts).strip():
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "object item takes one value", tok
                    )
                parts.clear()
                value = self.parse_structural(depth)
            else:
                raise self._fail(
                    "UNEXPECTED_TOKEN", "unexpected tag in object item value", tok
                )
        merged = "".join(parts).strip()
        if value is not None:
            if merged:
                raise self._fail(
                    "UNEXPECTED_TOKEN",
                    "object item takes one value",
                    self.cur.peek(),
                )
            return value
        node = _typed_or_string(merged, self.strict_literals)
        if start >= 0:
            self._note_span(node, start, end)
        return node

    def parse_list(self, depth: int) -> ListNode:
        open_tok = self.cur.advance()
        self._check_depth(depth + 1, open_tok)
        elements: list[Node] = []
        parts: list[str] = []
        pending: Node | None = None
        start = end = -1
        separators = 0

        def finalize(at_sep: bool, where: SurfaceToken | None) -> None:
            nonlocal pending, start, end
            merged = "".join(parts).strip()
            if pending is not None:
                if merged:
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "list elements are separated by ','", where
                    )
                elements.append(pending)
            elif merged:
                node = _typed_or_string(merged, self.strict_literals)
                if start >= 0:
                    self._note_span(node, start, end)
                elements.append(node)
            elif at_sep or separators:
                raise self._fail("EMPTY_LIST_ELEMENT", "empty list element", where)
            parts.clear()
            pending = None
            start = end = -1

        while True:
            tok = self.cur.peek()
            if tok is None:
                raise self._fail("UNCLOSED_TAG", "list never closes", open_tok)
            if tok.kind is TokenKind.LIST_SEPARATOR:
                self.cur.advance()
                separators += 1
                finalize(True, tok)
            elif tok.kind in (TokenKind.SCALAR_TEXT, TokenKind.COLON_SEPARATOR):
                self.cur.advance()
                parts.append(tok.value)
                if start < 0:
                    start = tok.byte_range[0]
                end = tok.byte_range[1]
            elif tok.kind in _START_KINDS:
                if pending is not None or "".join(parts).strip():
                    raise self._fail(
                        "UNEXPECTED_TOKEN", "list elements are separated by ','", tok
                    )
                parts.clear()
                pending = self.parse_structural(depth)
            elif tok.kind is TokenKind.END_LIST_TAG:
                close = self.cur.advance()
                if close.value != open_tok.value:
                    raise self._fail(
                        "MISMATCHED_CLOSE_TAG",
                        f"expected /{open_tok.value}/",
                        close,
                        expected=f"/{open_tok.value}/",
                    )
                finalize(False, close)
                node = ListNode(tuple(elements))
                self._note_span(node, open_tok.byte_range[0], close.byte_range[1])
                return node
            else:
                raise self._fail("UNEXPECTED_TOKEN", "unexpected tag in list", tok)


def parse_surface(
    text: str,
    *,
    strict_literals: bool = False,
    permissive_close: bool = False,
    warnings: list[str] | None = None,
) -> Document:
    """Parse surface text into a Document.

    ``strict_literals`` additionally types bare integer/float runs (off by
    default: bare scalars are strings). ``permissive_close`` downgrades
    mismatched verbose close tags to entries in ``warnings``.
    """
    tokens = lex_surface(text)
    parser = _Parser(
        tokens,
        strict_literals=strict_literals,
        permissive_close=permissive_close,
        warnings=warnings,
    )
    return parser.parse()


# ---------------------------------------------------------------------------
# Printing


def _wrap_needed(scalar: Scalar, ctx: str) -> bool:
    if scalar.kind is not ScalarKind.STRING:
        return False
    raw = scalar.raw
    if raw == "" or raw != raw.strip():
        return True
    if raw in ("true", "false", "null"):
        return True
    if INT_RE.fullmatch(raw) or FLOAT_RE.fullmatch(raw):
        return True
    if ctx == "list" and "," in raw:
        return True
    return False


def _render_scalar(scalar: Scalar, ctx: str, force_wrap: bool = False) -> str:
    wrap = force_wrap or scalar.cast_explicit or _wrap_needed(scalar, ctx)
    if scalar.kind is ScalarKind.STRING:
        esc = escape_scalar_text(scalar.raw)
        return f"\\string\\{esc}/string/" if wrap else esc
    if scalar.kind is ScalarKind.INTEGER:
        return f"\\int\\{scalar.raw}/int/"
    if scalar.kind is ScalarKind.FLOAT:
        return f"\\float\\{scalar.raw}/float/"
    if scalar.kind is ScalarKind.BOOLEAN:
        return f"\\bool\\{scalar.raw}/bool/" if wrap else scalar.raw
    return "\\null/" if wrap else "null"


def _check_key(key: str) -> str:
    if ":" in key:
        raise PrintError(
            "UNREPRESENTABLE_KEY", f"key {key!r} contains ':' (cast the value instead)"
        )
    if key != key.strip():
        raise PrintError(
            "UNREPRESENTABLE_KEY", f"key {key!r} has boundary whitespace"
        )
    return escape_scalar_text(key)


class _IndentedPrinter:
    pad = "  "

    def render_doc(self, doc: Document) -> str:
        lines: list[str] = []
        prev_scalar = False
        for root in doc.roots:
            lines.extend(self.render(root, 0, "general", prev_scalar))
            prev_scalar = isinstance(root, Scalar)
        return "\n".join(lines) + "\n"

    def render(
        self, node: Node, depth: int, ctx: str, after_scalar: bool = False
    ) -> list[str]:
        pad = self.pad * depth
        if isinstance(node, Scalar):
            return [pad + _render_scalar(node, ctx, force_wrap=after_scalar)]
        if isinstance(node, Tagged):
            return self.render_tagged(node, depth)
        if isinstance(node, ObjectNode):
            return self.render_object(node, depth)
        return self.render_list(node, depth, ctx)

    def render_tagged(self, node: Tagged, depth: int) -> list[str]:
        pad = self.pad * depth
        text = node.tag.serialize()
        if node.self_closed:
            return [pad + f"\\{text}/"]
        if len(node.children) == 1 and isinstance(node.children[0], Scalar):
            inline = _render_scalar(node.children[0], "general")
            if "\n" not in inline:
                return [pad + f"\\{text}\\ {inline} /{text}/"]
        if not node.children:
            return [pad + f"\\{text}\\/{text}/"]
        lines = [pad + f"\\{text}\\"]
        prev_scalar = False
        for child in node.children:
            lines.extend(self.render(child, depth + 1, "general", prev_scalar))
            prev_scalar = isinstance(child, Scalar)
        lines.append(pad + f"/{text}/")
        return lines

    def render_object(self, node: ObjectNode, depth: int) -> list[str]:
        pad = self.pad * depth
        if not node.items:
            return [pad + "\\object\\/object/"]
        lines = [pad + "\\object\\"]
        for key, value in node.items:
            lines.extend(self.render_item(key, value, depth + 1))
        lines.append(pad + "/object/")
        return lines

    def render_item(self, key: str, value: Node, depth: int) -> list[str]:
        pad = self.pad * depth
        key_txt = _check_key(key)
        if isinstance(value, Scalar):
            inline = _render_scalar(value, "item")
            return [pad + f"\\object.item\\{key_txt}: {inline}/object.item/"]
        vlines = self.render(value, depth + 1, "item")
        if len(vlines) == 1:
            body = vlines[0].strip()
            return [pad + f"\\object.item\\{key_txt}: {body} /object.item/"]
        return (
            [pad + f"\\object.item\\{key_txt}:"] + vlines + [pad + "/object.item/"]
        )

    def render_list(self, node: ListNode, depth: int, ctx: str) -> list[str]:
        pad = self.pad * depth
        spelling = "object.list" if ctx == "item" else "list"
        if not node.elements:
            return [pad + f"\\{spelling}\\/{spelling}/"]
        rendered = [self.render(el, depth + 1, "list") for el in node.elements]
        if all(len(r) == 1 for r in rendered):
            joined = ", ".join(r[0].strip() for r in rendered)
            line = f"\\{spelling}\\ {joined} /{spelling}/"
            if len(pad + line) <= 100:
                return [pad + line]
        lines = [pad + f"\\{spelling}\\"]
        for i, r in enumerate(rendered):
            if i < len(rendered) - 1:
                r = r[:-1] + [r[-1] + ","]
            lines.extend(r)
        lines.append(pad + f"/{spelling}/")
        return lines


class _CompactPrinter:
    def render_doc(self, doc: Document) -> str:
        out: list[str] = []
        prev_scalar = False
        for root in doc.roots:
            out.append(self.render(root, "general", prev_scalar))
            prev_scalar = isinstance(root, Scalar)
        return "".join(out)

    def render(self, node: Node, ctx: str, after_scalar: bool = False) -> str:
        if isinstance(node, Scalar):
            return _render_scalar(node, ctx, force_wrap=after_scalar)
        if isinstance(node, Tagged):
            text = node.tag.serialize()
            if node.self_closed:
                return f"\\{text}/"
            body: list[str] = []
            prev_scalar = False
            for child in node.children:
                body.append(self.render(child, "general", prev_scalar))
                prev_scalar = isinstance(child, Scalar)
            return f"\\{text}\\{''.join(body)}/{text}/"
        if isinstance(node, ObjectNode):
            items = []
            for key, value in node.items:
                key_txt = _check_key(key)
                items.append(
                    f"\\object.item\\{key_txt}:{self.render(value, 'item')}"
                    "/object.item/"
                )
            return f"\\object\\{''.join(items)}/object/"
        spelling = "object.list" if ctx == "item" else "list"
        body = ",".join(self.render(el, "list") for el in node.elements)
        return f"\\{spelling}\\{body}/{spelling}/"


def print_surface(doc: Document, style: str = "indented") -> str:
    """Render a Document as surface text.

    "indented" mirrors hand-written layout (two-space indent, inline leaf
    spans); "compact" adds no optional whitespace at all. Both re-parse to
    a structurally equal Document.
    """
    with deep_recursion():
        if style == "indented":
            return _IndentedPrinter().render_doc(doc)
        if style == "compact":
            return _CompactPrinter().render_doc(doc)
    raise ValueError(f"unknown style {style!r}")
