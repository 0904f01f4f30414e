"""Pure-Python scan kernels.

Reference implementations of the two hot loops:

* ``scan_surface``   lexes surface text into raw segments
* ``segment_specials`` splits machine text into special-token occurrences
  and whitespace/word runs

``llmon._scan`` is the compiled twin; ``llmon._kernels`` picks whichever
imports. Offsets here are code-point indices (callers convert to bytes).
Errors are raised as ``ValueError((code, offset))`` and re-wrapped by the
caller; the kernels stay free of package imports.
"""

from __future__ import annotations

__all__ = ["scan_surface", "segment_specials", "BACKEND"]

BACKEND = "python"

# Segment kinds shared by both kernels' callers.
SEG_SCALAR = 0
SEG_START = 1
SEG_END = 2
SEG_SELF_CLOSE = 3
SEG_COLON = 4
SEG_COMMA = 5

_TAG_FIRST = set("_abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_TAG_REST = _TAG_FIRST | set("0123456789.:")


def scan_surface(text: str) -> list[tuple[int, int, int, str, str]]:
    """Lex surface text into (kind, start, end, raw, value) tuples.

    Scalar runs merge plain characters and escapes; value holds the decoded
    text while raw keeps the escape sequences. Tag segments carry the tag
    text (without delimiters) as value.
    """
    out: list[tuple[int, int, int, str, str]] = []
    n = len(text)
    i = 0
    run_start = -1
    run_parts: list[str] = []

    def flush(end: int) -> None:
        nonlocal run_start
        if run_start >= 0:
            out.append(
                (SEG_SCALAR, run_start, end, text[run_start:end], "".join(run_parts))
            )
            run_start = -1
            run_parts.clear()

    while i < n:
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "\\" or nxt == "/":
                if run_start < 0:
                    run_start = i
                run_parts.append(nxt)
                i += 2
            elif nxt in _TAG_FIRST:
                j = i + 1
                while j < n and text[j] in _TAG_REST:
                    j += 1
                if j < n and text[j] == "\\":
                    flush(i)
                    out.append((SEG_START, i, j + 1, text[i : j + 1], text[i + 1 : j]))
                    i = j + 1
                elif j < n and text[j] == "/":
                    flush(i)
                    out.append(
                        (SEG_SELF_CLOSE, i, j + 1, text[i : j + 1], text[i + 1 : j])
                    )
                    i = j + 1
                else:
                    raise ValueError(("UNTERMINATED_TAG", i))
            else:
                raise ValueError(("BAD_ESCAPE", i))
        elif ch == "/":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt in _TAG_FIRST:
                j = i + 1
                while j < n and text[j] in _TAG_REST:
                    j += 1
                if j < n and text[j] == "/":
                    flush(i)
                    out.append((SEG_END, i, j + 1, text[i : j + 1], text[i + 1 : j]))
                    i = j + 1
                else:
                    raise ValueError(("UNTERMINATED_TAG", i))
            else:
                raise ValueError(("UNESCAPED_SLASH", i))
        elif ch == ":":
            flush(i)
            out.append((SEG_COLON, i, i + 1, ":", ":"))
            i += 1
        elif ch == ",":
            flush(i)
            out.append((SEG_COMMA, i, i + 1, ",", ","))
            i += 1
        else:
            if run_start < 0:
                run_start = i
            run_parts.append(ch)
            i += 1
    flush(n)
    return out


def segment_specials(
    text: str, specials: tuple[str, ...]
) -> list[tuple[int, int, int]]:
    """Split machine text into (start, end, idx) segments.

    idx >= 0 indexes ``specials`` (which the caller sorts longest-first so
    longest match wins), -1 marks a word run, -2 a whitespace run. Runs
    break at every special occurrence and at word/whitespace boundaries.
    """
    out: list[tuple[int, int, int]] = []
    n = len(text)
    first_chars = {s[0] for s in specials if s}
    i = 0
    while i < n:
        matched = -1
        if text[i] in first_chars:
            for k, s in enumerate(specials):
                if text.startswith(s, i):
                    matched = k
                    break
        if matched >= 0:
            out.append((i, i + len(specials[matched]), matched))
            i += len(specials[matched])
            continue
        ws = text[i].isspace()
        j = i + 1
        while j < n and text[j].isspace() == ws:
            if text[j] in first_chars and any(
                text.startswith(s, j) for s in specials
            ):
                break
            j += 1
        out.append((i, j, -2 if ws else -1))
        i = j
    return out
