# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``llmon._scan_py``.

Same API, same segment tuples, same ``ValueError((code, offset))``
contract. Any behavior change here must land in the pure version too;
the parity tests run both over the same corpus.
"""

from cpython.unicode cimport Py_UNICODE_ISSPACE

__all__ = ["scan_surface", "segment_specials", "BACKEND"]

BACKEND = "c"

SEG_SCALAR = 0
SEG_START = 1
SEG_END = 2
SEG_SELF_CLOSE = 3
SEG_COLON = 4
SEG_COMMA = 5


cdef inline bint _tag_first(Py_UCS4 ch):
    return (u'a' <= ch <= u'z') or (u'A' <= ch <= u'Z') or ch == u'_'


cdef inline bint _tag_rest(Py_UCS4 ch):
    return (
        _tag_first(ch)
        or (u'0' <= ch <= u'9')
        or ch == u'.'
        or ch == u':'
    )


def scan_surface(str text):
    """Lex surface text into (kind, start, end, raw, value) tuples."""
    cdef list out = []
    cdef list run_parts = []
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, j
    cdef Py_ssize_t run_start = -1
    cdef Py_UCS4 ch, nxt

    while i < n:
        ch = text[i]
        if ch == u'\\':
            nxt = text[i + 1] if i + 1 < n else u'\x00'
            if nxt == u'\\' or nxt == u'/':
                if run_start < 0:
                    run_start = i
                run_parts.append(text[i + 1])
                i += 2
            elif _tag_first(nxt):
                j = i + 1
                while j < n and _tag_rest(text[j]):
                    j += 1
                if j < n and text[j] == u'\\':
                    if run_start >= 0:
                        out.append((SEG_SCALAR, run_start, i,
                                    text[run_start:i], "".join(run_parts)))
                        run_start = -1
                        del run_parts[:]
                    out.append((SEG_START, i, j + 1,
                                text[i:j + 1], text[i + 1:j]))
                    i = j + 1
                elif j < n and text[j] == u'/':
                    if run_start >= 0:
                        out.append((SEG_SCALAR, run_start, i,
                                    text[run_start:i], "".join(run_parts)))
                        run_start = -1
                        del run_parts[:]
                    out.append((SEG_SELF_CLOSE, i, j + 1,
                                text[i:j + 1], text[i + 1:j]))
                    i = j + 1
                else:
                    raise ValueError(("UNTERMINATED_TAG", i))
            else:
                raise ValueError(("BAD_ESCAPE", i))
        elif ch == u'/':
            nxt = text[i + 1] if i + 1 < n else u'\x00'
            if _tag_first(nxt):
                j = i + 1
                while j < n and _tag_rest(text[j]):
                    j += 1
                if j < n and text[j] == u'/':
                    if run_start >= 0:
                        out.append((SEG_SCALAR, run_start, i,
                                    text[run_start:i], "".join(run_parts)))
                        run_start = -1
                        del run_parts[:]
                    out.append((SEG_END, i, j + 1,
                                text[i:j + 1], text[i + 1:j]))
                    i = j + 1
                else:
                    raise ValueError(("UNTERMINATED_TAG", i))
            else:
                raise ValueError(("UNESCAPED_SLASH", i))
        elif ch == u':':
            if run_start >= 0:
                out.append((SEG_SCALAR, run_start, i,
                            text[run_start:i], "".join(run_parts)))
                run_start = -1
                del run_parts[:]
            out.append((SEG_COLON, i, i + 1, ":", ":"))
            i += 1
        elif ch == u',':
            if run_start >= 0:
                out.append((SEG_SCALAR, run_start, i,
                            text[run_start:i], "".join(run_parts)))
                run_start = -1
                del run_parts[:]
            out.append((SEG_COMMA, i, i + 1, ",", ","))
            i += 1
        else:
            if run_start < 0:
                run_start = i
            run_parts.append(text[i])
            i += 1
    if run_start >= 0:
        out.append((SEG_SCALAR, run_start, n,
                    text[run_start:n], "".join(run_parts)))
    return out


def segment_specials(str text, tuple specials):
    """Split machine text into (start, end, idx) segments."""
    cdef list out = []
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, j
    cdef Py_ssize_t k, m = len(specials)
    cdef Py_ssize_t matched
    cdef bint ws, brk
    cdef str s
    cdef set first_chars = set()
    for s in specials:
        if s:
            first_chars.add(s[0])

    while i < n:
        matched = -1
        if text[i] in first_chars:
            for k in range(m):
                s = <str> specials[k]
                if text.startswith(s, i):
                    matched = k
                    break
        if matched >= 0:
            s = <str> specials[matched]
            out.append((i, i + len(s), matched))
            i += len(s)
            continue
        ws = Py_UNICODE_ISSPACE(text[i]) != 0
        j = i + 1
        while j < n and (Py_UNICODE_ISSPACE(text[j]) != 0) == ws:
            if text[j] in first_chars:
                brk = False
                for k in range(m):
                    s = <str> specials[k]
                    if text.startswith(s, j):
                        brk = True
                        break
                if brk:
                    break
            j += 1
        out.append((i, j, -2 if ws else -1))
        i = j
    return out
