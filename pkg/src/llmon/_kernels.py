"""Kernel selection: compiled scan loops when built, pure Python otherwise."""

from __future__ import annotations

from llmon import _scan_py

try:
    from llmon import _scan as _impl  # type: ignore[attr-defined]

    BACKEND = "c"
except ImportError:
    _impl = _scan_py
    BACKEND = "python"

# Segment kind constants are defined once, in the reference module.
SEG_SCALAR = _scan_py.SEG_SCALAR
SEG_START = _scan_py.SEG_START
SEG_END = _scan_py.SEG_END
SEG_SELF_CLOSE = _scan_py.SEG_SELF_CLOSE
SEG_COLON = _scan_py.SEG_COLON
SEG_COMMA = _scan_py.SEG_COMMA

scan_surface = _impl.scan_surface
segment_specials = _impl.segment_specials
