"""Exception types shared across the package.

Every exception carries a stable ``code`` string so callers (and the CLI)
can branch without parsing messages.
"""

from __future__ import annotations

__all__ = [
    "LlmonError",
    "ParseError",
    "PrintError",
    "ConvertError",
    "MaskError",
    "DatagenError",
]


class LlmonError(Exception):
    """Base class; ``code`` is a SHOUTY_SNAKE identifier."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ParseError(LlmonError):
    """Lexing or parsing failure.

    ``offset`` is a byte offset into the UTF-8 encoding of the input when
    known. ``expected`` and ``found`` describe the predictive parser's
    state for UnexpectedToken-style failures.
    """

    def __init__(
        self,
        code: str,
        message: str,
        *,
        offset: int | None = None,
        expected: str | None = None,
        found: str | None = None,
    ):
        super().__init__(code, message)
        self.offset = offset
        self.expected = expected
        self.found = found

    def __str__(self) -> str:
        loc = f" at byte {self.offset}" if self.offset is not None else ""
        return f"{self.code}{loc}: {self.message}"


class PrintError(LlmonError):
    """A Document cannot be rendered in the requested syntax."""


class ConvertError(LlmonError):
    """Cross-format translation failure (flatten conflicts, bad JSON...)."""


class MaskError(LlmonError):
    """Mask construction or expansion failure."""


class DatagenError(LlmonError):
    """Dataset construction failure (pool too small, bad record...)."""
