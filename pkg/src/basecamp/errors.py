"""Shared diagnostic machinery.

Every user-facing error in the package derives from BasecampError so the
CLI can uniformly map diagnostics to exit code 1. Frontend errors carry a
Span pointing into the offending source text.
"""

from __future__ import annotations

from dataclasses import dataclass


class BasecampError(Exception):
    """Base class for all diagnostics raised by this package."""


@dataclass(frozen=True)
class Span:
    """1-based source position (start of the offending token or node)."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class SourceError(BasecampError):
    """Diagnostic anchored to a source location."""

    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span
