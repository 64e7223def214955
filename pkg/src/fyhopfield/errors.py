"""Exception hierarchy for fyhopfield."""

from __future__ import annotations


class HopfieldError(Exception):
    """Base class for every error raised by fyhopfield."""


class DomainError(HopfieldError, ValueError):
    """An input or parameter lies outside the domain of an operation."""


class CapacityError(HopfieldError):
    """A bounded search (vertex enumeration, rejection sampling) ran out of budget."""


class FormatError(HopfieldError):
    """A data file does not match its declared binary layout."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ConfigError(HopfieldError):
    """An experiment configuration is missing fields or holds invalid values."""
