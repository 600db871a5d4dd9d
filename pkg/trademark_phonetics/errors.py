"""
Exception types raised by the phonetic feature pipeline.
Each one derives from the closest built-in so callers can catch either.
"""
from typing import Optional


class PhoneticFeatureError(Exception):
    """Base class for all pipeline errors."""


class UnknownSymbol(PhoneticFeatureError, ValueError):
    """A character matched no dictionary symbol and no alias."""

    def __init__(self, position: int, character: str, record_id: Optional[str] = None):
        self.position = position
        self.character = character
        self.record_id = record_id
        where = f" in record {record_id!r}" if record_id is not None else ""
        super().__init__(
            f"Unknown symbol {character!r} (U+{ord(character):04X}) at position {position}{where}"
        )

    def with_record(self, record_id: str) -> "UnknownSymbol":
        """Return a copy tagged with the offending record id."""
        return UnknownSymbol(self.position, self.character, record_id)


class EmptyPhoneticText(PhoneticFeatureError, ValueError):
    """Text produced no phonetic symbols."""


class DimensionMismatch(PhoneticFeatureError, ValueError):
    """Two features that must share a grid do not."""


class ShapeMismatch(PhoneticFeatureError, ValueError):
    """An array does not have the shape the network expects."""


class ZeroVector(PhoneticFeatureError, ValueError):
    """Cosine distance requested for an all-zero feature."""


class InsufficientData(PhoneticFeatureError, ValueError):
    """Too few samples, or only one class present."""


class DatasetFormatError(PhoneticFeatureError, ValueError):
    """A dataset line could not be parsed."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class FormatVersionMismatch(PhoneticFeatureError, ValueError):
    """A checkpoint is truncated, foreign, or built for another architecture."""


class IoError(PhoneticFeatureError, OSError):
    """Reading or writing an artifact failed."""
