"""Domain errors.

Every error is a ``ValueError`` so callers validating inputs generically keep
working; the subclasses let the CLI and tests tell failure kinds apart.
"""

from __future__ import annotations


class FerrozxError(ValueError):
    """Base class of all engine errors."""


class RangeError(FerrozxError):
    """An index value or a leg position lies outside its range."""


class CapacityError(FerrozxError):
    """A dense tensor would exceed the configured leg capacity."""


class SignatureError(FerrozxError):
    """Index ids collide, are unknown, or two signatures cannot be aligned."""


class DirectionError(FerrozxError):
    """An operation received legs with the wrong In/Out directions."""


class DimensionError(FerrozxError):
    """Two legs that must agree have different bond dimensions."""


class WireTypeError(FerrozxError):
    """A generator was given a wire type it does not accept."""


class ArityError(FerrozxError):
    """A generator was given an illegal number of legs."""


class ParityError(FerrozxError):
    """An odd-parity leg was left unpaired where an even operator is required."""


class SingularityError(FerrozxError):
    """A Schur-complement block is not invertible."""

    def __init__(self, message: str, block: tuple[int, ...] = ()):
        super().__init__(message)
        self.block = block


class PoleError(FerrozxError):
    """A parametrised construction was evaluated at its pole."""


class InputError(FerrozxError):
    """Malformed numeric input or document."""


class UnsupportedError(FerrozxError):
    """A requested construction is outside what the engine supports."""


class EmbeddingError(FerrozxError):
    """A match site does not embed the rule's left-hand side into the host."""
