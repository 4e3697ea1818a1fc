"""Signed products of qubit Paulis and Majorana operators.

A ``HybridString`` is ``coeff · (Pauli letters on qubit sites) · γ_{k1} γ_{k2} ...``.
Majoranas are kept in canonical order (every γ before every γ', each group
by mode) with the sign of the swaps folded into the coefficient; a repeated
Majorana squares to one. Qubit and Majorana parts act on different spaces
and commute with each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from src.core.errors import InputError, RangeError

_PAULI_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True, order=True)
class Majorana:
    """``γ_mode`` or, with ``primed``, ``γ'_mode``; sorts in canonical order."""
    primed: bool
    mode: int

    def __str__(self) -> str:
        return f"γ'{self.mode}" if self.primed else f"γ{self.mode}"


def gamma(mode: int) -> Majorana:
    return Majorana(False, mode)


def gamma_prime(mode: int) -> Majorana:
    return Majorana(True, mode)


def _normal_order(items: Iterable[Majorana]) -> tuple[int, tuple[Majorana, ...]]:
    """Sort by adjacent swaps, cancelling equal neighbours; returns (sign, sorted)."""
    seq = list(items)
    sign = 1
    i = 0
    while i < len(seq) - 1:
        a, b = seq[i], seq[i + 1]
        if a == b:
            del seq[i:i + 2]
            i = max(i - 1, 0)
        elif b < a:
            seq[i], seq[i + 1] = b, a
            sign = -sign
            i = max(i - 1, 0)
        else:
            i += 1
    return sign, tuple(seq)


def _coefficient_str(c: complex) -> str:
    for value, text in ((1, "+"), (-1, "-"), (1j, "+i"), (-1j, "-i")):
        if c == value:
            return text
    return f"({c.real:.6g}{c.imag:+.6g}j)"


@dataclass(frozen=True)
class HybridString:
    coeff: complex = 1.0 + 0j
    paulis: tuple[tuple[int, str], ...] = ()
    majoranas: tuple[Majorana, ...] = ()
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self._checked:
            return
        letters: dict[int, str] = {}
        for site, letter in self.paulis:
            if letter not in "IXYZ" or len(letter) != 1:
                raise InputError(f"unknown Pauli letter {letter!r}")
            if site < 0:
                raise RangeError(f"negative qubit site {site}")
            if site in letters:
                raise InputError(f"qubit site {site} appears twice; multiply strings instead")
            if letter != "I":
                letters[site] = letter
        for m in self.majoranas:
            if m.mode < 0:
                raise RangeError(f"negative mode {m.mode}")
        sign, ordered = _normal_order(self.majoranas)
        object.__setattr__(self, "coeff", complex(self.coeff) * sign)
        object.__setattr__(self, "paulis", tuple(sorted(letters.items())))
        object.__setattr__(self, "majoranas", ordered)
        object.__setattr__(self, "_checked", True)

    @classmethod
    def of(cls, coeff: complex = 1.0, paulis: Mapping[int, str] | None = None,
           majoranas: Iterable[Majorana] = ()) -> "HybridString":
        return cls(complex(coeff), tuple((paulis or {}).items()), tuple(majoranas))

    # ── structure ──

    @property
    def pauli_map(self) -> dict[int, str]:
        return dict(self.paulis)

    @property
    def majorana_count(self) -> int:
        return len(self.majoranas)

    @property
    def is_even(self) -> bool:
        return self.majorana_count % 2 == 0

    @property
    def max_mode(self) -> int:
        return max((m.mode for m in self.majoranas), default=-1)

    @property
    def max_site(self) -> int:
        return max((site for site, _ in self.paulis), default=-1)

    def same_operator(self, other: "HybridString") -> bool:
        """True when the two strings differ at most in their coefficient."""
        return self.paulis == other.paulis and self.majoranas == other.majoranas

    # ── algebra ──

    def scaled(self, factor: complex) -> "HybridString":
        return HybridString(self.coeff * factor, self.paulis, self.majoranas, _checked=True)

    def __neg__(self) -> "HybridString":
        return self.scaled(-1)

    def __mul__(self, other: "HybridString | complex") -> "HybridString":
        if not isinstance(other, HybridString):
            return self.scaled(complex(other))
        coeff = self.coeff * other.coeff
        letters = self.pauli_map
        for site, letter in other.paulis:
            mine = letters.pop(site, "I")
            if mine == "I":
                letters[site] = letter
                continue
            phase, product = _PAULI_PRODUCT[(mine, letter)]
            coeff *= phase
            if product != "I":
                letters[site] = product
        return HybridString(coeff, tuple(letters.items()), self.majoranas + other.majoranas)

    def __rmul__(self, factor: complex) -> "HybridString":
        return self.scaled(complex(factor))

    def dagger(self) -> "HybridString":
        """Conjugate coefficient, reversed Majorana order (Paulis are Hermitian)."""
        k = self.majorana_count
        sign = -1 if (k * (k - 1) // 2) % 2 else 1
        return HybridString(self.coeff.conjugate() * sign, self.paulis, self.majoranas, _checked=True)

    def commutation_sign(self, other: "HybridString") -> int:
        """``+1`` if the strings commute, ``-1`` if they anticommute."""
        shared = len(set(self.majoranas) & set(other.majoranas))
        exponent = self.majorana_count * other.majorana_count - shared
        theirs = other.pauli_map
        for site, letter in self.paulis:
            other_letter = theirs.get(site)
            if other_letter is not None and other_letter != letter:
                exponent += 1
        return -1 if exponent % 2 else 1

    def commutes(self, other: "HybridString") -> bool:
        return self.commutation_sign(other) == 1

    def __str__(self) -> str:
        factors = [f"{letter}{site}" for site, letter in reversed(self.paulis)]
        factors += [str(m) for m in self.majoranas]
        body = " ".join(factors) if factors else "1"
        return f"{_coefficient_str(self.coeff)} {body}"


IDENTITY = HybridString()


def majorana_string(*ops: Majorana, coeff: complex = 1.0) -> HybridString:
    """The ordered product ``coeff · ops[0] ops[1] ...``."""
    return HybridString.of(coeff, majoranas=ops)


def pauli_string(letters: Mapping[int, str], coeff: complex = 1.0) -> HybridString:
    return HybridString.of(coeff, paulis=letters)


def parity(mode: int) -> HybridString:
    """Local fermion parity ``P_j = i γ_j γ'_j``."""
    return majorana_string(gamma(mode), gamma_prime(mode), coeff=1j)


def annihilation(mode: int) -> list[HybridString]:
    """``a_j = (γ'_j + i γ_j) / 2`` as a weighted sum of strings."""
    return [majorana_string(gamma_prime(mode), coeff=0.5),
            majorana_string(gamma(mode), coeff=0.5j)]


def creation(mode: int) -> list[HybridString]:
    """``a†_j = (γ'_j - i γ_j) / 2``."""
    return [majorana_string(gamma_prime(mode), coeff=0.5),
            majorana_string(gamma(mode), coeff=-0.5j)]


def multiply_sums(first: Iterable[HybridString], second: Iterable[HybridString]) -> list[HybridString]:
    """Product of two weighted sums, like terms merged and zeros dropped."""
    second = list(second)
    return combine(a * b for a in first for b in second)


def combine(terms: Iterable[HybridString], tol: float = 1e-12) -> list[HybridString]:
    merged: dict[tuple, HybridString] = {}
    for term in terms:
        key = (term.paulis, term.majoranas)
        if key in merged:
            term = HybridString(merged[key].coeff + term.coeff, term.paulis, term.majoranas,
                                _checked=True)
        merged[key] = term
    return [t for t in merged.values() if abs(t.coeff) > tol]
