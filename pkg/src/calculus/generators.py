"""The elementary tensors of the calculus.

A generator is described by a ``GeneratorSpec``: its kind, the ordered list of
legs and an optional parameter. The order of ``legs`` is the tick: leg 0 is
the first leg clockwise after the tick. ``make_tensor`` turns a spec into a
``GradedTensor`` whose index ids are the leg positions ``0..k-1``.

Spiders, W tensors and the two-leg wires all store their entries in the
internal ordering *reversed* leg order, i.e. ``... |x2)(x1|`` for legs
``[x1 In, x2 Out, ...]``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from src.core.errors import ArityError, WireTypeError
from src.core.graded import (
    FERMION,
    ODD,
    QUBIT,
    BondDim,
    Direction,
    GradedTensor,
    IndexSpec,
    _parity_grid,
    dagger,
    from_entries,
    rename,
    scalar_tensor,
)


class Wire(str, Enum):
    FERMION = "F"
    QUBIT = "Q"
    ODD = "O"

    @property
    def dim(self) -> BondDim:
        return {Wire.FERMION: FERMION, Wire.QUBIT: QUBIT, Wire.ODD: ODD}[self]


class Kind(str, Enum):
    X_SPIDER = "XSpider"
    Z_SPIDER = "ZSpider"
    W = "WTensor"
    W_DUAL = "WDual"
    HADAMARD = "Hadamard"
    QUBIT_Z = "QubitZSpider"
    QUBIT_X = "QubitXSpider"
    PARITY = "ParityDot"
    IDENTITY = "Identity"
    KET1 = "Ket1"
    SCALAR = "Scalar"
    RAW = "Raw"


@dataclass(frozen=True)
class Leg:
    wire: Wire
    direction: Direction

    def flipped(self) -> "Leg":
        return Leg(self.wire, self.direction.flipped)

    def __str__(self) -> str:
        return f"{self.wire.value}:{self.direction.value}"


# Shorthands used throughout rule and example construction
F_IN = Leg(Wire.FERMION, Direction.IN)
F_OUT = Leg(Wire.FERMION, Direction.OUT)
Q_IN = Leg(Wire.QUBIT, Direction.IN)
Q_OUT = Leg(Wire.QUBIT, Direction.OUT)
O_IN = Leg(Wire.ODD, Direction.IN)
O_OUT = Leg(Wire.ODD, Direction.OUT)


_ALLOWED_WIRES: dict[Kind, frozenset[Wire]] = {
    Kind.X_SPIDER: frozenset({Wire.FERMION, Wire.ODD}),
    Kind.Z_SPIDER: frozenset({Wire.FERMION, Wire.QUBIT}),
    Kind.W: frozenset({Wire.FERMION}),
    Kind.W_DUAL: frozenset({Wire.FERMION}),
    Kind.HADAMARD: frozenset({Wire.QUBIT}),
    Kind.QUBIT_Z: frozenset({Wire.QUBIT}),
    Kind.QUBIT_X: frozenset({Wire.QUBIT}),
    Kind.PARITY: frozenset({Wire.FERMION}),
    Kind.IDENTITY: frozenset({Wire.FERMION, Wire.QUBIT, Wire.ODD}),
    Kind.KET1: frozenset({Wire.FERMION, Wire.ODD}),
    Kind.SCALAR: frozenset(),
}


@dataclass(frozen=True)
class GeneratorSpec:
    """One node of a diagram.

    ``param`` is the amplitude ``z`` for a Z-spider, the phase ``α`` for the
    qubit spiders and the value for a scalar node. Raw nodes carry their
    tensor, whose ids must be the leg positions.
    """
    kind: Kind
    legs: tuple[Leg, ...] = ()
    param: complex | None = None
    tensor: GradedTensor | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "legs", tuple(self.legs))
        _validate(self)

    @property
    def arity(self) -> int:
        return len(self.legs)

    def label(self) -> str:
        legs = ",".join(str(leg) for leg in self.legs)
        if self.param is None:
            return f"{self.kind.value}[{legs}]"
        return f"{self.kind.value}({complex(self.param):.4g})[{legs}]"


def _validate(spec: GeneratorSpec) -> None:
    kind, legs = spec.kind, spec.legs
    if kind is Kind.RAW:
        if spec.tensor is None:
            raise ArityError("raw node without a tensor")
        if list(spec.tensor.ids) and sorted(spec.tensor.ids) != list(range(len(legs))):
            raise ArityError(f"raw tensor ids {list(spec.tensor.ids)} are not leg positions")
        for pos, leg in enumerate(legs):
            index = spec.tensor.spec(pos)
            if (index.direction, index.dim) != (leg.direction, leg.wire.dim):
                raise WireTypeError(f"raw tensor index {pos} does not match leg {leg}")
        return
    if kind is Kind.SCALAR and legs:
        raise ArityError("a scalar node has no legs")
    allowed = _ALLOWED_WIRES[kind]
    for leg in legs:
        if leg.wire not in allowed:
            raise WireTypeError(f"{kind.value} does not accept {leg.wire.name} legs")
    if kind is Kind.Z_SPIDER:
        fermions = sum(1 for leg in legs if leg.wire is Wire.FERMION)
        if fermions % 2:
            raise ArityError(f"Z-spider needs an even number of fermion legs, got {fermions}")
    if kind is Kind.HADAMARD and len(legs) != 2:
        raise ArityError(f"Hadamard has exactly two legs, got {len(legs)}")
    if kind in (Kind.PARITY, Kind.IDENTITY):
        if len(legs) != 2 or legs[0].direction is not Direction.IN \
                or legs[1].direction is not Direction.OUT or legs[0].wire is not legs[1].wire:
            raise ArityError(f"{kind.value} takes legs [In, Out] of one wire type")
    if kind in (Kind.W, Kind.W_DUAL):
        if len(legs) < 2:
            raise ArityError("W tensors need at least one output")
        head = Direction.IN if kind is Kind.W else Direction.OUT
        if legs[0].direction is not head or any(l.direction is head for l in legs[1:]):
            raise ArityError(f"{kind.value} legs must be [{head.value}, {head.flipped.value}...]")


# ── Constructors ──

def x_spider(*legs: Leg) -> GeneratorSpec:
    return GeneratorSpec(Kind.X_SPIDER, legs)


def z_spider(*legs: Leg, z: complex = 1.0) -> GeneratorSpec:
    return GeneratorSpec(Kind.Z_SPIDER, legs, complex(z))


def z_phase(*legs: Leg, alpha: float = 0.0) -> GeneratorSpec:
    """Z-spider drawn as a circle: amplitude ``e^{iα}``."""
    return z_spider(*legs, z=cmath.exp(1j * alpha))


def w_tensor(n_out: int) -> GeneratorSpec:
    return GeneratorSpec(Kind.W, (F_IN,) + (F_OUT,) * n_out)


def w_dual(n_in: int) -> GeneratorSpec:
    return GeneratorSpec(Kind.W_DUAL, (F_OUT,) + (F_IN,) * n_in)


def hadamard() -> GeneratorSpec:
    return GeneratorSpec(Kind.HADAMARD, (Q_IN, Q_OUT))


def qubit_z(*legs: Leg, alpha: float = 0.0) -> GeneratorSpec:
    return GeneratorSpec(Kind.QUBIT_Z, legs, complex(alpha))


def qubit_x(*legs: Leg, alpha: float = 0.0) -> GeneratorSpec:
    return GeneratorSpec(Kind.QUBIT_X, legs, complex(alpha))


def parity_dot() -> GeneratorSpec:
    return GeneratorSpec(Kind.PARITY, (F_IN, F_OUT))


def identity(wire: Wire = Wire.FERMION) -> GeneratorSpec:
    return GeneratorSpec(Kind.IDENTITY, (Leg(wire, Direction.IN), Leg(wire, Direction.OUT)))


def ket1() -> GeneratorSpec:
    """The fermionic ``|1)`` state: an X-spider with one fermion and one odd leg."""
    return GeneratorSpec(Kind.KET1, (F_OUT, O_OUT))


def scalar(value: complex) -> GeneratorSpec:
    return GeneratorSpec(Kind.SCALAR, (), complex(value))


def raw(tensor: GradedTensor) -> GeneratorSpec:
    """Wrap a tensor whose ids are ``0..k-1`` as a diagram node."""
    legs = []
    for pos in range(tensor.arity):
        index = tensor.spec(pos)
        wire = next(w for w in Wire if w.dim == index.dim)
        legs.append(Leg(wire, index.direction))
    return GeneratorSpec(Kind.RAW, tuple(legs), tensor=tensor)


# ── Tensors ──

def _reversed_order(legs: Sequence[Leg]) -> list[IndexSpec]:
    return [IndexSpec(pos, legs[pos].direction, legs[pos].wire.dim)
            for pos in reversed(range(len(legs)))]


def make_x_spider(legs: Sequence[Leg]) -> GradedTensor:
    """Entry 1 on every configuration of even total parity."""
    spec = x_spider(*legs)
    order = _reversed_order(spec.legs)
    shape = tuple(index.dim.total for index in order)
    even = np.broadcast_to(_parity_grid(order) == 0, shape)
    return GradedTensor(order, even.astype(np.complex128))


def make_z_spider(legs: Sequence[Leg], z: complex = 1.0) -> GradedTensor:
    """Entry 1 on all zeros, ``z`` on all ones."""
    spec = z_spider(*legs, z=z)
    if not spec.legs:
        return scalar_tensor(1.0 + complex(z))
    order = _reversed_order(spec.legs)
    k = len(order)
    return from_entries(order, {(0,) * k: 1.0, (1,) * k: complex(z)})


def make_w(n_out: int) -> GradedTensor:
    """``δ_{Σx, y}``: legs ``[y In, x1 Out, ..., xn Out]``."""
    spec = w_tensor(n_out)
    order = _reversed_order(spec.legs)
    entries = {(0,) * (n_out + 1): 1.0}
    for k in range(n_out):
        outputs = [0] * n_out
        outputs[n_out - 1 - k] = 1
        entries[tuple(outputs) + (1,)] = 1.0
    return from_entries(order, entries)


def make_w_dual(n_in: int) -> GradedTensor:
    """Hermitian conjugate of :func:`make_w`; leg 0 is the Out leg."""
    return dagger(make_w(n_in))


def make_qubit_generator(kind: Kind, arity: int, phase: float = 0.0,
                         directions: Sequence[Direction] | None = None) -> GradedTensor:
    """Standard qubit ZX generators on ``arity`` qubit legs.

    Without ``directions`` the first half of the legs are inputs.
    """
    if directions is None:
        directions = [Direction.IN] * (arity // 2) + [Direction.OUT] * (arity - arity // 2)
    legs = tuple(Leg(Wire.QUBIT, d) for d in directions)
    if kind is Kind.HADAMARD:
        if arity != 2:
            raise ArityError(f"Hadamard has exactly two legs, got {arity}")
        return make_tensor(GeneratorSpec(Kind.HADAMARD, legs))
    if kind not in (Kind.QUBIT_Z, Kind.QUBIT_X):
        raise WireTypeError(f"{kind.value} is not a qubit generator")
    return make_tensor(GeneratorSpec(kind, legs, complex(phase)))


def _qubit_tensor(legs: Sequence[Leg], entry) -> GradedTensor:
    order = _reversed_order(legs)
    data = np.zeros((2,) * len(order), dtype=np.complex128)
    for config in itertools.product((0, 1), repeat=len(order)):
        data[config] = entry(config)
    return GradedTensor(order, data)


def make_tensor(spec: GeneratorSpec) -> GradedTensor:
    """Dense tensor of a generator, index ids being leg positions."""
    kind = spec.kind
    if kind is Kind.RAW:
        return spec.tensor
    if kind is Kind.SCALAR:
        return scalar_tensor(spec.param)
    if kind in (Kind.X_SPIDER, Kind.KET1):
        return make_x_spider(spec.legs)
    if kind is Kind.Z_SPIDER:
        return make_z_spider(spec.legs, 1.0 if spec.param is None else spec.param)
    if kind is Kind.W:
        return make_w(spec.arity - 1)
    if kind is Kind.W_DUAL:
        return make_w_dual(spec.arity - 1)
    if kind is Kind.IDENTITY:
        dim = spec.legs[0].wire.dim.total
        return GradedTensor(_reversed_order(spec.legs), np.eye(dim, dtype=np.complex128))
    if kind is Kind.PARITY:
        return make_z_spider(spec.legs, -1.0)
    if kind is Kind.HADAMARD:
        return _qubit_tensor(spec.legs, lambda c: (-1) ** (c[0] * c[1]) / math.sqrt(2))
    alpha = complex(spec.param or 0).real
    if kind is Kind.QUBIT_Z:
        k = spec.arity
        if k == 0:
            return scalar_tensor(1 + cmath.exp(1j * alpha))
        return _qubit_tensor(
            spec.legs,
            lambda c: 1.0 if not any(c) else (cmath.exp(1j * alpha) if all(c) else 0.0),
        )
    if kind is Kind.QUBIT_X:
        k = spec.arity
        if k == 0:
            return scalar_tensor(1 + cmath.exp(1j * alpha))
        norm = 2 ** (-k / 2)
        return _qubit_tensor(
            spec.legs, lambda c: norm * (1 + cmath.exp(1j * alpha) * (-1) ** sum(c))
        )
    raise WireTypeError(f"no tensor for kind {kind!r}")


# ── Hermitian conjugation ──

def dagger_spec(spec: GeneratorSpec) -> tuple[GeneratorSpec, list[int]]:
    """Conjugate generator and the map ``old leg -> new leg``.

    Spiders conjugate to the same kind with flipped legs in reversed order;
    ``W`` and ``W_DUAL`` swap into each other with legs in place.
    """
    kind, k = spec.kind, spec.arity
    reverse = list(reversed(range(k)))
    if kind is Kind.W:
        return GeneratorSpec(Kind.W_DUAL, tuple(l.flipped() for l in spec.legs)), list(range(k))
    if kind is Kind.W_DUAL:
        return GeneratorSpec(Kind.W, tuple(l.flipped() for l in spec.legs)), list(range(k))
    if kind is Kind.RAW:
        conj = rename(dagger(spec.tensor), {old: k - 1 - old for old in range(k)})
        return raw(conj), reverse
    if kind is Kind.SCALAR:
        return scalar(complex(spec.param).conjugate()), []
    legs = tuple(leg.flipped() for leg in reversed(spec.legs))
    param = spec.param
    if kind is Kind.Z_SPIDER:
        param = complex(1.0 if param is None else param).conjugate()
    elif kind in (Kind.QUBIT_Z, Kind.QUBIT_X):
        param = complex(-complex(param or 0).real)
    if kind is Kind.KET1:
        kind = Kind.X_SPIDER
    return GeneratorSpec(kind, legs, param), reverse
