"""Graded tensors — Z2-graded dense tensors and their five basic operations.

A tensor carries an ordered list of indices (its internal ordering). Each
index has an id, a direction (In is a bra, Out is a ket) and a bond
dimension ``even|odd``. Values ``0..even-1`` are parity-even, the rest are
parity-odd. Reordering two adjacent indices multiplies an entry by
``(-1)^(|x||y|)``; every operation below is built on that single rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Hashable, Sequence

import numpy as np

from src.config import get_settings
from src.core.errors import (
    CapacityError,
    DimensionError,
    DirectionError,
    ParityError,
    RangeError,
    SignatureError,
)

logger = logging.getLogger(__name__)


# ── Bond dimensions and indices ──

class Direction(str, Enum):
    IN = "in"
    OUT = "out"

    @property
    def flipped(self) -> "Direction":
        return Direction.OUT if self is Direction.IN else Direction.IN


@dataclass(frozen=True)
class BondDim:
    """Graded bond dimension ``even|odd``."""
    even: int
    odd: int

    def __post_init__(self) -> None:
        if self.even < 0 or self.odd < 0 or self.even + self.odd < 1:
            raise RangeError(f"illegal bond dimension {self.even}|{self.odd}")

    @property
    def total(self) -> int:
        return self.even + self.odd

    @property
    def parities(self) -> np.ndarray:
        return (np.arange(self.total) >= self.even).astype(np.int8)

    def __str__(self) -> str:
        return f"{self.even}|{self.odd}"


FERMION = BondDim(1, 1)
QUBIT = BondDim(2, 0)
ODD = BondDim(0, 1)


@dataclass(frozen=True)
class IndexSpec:
    id: Hashable
    direction: Direction
    dim: BondDim

    def flipped(self) -> "IndexSpec":
        return IndexSpec(self.id, self.direction.flipped, self.dim)

    def renamed(self, new_id: Hashable) -> "IndexSpec":
        return IndexSpec(new_id, self.direction, self.dim)


def parity_of(value: int, dim: BondDim) -> int:
    """Parity symbol |x| of an index value."""
    if not 0 <= value < dim.total:
        raise RangeError(f"value {value} outside 0..{dim.total - 1} for bond {dim}")
    return 0 if value < dim.even else 1


# ── Tensor value type ──

class GradedTensor:
    """Dense tensor over an ordered list of graded indices, total parity even."""

    parity: int = 0

    __slots__ = ("order", "data")

    def __init__(self, order: Sequence[IndexSpec], data: np.ndarray, check: bool = True):
        order = tuple(order)
        data = np.asarray(data, dtype=np.complex128)
        capacity = get_settings().capacity_legs
        if len(order) > capacity:
            logger.debug("Refusing %d-leg tensor (capacity %d)", len(order), capacity)
            raise CapacityError(f"{len(order)} legs exceed the capacity of {capacity}")
        ids = [spec.id for spec in order]
        if len(set(ids)) != len(ids):
            raise SignatureError(f"duplicate index ids in {ids}")
        shape = tuple(spec.dim.total for spec in order)
        if data.shape != shape:
            raise DimensionError(f"data shape {data.shape} does not match bonds {shape}")
        if check:
            data = _clear_roundoff(order, data, self.parity)
        data.setflags(write=False)
        self.order = order
        self.data = data

    # ── accessors ──

    @property
    def ids(self) -> tuple[Hashable, ...]:
        return tuple(spec.id for spec in self.order)

    @property
    def arity(self) -> int:
        return len(self.order)

    def position(self, index_id: Hashable) -> int:
        for pos, spec in enumerate(self.order):
            if spec.id == index_id:
                return pos
        raise SignatureError(f"unknown index id {index_id!r}")

    def spec(self, index_id: Hashable) -> IndexSpec:
        return self.order[self.position(index_id)]

    @property
    def scalar(self) -> complex:
        if self.order:
            raise SignatureError("tensor has open indices; it is not a scalar")
        return complex(self.data[()])

    def __repr__(self) -> str:
        legs = ", ".join(f"{s.id}:{s.direction.value}:{s.dim}" for s in self.order)
        kind = type(self).__name__
        return f"{kind}([{legs}])"


class OddGradedTensor(GradedTensor):
    """Same storage with total odd parity; produced when an ODD leg is split off."""

    parity = 1

    __slots__ = ()


def _clear_roundoff(order: Sequence[IndexSpec], data: np.ndarray, parity: int) -> np.ndarray:
    """Zero off-parity entries at roundoff level; refuse anything larger.

    The cutoff is ``parity_tolerance`` relative to the largest entry.
    """
    wrong = np.broadcast_to(_parity_grid(order) != parity, data.shape)
    stray = np.abs(data[wrong])
    if not stray.size or not stray.any():
        return data
    scale = max(1.0, float(np.abs(data).max()))
    worst = float(stray.max())
    if worst > get_settings().parity_tolerance * scale:
        raise ParityError(
            f"entries of parity {1 - parity} in a tensor of parity {parity} (up to {worst:.3g})"
        )
    logger.debug("Clearing off-parity roundoff of %.3g", worst)
    data = data.copy()
    data[wrong] = 0
    return data


def _build(order: Sequence[IndexSpec], data: np.ndarray, parity: int) -> GradedTensor:
    cls = OddGradedTensor if parity else GradedTensor
    return cls(order, data, check=False)


def scalar_tensor(value: complex) -> GradedTensor:
    """0-leg tensor holding one complex number."""
    return GradedTensor((), np.array(value, dtype=np.complex128))


def from_entries(order: Sequence[IndexSpec], entries: dict[tuple[int, ...], complex],
                 odd: bool = False) -> GradedTensor:
    """Build a tensor from a sparse map of index configurations to values."""
    shape = tuple(spec.dim.total for spec in order)
    data = np.zeros(shape, dtype=np.complex128)
    for config, value in entries.items():
        data[config] = value
    cls = OddGradedTensor if odd else GradedTensor
    return cls(order, data)


# ── Sign machinery ──

def _axis_parity(spec: IndexSpec, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = spec.dim.total
    return spec.dim.parities.reshape(shape)


def _parity_grid(order: Sequence[IndexSpec]) -> np.ndarray:
    """Total parity of every configuration, broadcastable to the tensor shape."""
    ndim = len(order)
    return reduce(
        np.bitwise_xor,
        (_axis_parity(spec, axis, ndim) for axis, spec in enumerate(order)),
        np.zeros((1,) * ndim, dtype=np.int8),
    )


def _inversion_sign(order: Sequence[IndexSpec], perm: Sequence[int]) -> np.ndarray | None:
    """Sign grid of a graded permutation; ``order`` is the new ordering.

    ``perm[k]`` is the old position of the index now at ``k``. Every pair whose
    relative order is inverted contributes ``(-1)^(|x_a||x_b|)``.
    """
    ndim = len(order)
    graded = [k for k, spec in enumerate(order) if spec.dim.odd]
    exponent = None
    for pos, j in enumerate(graded):
        for i in graded[:pos]:
            if perm[i] > perm[j]:
                term = _axis_parity(order[i], i, ndim) & _axis_parity(order[j], j, ndim)
                exponent = term if exponent is None else exponent ^ term
    if exponent is None:
        return None
    return 1 - 2 * exponent.astype(np.int8)


def permute(t: GradedTensor, ids: Sequence[Hashable]) -> GradedTensor:
    """Reorder indices to ``ids`` with the graded sign of every crossing."""
    ids = list(ids)
    if sorted(map(repr, ids)) != sorted(map(repr, t.ids)) or len(ids) != t.arity:
        raise SignatureError(f"{ids} is not a reordering of {list(t.ids)}")
    perm = [t.position(i) for i in ids]
    if perm == list(range(t.arity)):
        return t
    order = tuple(t.order[p] for p in perm)
    data = np.transpose(t.data, perm)
    sign = _inversion_sign(order, perm)
    if sign is not None:
        data = data * sign
    return _build(order, data, t.parity)


def transpose_adjacent(t: GradedTensor, pos: int) -> GradedTensor:
    """Swap the indices at ``pos`` and ``pos + 1``."""
    if not 0 <= pos < t.arity - 1:
        raise RangeError(f"position {pos} out of range for a {t.arity}-leg tensor")
    ids = list(t.ids)
    ids[pos], ids[pos + 1] = ids[pos + 1], ids[pos]
    return permute(t, ids)


def rename(t: GradedTensor, mapping: dict[Hashable, Hashable]) -> GradedTensor:
    """Relabel index ids; ordering and entries are untouched."""
    order = tuple(spec.renamed(mapping.get(spec.id, spec.id)) for spec in t.order)
    ids = [spec.id for spec in order]
    if len(set(ids)) != len(ids):
        raise SignatureError(f"renaming produces duplicate ids {ids}")
    return _build(order, np.array(t.data), t.parity)


# ── The five basic operations ──

def tensor_product(a: GradedTensor, b: GradedTensor) -> GradedTensor:
    """Union of index sets; ordering is ``a`` then ``b``."""
    clash = set(a.ids) & set(b.ids)
    if clash:
        raise SignatureError(f"index ids {sorted(map(repr, clash))} appear in both factors")
    data = np.multiply.outer(a.data, b.data)
    return _build(a.order + b.order, data, a.parity ^ b.parity)


def _check_pair(out_spec: IndexSpec, in_spec: IndexSpec) -> None:
    if out_spec.direction is not Direction.OUT or in_spec.direction is not Direction.IN:
        raise DirectionError(
            f"contraction needs one Out and one In index, got "
            f"{out_spec.id!r}:{out_spec.direction.value} and {in_spec.id!r}:{in_spec.direction.value}"
        )
    if out_spec.dim != in_spec.dim:
        raise DimensionError(
            f"cannot contract {out_spec.id!r} ({out_spec.dim}) with {in_spec.id!r} ({in_spec.dim})"
        )


def contract(t: GradedTensor, out_id: Hashable, in_id: Hashable) -> GradedTensor:
    """Contract an Out index with an In index of the same tensor.

    The pair is brought next to each other in the order ``(in||out)`` and the
    diagonal is summed.
    """
    out_spec, in_spec = t.spec(out_id), t.spec(in_id)
    _check_pair(out_spec, in_spec)
    rest = [i for i in t.ids if i not in (out_id, in_id)]
    moved = permute(t, rest + [in_id, out_id])
    data = np.trace(moved.data, axis1=-2, axis2=-1)
    return _build(moved.order[:-2], data, t.parity)


def contract_between(a: GradedTensor, b: GradedTensor,
                     pairs: Sequence[tuple[Hashable, Hashable]]) -> GradedTensor:
    """Contract ``a ⊗ b`` on ``pairs`` of (id in a, id in b) in one tensordot.

    Equal to ``tensor_product`` followed by one ``contract`` per pair.
    """
    clash = set(a.ids) & set(b.ids)
    if clash:
        raise SignatureError(f"index ids {sorted(map(repr, clash))} appear in both factors")
    if not pairs:
        return tensor_product(a, b)
    a_side = [p[0] for p in pairs]
    b_side = [p[1] for p in pairs]
    for ia, ib in pairs:
        sa, sb = a.spec(ia), b.spec(ib)
        if sa.direction is Direction.OUT:
            _check_pair(sa, sb)
        else:
            _check_pair(sb, sa)
    k = len(pairs)
    a_rest = [i for i in a.ids if i not in a_side]
    b_rest = [i for i in b.ids if i not in b_side]
    pa = permute(a, a_rest + a_side)
    pb = permute(b, list(reversed(b_side)) + b_rest)
    data_a = pa.data
    ndim = pa.arity
    # nested pairs (out||in) on the a side need one swap each
    for m, ia in enumerate(a_side):
        spec = pa.order[len(a_rest) + m]
        if spec.direction is Direction.OUT and spec.dim.odd:
            data_a = data_a * (1 - 2 * _axis_parity(spec, len(a_rest) + m, ndim))
    data = np.tensordot(
        data_a, pb.data,
        axes=(list(range(len(a_rest), len(a_rest) + k)), [k - 1 - m for m in range(k)]),
    )
    order = pa.order[: len(a_rest)] + pb.order[k:]
    return _build(order, data, a.parity ^ b.parity)


def _merged_values(first: BondDim, second: BondDim) -> tuple[np.ndarray, np.ndarray, BondDim]:
    even_pairs, odd_pairs = [], []
    for x in range(first.total):
        for y in range(second.total):
            parity = parity_of(x, first) ^ parity_of(y, second)
            (odd_pairs if parity else even_pairs).append((x, y))
    pairs = even_pairs + odd_pairs
    merged = BondDim(len(even_pairs), len(odd_pairs))
    return (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]), merged)


def block(t: GradedTensor, i: Hashable, j: Hashable,
          new_id: Hashable | None = None) -> GradedTensor:
    """Merge indices ``i`` and ``j`` into one index of the graded product dimension.

    Out indices block as ``|ij) = |i)|j)``, In indices as ``(ij| = (j|(i|``.
    The merged index takes the place of whichever of the two came first.
    Merged values list the parity-even pairs ``(x_i, x_j)`` first.
    """
    si, sj = t.spec(i), t.spec(j)
    if si.direction is not sj.direction:
        raise DirectionError(f"cannot block {i!r} ({si.direction.value}) with {j!r} ({sj.direction.value})")
    pair = [i, j] if si.direction is Direction.OUT else [j, i]
    slot = min(t.position(i), t.position(j))
    rest = [x for x in t.ids if x not in (i, j)]
    moved = permute(t, rest[:slot] + pair + rest[slot:])
    xi, xj, merged = _merged_values(si.dim, sj.dim)
    first, second = (xi, xj) if si.direction is Direction.OUT else (xj, xi)
    index = (slice(None),) * slot + (first, second)
    data = moved.data[index]
    spec = IndexSpec(new_id if new_id is not None else (i, j), si.direction, merged)
    order = moved.order[:slot] + (spec,) + moved.order[slot + 2:]
    return _build(order, data, t.parity)


def split(t: GradedTensor, merged_id: Hashable, spec_i: IndexSpec, spec_j: IndexSpec) -> GradedTensor:
    """Inverse of :func:`block` for a merged index built from ``spec_i`` and ``spec_j``."""
    merged = t.spec(merged_id)
    xi, xj, dim = _merged_values(spec_i.dim, spec_j.dim)
    if dim != merged.dim or spec_i.direction is not merged.direction \
            or spec_j.direction is not merged.direction:
        raise SignatureError(f"{merged_id!r} is not the block of {spec_i.id!r} and {spec_j.id!r}")
    slot = t.position(merged_id)
    first, second = (spec_i, spec_j) if merged.direction is Direction.OUT else (spec_j, spec_i)
    a, b = (xi, xj) if merged.direction is Direction.OUT else (xj, xi)
    shape = t.data.shape[:slot] + (first.dim.total, second.dim.total) + t.data.shape[slot + 1:]
    data = np.zeros(shape, dtype=np.complex128)
    data[(slice(None),) * slot + (a, b)] = t.data
    order = t.order[:slot] + (first, second) + t.order[slot + 1:]
    return _build(order, data, t.parity)


def dagger(t: GradedTensor) -> GradedTensor:
    """Flip every direction, reverse the ordering, conjugate the entries."""
    order = tuple(spec.flipped() for spec in reversed(t.order))
    data = np.conj(np.transpose(t.data, list(reversed(range(t.arity)))))
    return _build(order, data, t.parity)


def split_off_odd(t: GradedTensor, odd_id: Hashable) -> OddGradedTensor:
    """Move an ODD index to the front and drop it, leaving an odd-parity tensor."""
    spec = t.spec(odd_id)
    if spec.dim != ODD:
        raise DimensionError(f"{odd_id!r} is not an ODD index")
    moved = permute(t, [odd_id] + [i for i in t.ids if i != odd_id])
    return _build(moved.order[1:], moved.data[0], t.parity ^ 1)


# ── Operator layout ──

def operator_matrix(t: GradedTensor, out_ids: Sequence[Hashable],
                    in_ids: Sequence[Hashable]) -> np.ndarray:
    """Matrix of an even tensor with kets ``out_ids`` and bras ``in_ids``.

    Both lists run most-significant first. The canonical ordering is the kets
    followed by the bras in reverse, under which composing tensors is matrix
    multiplication.
    """
    out_ids, in_ids = list(out_ids), list(in_ids)
    for i in out_ids:
        if t.spec(i).direction is not Direction.OUT:
            raise DirectionError(f"{i!r} is not an Out index")
    for i in in_ids:
        if t.spec(i).direction is not Direction.IN:
            raise DirectionError(f"{i!r} is not an In index")
    moved = permute(t, out_ids + list(reversed(in_ids)))
    k = len(out_ids)
    axes = list(range(k)) + list(reversed(range(k, moved.arity)))
    data = np.transpose(moved.data, axes)
    rows = int(np.prod([t.spec(i).dim.total for i in out_ids]))
    cols = int(np.prod([t.spec(i).dim.total for i in in_ids]))
    return data.reshape(rows, cols)


def operator_tensor(matrix: np.ndarray, out_specs: Sequence[IndexSpec],
                    in_specs: Sequence[IndexSpec]) -> GradedTensor:
    """Inverse of :func:`operator_matrix`."""
    out_specs, in_specs = list(out_specs), list(in_specs)
    shape = [s.dim.total for s in out_specs] + [s.dim.total for s in in_specs]
    data = np.asarray(matrix, dtype=np.complex128).reshape(shape)
    k = len(out_specs)
    data = np.transpose(data, list(range(k)) + list(reversed(range(k, len(shape)))))
    return GradedTensor(out_specs + list(reversed(in_specs)), data)


# ── Comparison ──

@dataclass
class EqualityReport:
    equal: bool
    max_dev: float
    worst_index: tuple[int, ...] | None
    fitted_scalar: complex

    def __bool__(self) -> bool:
        return self.equal


def approx_equal(a: GradedTensor, b: GradedTensor, mode: str = "exact",
                 scalar: complex = 1.0, tol: float | None = None) -> EqualityReport:
    """Compare ``a`` with ``scalar * b`` (mode "exact") or ``e^{iφ} b`` (mode "phase").

    ``b`` is aligned to ``a``'s ordering by id with a graded permutation.
    """
    tol = get_settings().tolerance if tol is None else tol
    if set(map(repr, a.ids)) != set(map(repr, b.ids)) or a.arity != b.arity:
        raise SignatureError(f"index ids differ: {list(a.ids)} vs {list(b.ids)}")
    for spec in a.order:
        other = b.spec(spec.id)
        if (other.direction, other.dim) != (spec.direction, spec.dim):
            raise SignatureError(f"index {spec.id!r} has incompatible signatures")
    if a.parity != b.parity:
        raise SignatureError("tensors have different total parity")
    aligned = permute(b, list(a.ids)).data
    if mode == "exact":
        fitted = complex(scalar)
        target = fitted * aligned
    elif mode == "phase":
        norm = np.vdot(aligned, aligned)
        fitted = complex(np.vdot(aligned, a.data) / norm) if abs(norm) > 0 else 1.0 + 0j
        phase = fitted / abs(fitted) if abs(fitted) > 0 else 1.0 + 0j
        target = phase * aligned
    else:
        raise SignatureError(f"unknown comparison mode {mode!r}")
    diff = np.abs(a.data - target)
    if diff.size == 0:
        return EqualityReport(True, 0.0, None, fitted)
    worst = np.unravel_index(int(np.argmax(diff)), diff.shape) if diff.ndim else ()
    max_dev = float(diff.max())
    return EqualityReport(max_dev <= tol, max_dev, tuple(int(x) for x in worst), fitted)


def total_parity_ok(t: GradedTensor) -> bool:
    """True when every nonzero entry has the tensor's declared parity."""
    wrong = np.broadcast_to(_parity_grid(t.order) != t.parity, t.data.shape)
    return not np.any(t.data[wrong] != 0)
