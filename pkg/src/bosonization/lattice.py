"""Cubic lattices with the per-vertex slot ordering the bosonization map needs.

Vertices are indexed with axis 0 fastest. Every lattice edge joins a base
vertex ``v`` to ``v + ê_a``; edges are numbered by base vertex, then axis.

The *frame* lists the signed basis vectors ``x̂_1 .. x̂_d`` as ``(axis, sign)``
pairs. Each edge is oriented along its frame vector: the tail sees it through
its ``+x̂_k`` slot, the head through its ``-x̂_k`` slot. At a vertex the slots
are ordered ``x̂_0 < x̂_1 < ... < x̂_d < -x̂_1 < ... < -x̂_d``, where ``x̂_0`` is
the open fermion leg; ``swapped`` exchanges the two slots of chosen frame
vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from src.core.errors import RangeError, UnsupportedError


def default_frame(dim: int) -> tuple[tuple[int, int], ...]:
    """Frame of the drawn networks.

    The chain runs with sites decreasing left to right, so its single vector
    points down the axis. From two dimensions on, every axis but the first
    points negative and they are listed from the last axis down, ending with
    ``+x̂``.
    """
    if dim < 1:
        raise RangeError(f"lattice dimension must be at least 1, got {dim}")
    if dim == 1:
        return ((0, -1),)
    return tuple((axis, -1) for axis in range(dim - 1, 0, -1)) + ((0, 1),)


@dataclass(frozen=True)
class Edge:
    index: int
    base: int
    axis: int
    tail: int
    head: int
    frame_index: int


@dataclass(frozen=True)
class Slot:
    """One incident slot of a vertex: ``sign * x̂_{k+1}`` and the edge behind it."""
    frame_index: int
    sign: int
    edge: int

    @property
    def label(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}x{self.frame_index + 1}"


@dataclass(frozen=True)
class Lattice:
    extents: tuple[int, ...]
    periodic: bool = True
    frame: tuple[tuple[int, int], ...] | None = None
    swapped: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "extents", tuple(int(n) for n in self.extents))
        object.__setattr__(self, "swapped", frozenset(self.swapped))
        d = len(self.extents)
        if d < 1:
            raise RangeError("a lattice needs at least one axis")
        if any(n < 1 for n in self.extents):
            raise RangeError(f"extents must be positive, got {self.extents}")
        if self.periodic and any(n < 2 for n in self.extents):
            raise UnsupportedError(f"a periodic axis needs extent at least 2, got {self.extents}")
        frame = default_frame(d) if self.frame is None else tuple(tuple(f) for f in self.frame)
        if sorted(a for a, _ in frame) != list(range(d)) or any(s not in (1, -1) for _, s in frame):
            raise UnsupportedError(f"frame {frame} is not a signed permutation of the {d} axes")
        object.__setattr__(self, "frame", frame)
        if any(not 0 <= k < d for k in self.swapped):
            raise RangeError(f"swapped frame indices {sorted(self.swapped)} outside 0..{d - 1}")

    # ── geometry ──

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def n_vertices(self) -> int:
        return math.prod(self.extents)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_cycles(self) -> int:
        """Dimension of the cycle space; the lattice is connected."""
        return self.n_edges - self.n_vertices + 1

    def coords(self, v: int) -> tuple[int, ...]:
        if not 0 <= v < self.n_vertices:
            raise RangeError(f"vertex {v} outside 0..{self.n_vertices - 1}")
        out = []
        for n in self.extents:
            out.append(v % n)
            v //= n
        return tuple(out)

    def index(self, coords: tuple[int, ...]) -> int:
        v, stride = 0, 1
        for c, n in zip(coords, self.extents):
            v += c * stride
            stride *= n
        return v

    def shift(self, v: int, axis: int, step: int) -> int | None:
        """``v + step * ê_axis``, or None past an open boundary."""
        c = list(self.coords(v))
        c[axis] += step
        n = self.extents[axis]
        if self.periodic:
            c[axis] %= n
        elif not 0 <= c[axis] < n:
            return None
        return self.index(tuple(c))

    def step(self, v: int, frame_index: int, sign: int = 1) -> int | None:
        """``v + sign * x̂_{frame_index + 1}``."""
        axis, s = self.frame[frame_index]
        return self.shift(v, axis, sign * s)

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        frame_of_axis = {axis: k for k, (axis, _) in enumerate(self.frame)}
        out: list[Edge] = []
        for v in range(self.n_vertices):
            for axis in range(self.dim):
                w = self.shift(v, axis, 1)
                if w is None:
                    continue
                k = frame_of_axis[axis]
                tail, head = (v, w) if self.frame[k][1] > 0 else (w, v)
                out.append(Edge(len(out), v, axis, tail, head, k))
        return tuple(out)

    @cached_property
    def _edge_index(self) -> dict[tuple[int, int], int]:
        return {(e.base, e.axis): e.index for e in self.edges}

    def edge_at(self, base: int, axis: int) -> Edge | None:
        index = self._edge_index.get((base, axis))
        return None if index is None else self.edges[index]

    def edges_between(self, a: int, b: int) -> list[Edge]:
        return [e for e in self.edges if {e.tail, e.head} == {a, b}]

    def incident(self, v: int) -> list[Edge]:
        return [self.edges[s.edge] for s in self.slots(v)]

    # ── slot ordering ──

    def slot_edge(self, v: int, frame_index: int, sign: int) -> int | None:
        axis, s = self.frame[frame_index]
        # the tail reaches its edge through +x̂_k
        base = v if sign * s > 0 else self.shift(v, axis, -1)
        if base is None:
            return None
        e = self.edge_at(base, axis)
        return None if e is None else e.index

    def slots(self, v: int) -> list[Slot]:
        """Edge slots of ``v`` in tick order; ``x̂_0`` sits before all of them."""
        self.coords(v)
        d = self.dim
        order: list[tuple[int, int]] = [(k, 1) for k in range(d)] + [(k, -1) for k in range(d)]
        for k in self.swapped:
            i, j = order.index((k, 1)), order.index((k, -1))
            order[i], order[j] = order[j], order[i]
        out = []
        for k, sign in order:
            e = self.slot_edge(v, k, sign)
            if e is not None:
                out.append(Slot(k, sign, e))
        return out

    def slot_position(self, v: int, edge: int) -> int:
        """Leg position of ``edge`` on the vertex spider of ``v`` (the open leg is 0)."""
        for pos, slot in enumerate(self.slots(v), start=1):
            if slot.edge == edge:
                return pos
        raise RangeError(f"edge {edge} does not touch vertex {v}")

    def edges_before(self, v: int, edge: int) -> list[int]:
        """Edges of ``v`` strictly between the open leg and ``edge`` in slot order."""
        pos = self.slot_position(v, edge)
        return [s.edge for s in self.slots(v)[: pos - 1]]

    # ── plaquettes ──

    def plaquettes(self) -> list[tuple[int, int, int]]:
        """``(v, k, l)`` for every unit square spanned by ``x̂_k`` and ``x̂_l`` at ``v``, ``k < l``."""
        out = []
        for v in range(self.n_vertices):
            for k in range(self.dim):
                for l in range(k + 1, self.dim):
                    u1 = self.step(v, k)
                    u3 = self.step(v, l)
                    if u1 is None or u3 is None or self.step(u1, l) is None:
                        continue
                    out.append((v, k, l))
        return out

    def describe(self) -> str:
        shape = "x".join(str(n) for n in self.extents)
        return f"{shape} {'torus' if self.periodic else 'open'}"
