"""The bosonization map as a diagram.

One X-spider per vertex takes the vertex mode on its open leg (position 0)
and meets one wire per incident edge in slot order. Each edge carries a
three-leg Z-spider ``[F_IN, F_OUT, Q_OUT]`` that copies the wire value onto
the edge qubit, so the wire runs tail to head through it. A scalar
``2^{-c/2}``, with ``c`` the number of independent cycles, makes the map an
isometry on the even-parity subspace.

Boundary names: ``i{v}`` for vertex modes, ``oq{e}`` for edge qubits.
"""

from __future__ import annotations

import logging

import numpy as np

from src.bosonization.lattice import Lattice
from src.calculus.diagram import Diagram, DiagramBuilder, operator_of
from src.calculus.generators import F_IN, F_OUT, Q_OUT, scalar, x_spider, z_spider
from src.core.errors import RangeError

logger = logging.getLogger(__name__)


def _normalisation(n_cycles: int) -> float:
    return 2.0 ** (-n_cycles / 2)


def _finish(b: DiagramBuilder, n_vertices: int, n_edges: int) -> Diagram:
    n_cycles = n_edges - n_vertices + 1
    if n_cycles:
        b.add("norm", scalar(_normalisation(n_cycles)))
    for v in range(n_vertices):
        b.expose((f"v{v}", 0), f"i{v}")
    for e in range(n_edges):
        b.expose((f"e{e}", 2), f"oq{e}")
    return b.build()


def bosonize(lattice: Lattice) -> Diagram:
    """The bosonization network of ``lattice`` in any dimension."""
    b = DiagramBuilder()
    for v in range(lattice.n_vertices):
        legs = [F_IN] + [F_OUT if s.sign > 0 else F_IN for s in lattice.slots(v)]
        b.add(f"v{v}", x_spider(*legs))
    for e in lattice.edges:
        b.add(f"e{e.index}", z_spider(F_IN, F_OUT, Q_OUT))
    for e in lattice.edges:
        b.connect((f"v{e.tail}", lattice.slot_position(e.tail, e.index)), (f"e{e.index}", 0))
        b.connect((f"e{e.index}", 1), (f"v{e.head}", lattice.slot_position(e.head, e.index)))
    d = _finish(b, lattice.n_vertices, lattice.n_edges)
    logger.debug("Bosonization network on %s: %d vertices, %d edges",
                 lattice.describe(), lattice.n_vertices, lattice.n_edges)
    return d


def bosonize_1d(n: int, periodic: bool = False, swapped: bool = False) -> Diagram:
    """Chain of ``n`` sites drawn with labels decreasing left to right.

    Edge ``j`` joins sites ``j`` and ``j+1``; its wire runs from ``j+1`` into
    ``j``. Each vertex spider lists ``[x̂_0, +x̂, -x̂]``, or ``[x̂_0, -x̂, +x̂]``
    with ``swapped`` set.
    """
    if n < (2 if periodic else 1):
        raise RangeError(f"a {'periodic' if periodic else 'open'} chain of {n} sites is too short")
    n_edges = n if periodic else n - 1

    def has_plus(j: int) -> bool:
        return periodic or j >= 1

    def has_minus(j: int) -> bool:
        return periodic or j <= n - 2

    def plus_pos(j: int) -> int:
        return 1 + (swapped and has_minus(j))

    def minus_pos(j: int) -> int:
        return 1 + (not swapped and has_plus(j))

    b = DiagramBuilder()
    for j in range(n):
        slots = [(has_plus(j), F_OUT), (has_minus(j), F_IN)]
        if swapped:
            slots.reverse()
        b.add(f"v{j}", x_spider(F_IN, *[leg for present, leg in slots if present]))
    for e in range(n_edges):
        b.add(f"e{e}", z_spider(F_IN, F_OUT, Q_OUT))
    for e in range(n_edges):
        tail, head = (e + 1) % n, e
        b.connect((f"v{tail}", plus_pos(tail)), (f"e{e}", 0))
        b.connect((f"e{e}", 1), (f"v{head}", minus_pos(head)))
    return _finish(b, n, n_edges)


_DOWN, _RIGHT, _UP, _LEFT = range(4)


def bosonize_2d(lx: int, ly: int, periodic: bool = True) -> Diagram:
    """Square lattice with vertex slots ordered down, right, up, left.

    Horizontal wires run left to right, vertical wires top to bottom.
    """
    lattice = Lattice((lx, ly), periodic=periodic)  # validates the extents

    def index(x: int, y: int) -> int:
        return (x % lx) + lx * (y % ly)

    def present(x: int, y: int) -> list[bool]:
        if periodic:
            return [True] * 4
        return [y >= 1, x <= lx - 2, y <= ly - 2, x >= 1]

    def position(x: int, y: int, slot: int) -> int:
        return 1 + sum(present(x, y)[:slot])

    # (tail, head, horizontal) in the numbering of Lattice.edges
    edges: list[tuple[tuple[int, int], tuple[int, int], bool]] = []
    for y in range(ly):
        for x in range(lx):
            if periodic or x <= lx - 2:
                edges.append(((x, y), ((x + 1) % lx, y), True))
            if periodic or y <= ly - 2:
                edges.append(((x, (y + 1) % ly), (x, y), False))

    b = DiagramBuilder()
    for y in range(ly):
        for x in range(lx):
            kinds = [F_OUT, F_OUT, F_IN, F_IN]
            b.add(f"v{index(x, y)}", x_spider(F_IN, *[k for k, p in zip(kinds, present(x, y)) if p]))
    for e in range(len(edges)):
        b.add(f"e{e}", z_spider(F_IN, F_OUT, Q_OUT))
    for e, (tail, head, horizontal) in enumerate(edges):
        out_slot, in_slot = (_RIGHT, _LEFT) if horizontal else (_DOWN, _UP)
        b.connect((f"v{index(*tail)}", position(*tail, out_slot)), (f"e{e}", 0))
        b.connect((f"e{e}", 1), (f"v{index(*head)}", position(*head, in_slot)))
    return _finish(b, lattice.n_vertices, len(edges))


# ── Dense form ──

def fermion_names(lattice: Lattice) -> list[str]:
    return [f"i{v}" for v in reversed(range(lattice.n_vertices))]


def qubit_names(lattice: Lattice) -> list[str]:
    return [f"oq{e}" for e in reversed(range(lattice.n_edges))]


def boson_matrix(lattice: Lattice, diagram: Diagram | None = None) -> np.ndarray:
    """Dense ``D`` from ``2^V`` fermion states to ``2^E`` edge-qubit states."""
    d = bosonize(lattice) if diagram is None else diagram
    return operator_of(d, qubit_names(lattice), fermion_names(lattice))


def even_projector(n_modes: int) -> np.ndarray:
    return np.diag([1.0 if bin(x).count("1") % 2 == 0 else 0.0 for x in range(2 ** n_modes)])


def half_number_signs(n_modes: int) -> np.ndarray:
    """Diagonal ``(-1)^{N/2}`` on even states, one on odd states."""
    signs = []
    for x in range(2 ** n_modes):
        count = bin(x).count("1")
        signs.append((-1.0) ** (count // 2) if count % 2 == 0 else 1.0)
    return np.diag(signs)
