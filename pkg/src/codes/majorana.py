"""Majorana stabilizer code on the square lattice.

One fermion mode sits on every edge of a periodic ``Lx x Ly`` lattice. The
Majorana of an edge that points right or up from a vertex is unprimed there
and primed at the far end, so

    A_v = γ'_{d(v)} γ'_{l(v)} γ_{u(v)} γ_{r(v)},    B_p = ∏_{e ∈ p} P_e

with ``r, u, l, d`` the right, up, left and down edges of ``v``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce

from src.bosonization.lattice import Lattice
from src.config import get_settings
from src.core.errors import UnsupportedError
from src.fermionops.strings import IDENTITY, HybridString, gamma, gamma_prime, majorana_string, parity

logger = logging.getLogger(__name__)

_X, _Y = 0, 1


@dataclass(frozen=True)
class CodeLattice:
    lattice: Lattice
    vertex: tuple[HybridString, ...]
    plaquette: tuple[HybridString, ...]

    @property
    def extents(self) -> tuple[int, ...]:
        return self.lattice.extents

    @property
    def n_modes(self) -> int:
        return self.lattice.n_edges

    def stabilizers(self) -> list[tuple[str, HybridString]]:
        return ([(f"A{v}", s) for v, s in enumerate(self.vertex)]
                + [(f"B{p}", s) for p, s in enumerate(self.plaquette)])


def _edge(lattice: Lattice, v: int, axis: int) -> int:
    return lattice.edge_at(v, axis).index


def vertex_edges(lattice: Lattice, v: int) -> dict[str, int]:
    """Right, up, left and down edge of ``v``."""
    return {
        "r": _edge(lattice, v, _X),
        "u": _edge(lattice, v, _Y),
        "l": _edge(lattice, lattice.shift(v, _X, -1), _X),
        "d": _edge(lattice, lattice.shift(v, _Y, -1), _Y),
    }


def plaquette_edges(lattice: Lattice, v: int) -> tuple[int, int, int, int]:
    """Bottom, right, top and left edge of the plaquette above and right of ``v``."""
    return (
        _edge(lattice, v, _X),
        _edge(lattice, lattice.shift(v, _X, 1), _Y),
        _edge(lattice, lattice.shift(v, _Y, 1), _X),
        _edge(lattice, v, _Y),
    )


def vertex_stabilizer(lattice: Lattice, v: int) -> HybridString:
    e = vertex_edges(lattice, v)
    return majorana_string(gamma_prime(e["d"]), gamma_prime(e["l"]), gamma(e["u"]), gamma(e["r"]))


def plaquette_stabilizer(lattice: Lattice, v: int) -> HybridString:
    return reduce(lambda acc, e: acc * parity(e), plaquette_edges(lattice, v), IDENTITY)


def stabilizers(extents: tuple[int, int]) -> CodeLattice:
    """The code on a periodic lattice of at least ``2 x 2``."""
    extents = tuple(int(n) for n in extents)
    if len(extents) != 2:
        raise UnsupportedError(f"the code lives on a square lattice, got extents {extents}")
    if min(extents) < 2:
        raise UnsupportedError(f"the code needs at least a 2x2 torus, got {extents[0]}x{extents[1]}")
    lattice = Lattice(extents, periodic=True)
    vertices = range(lattice.n_vertices)
    code = CodeLattice(
        lattice,
        tuple(vertex_stabilizer(lattice, v) for v in vertices),
        tuple(plaquette_stabilizer(lattice, v) for v in vertices),
    )
    logger.debug("Majorana code on %s: %d modes, %d stabilizers",
                 lattice.describe(), code.n_modes, 2 * lattice.n_vertices)
    return code


# ── Checks ──

@dataclass
class CodeReport:
    extents: tuple[int, ...]
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    vertex_product_phase: complex = 0j

    @property
    def passed(self) -> bool:
        return not self.failures


def vertex_product(code: CodeLattice) -> tuple[complex, HybridString]:
    """``∏_v A_v = c · ∏_e P_e``; returns ``c`` and the product itself."""
    product = reduce(lambda acc, s: acc * s, code.vertex, IDENTITY)
    parities = reduce(lambda acc, e: acc * parity(e), range(code.n_modes), IDENTITY)
    if not product.same_operator(parities):
        return 0j, product
    return product.coeff / parities.coeff, product


def check_code(code: CodeLattice, threads: int | None = None) -> CodeReport:
    """Symbolic commutation of every stabilizer pair, squares, and the product laws."""
    gens = code.stabilizers()

    def run(i: int) -> tuple[int, list[str]]:
        label_i, s_i = gens[i]
        bad = []
        square = s_i * s_i
        if not (square.same_operator(IDENTITY) and square.coeff == 1):
            bad.append(f"{label_i} squares to {square}")
        for label_j, s_j in gens[i + 1:]:
            if not s_i.commutes(s_j):
                bad.append(f"{label_i} anticommutes with {label_j}")
        return len(gens) - i, bad

    workers = max(1, threads or get_settings().threads)
    if workers == 1:
        results = [run(i) for i in range(len(gens))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(gens))))

    report = CodeReport(code.extents)
    for count, bad in results:
        report.checked += count
        report.failures += bad

    phase, product = vertex_product(code)
    report.vertex_product_phase = phase
    report.checked += 2
    if abs(abs(phase) - 1) > 1e-12:
        report.failures.append(f"product of vertex stabilizers is {product}, not a total parity")
    plaquettes = reduce(lambda acc, s: acc * s, code.plaquette, IDENTITY)
    if not (plaquettes.same_operator(IDENTITY) and plaquettes.coeff == 1):
        report.failures.append(f"product of plaquette stabilizers is {plaquettes}")

    logger.info("Majorana code %s: %d checks, %d failures",
                "x".join(map(str, code.extents)), report.checked, len(report.failures))
    return report
