"""Operator images under the bosonization map and the constraints they satisfy.

For an edge ``e`` from tail ``t`` to head ``h``::

    D(γ_t γ_h) = (-iY)_e · ∏ Z_f

where ``f`` runs over the edges of ``t`` and of ``h`` lying strictly between
the open leg and ``e`` in that vertex's slot order. A vertex parity maps to
the star of Z's on its edges. Products of four bilinears around a plaquette
are one, so the matching product of images is a loop of Paulis that acts as
one on the image of the map; ``𝖯_p = (1 + L_p)/2`` projects onto it.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from src.bosonization.lattice import Edge, Lattice
from src.bosonization.network import boson_matrix, even_projector
from src.config import get_settings
from src.core.errors import RangeError, UnsupportedError
from src.core.models import ImageTable
from src.fermionops.oracle import jw_matrix
from src.fermionops.strings import (
    IDENTITY,
    HybridString,
    combine,
    gamma,
    majorana_string,
    parity,
    pauli_string,
)

logger = logging.getLogger(__name__)


def _pick_edge(lattice: Lattice, a: int, b: int, edge: int | None) -> Edge:
    if edge is not None:
        e = lattice.edges[edge]
        if {e.tail, e.head} != {a, b}:
            raise RangeError(f"edge {edge} does not join vertices {a} and {b}")
        return e
    joining = lattice.edges_between(a, b)
    if not joining:
        raise UnsupportedError(f"vertices {a} and {b} are not neighbours")
    return joining[0]


def bilinear_image(lattice: Lattice, a: int, b: int, edge: int | None = None) -> HybridString:
    """Image of ``γ_a γ_b`` for neighbours ``a``, ``b``, through ``edge`` when they share two."""
    e = _pick_edge(lattice, a, b, edge)
    image = pauli_string({e.index: "Y"}, coeff=-1j)
    for f in lattice.edges_before(e.tail, e.index) + lattice.edges_before(e.head, e.index):
        image = image * pauli_string({f: "Z"})
    return image if (a, b) == (e.tail, e.head) else -image


def image_of_bilinear(lattice: Lattice, v: int, axis: int, sign: int = -1) -> HybridString:
    """Image of ``γ_{v-x̂} γ_v`` (``sign=-1``) or ``γ_v γ_{v+x̂}`` (``sign=+1``).

    ``axis`` indexes the frame, so ``x̂`` is ``x̂_{axis+1}``.
    """
    if sign not in (1, -1):
        raise RangeError(f"sign must be +1 or -1, got {sign}")
    if not 0 <= axis < lattice.dim:
        raise RangeError(f"frame axis {axis} outside 0..{lattice.dim - 1}")
    u = lattice.step(v, axis, sign)
    e = lattice.slot_edge(v, axis, sign)
    if u is None or e is None:
        raise RangeError(f"vertex {v} has no neighbour along {'+' if sign > 0 else '-'}x{axis + 1}")
    pair = (u, v) if sign < 0 else (v, u)
    return bilinear_image(lattice, *pair, edge=e)


def parity_image(lattice: Lattice, v: int) -> HybridString:
    image = IDENTITY
    for e in lattice.incident(v):
        image = image * pauli_string({e.index: "Z"})
    return image


def bilinear(a: int, b: int) -> HybridString:
    return majorana_string(gamma(a), gamma(b))


def generator_images(lattice: Lattice) -> list[tuple[str, HybridString, HybridString]]:
    """``(label, fermionic operator, image)`` for every parity and edge bilinear."""
    out = [(f"P{v}", parity(v), parity_image(lattice, v)) for v in range(lattice.n_vertices)]
    for e in lattice.edges:
        out.append((f"g{e.tail}g{e.head}@e{e.index}", bilinear(e.tail, e.head),
                    bilinear_image(lattice, e.tail, e.head, edge=e.index)))
    return out


def image_table(lattice: Lattice) -> ImageTable:
    entries = {}
    for label, _, image in generator_images(lattice):
        row = {str(site): letter for site, letter in image.paulis}
        row["phase"] = str(image).split(" ", 1)[0]
        entries[label] = row
    return ImageTable(entries=entries)


# ── Plaquettes ──

@dataclass(frozen=True)
class PlaquetteLoop:
    base: int
    axes: tuple[int, int]
    corners: tuple[int, int, int, int]
    string: HybridString

    @property
    def sign(self) -> complex:
        return self.string.coeff


def plaquette_loops(lattice: Lattice) -> list[PlaquetteLoop]:
    """``L_p``: the images of ``(γ_0γ_1)(γ_1γ_2)(γ_2γ_3)(γ_3γ_0)`` around each plaquette.

    Corners go ``v, v+x̂_k, v+x̂_k+x̂_l, v+x̂_l``; each side uses the edge met
    by stepping along the frame from its lower corner.
    """
    loops = []
    for v, k, l in lattice.plaquettes():
        u1 = lattice.step(v, k)
        u2 = lattice.step(u1, l)
        u3 = lattice.step(v, l)
        sides = [
            (v, u1, lattice.slot_edge(v, k, 1)),
            (u1, u2, lattice.slot_edge(u1, l, 1)),
            (u2, u3, lattice.slot_edge(u3, k, 1)),
            (u3, v, lattice.slot_edge(v, l, 1)),
        ]
        string = IDENTITY
        for a, b, e in sides:
            string = string * bilinear_image(lattice, a, b, edge=e)
        loops.append(PlaquetteLoop(v, (k, l), (v, u1, u2, u3), string))
    return loops


def penalty_terms(lattice: Lattice) -> list[HybridString]:
    """``-Σ_p 𝖯_p`` with ``𝖯_p = (1 + L_p)/2``."""
    terms: list[HybridString] = []
    for loop in plaquette_loops(lattice):
        terms += [HybridString(-0.5), loop.string.scaled(-0.5)]
    return combine(terms)


# ── Constraint sweep ──

@dataclass
class ConstraintReport:
    lattice: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    loops: list[PlaquetteLoop] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_constraints(lattice: Lattice, threads: int | None = None) -> ConstraintReport:
    """Images must commute or anticommute exactly as the fermionic operators do.

    Every pair of generators (vertex parities and edge bilinears) is compared,
    split into one job per vertex. Each plaquette loop must carry a real unit
    sign and commute with every image.
    """
    gens = generator_images(lattice)
    owner = [v for v in range(lattice.n_vertices)] + [e.tail for e in lattice.edges]
    by_vertex: dict[int, list[int]] = {}
    for index, v in enumerate(owner):
        by_vertex.setdefault(v, []).append(index)

    def run(v: int) -> tuple[int, list[str]]:
        count, bad = 0, []
        for i in by_vertex.get(v, []):
            label_i, f_i, q_i = gens[i]
            for label_j, f_j, q_j in gens[i + 1:]:
                count += 1
                if f_i.commutation_sign(f_j) != q_i.commutation_sign(q_j):
                    bad.append(f"{label_i} vs {label_j}: images {q_i} and {q_j}")
        return count, bad

    workers = max(1, threads or get_settings().threads)
    vertices = range(lattice.n_vertices)
    if workers == 1:
        results = [run(v) for v in vertices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, vertices))

    report = ConstraintReport(lattice.describe())
    for count, bad in results:
        report.checked += count
        report.failures += bad

    report.loops = plaquette_loops(lattice)
    for loop in report.loops:
        if abs(abs(loop.sign) - 1) > 1e-12 or abs(loop.sign.imag) > 1e-12:
            report.failures.append(f"loop at {loop.base} on axes {loop.axes} has sign {loop.sign}")
        for label, _, image in gens:
            report.checked += 1
            if not loop.string.commutes(image):
                report.failures.append(f"loop at {loop.base} on axes {loop.axes} anticommutes with {label}")
    logger.info("Constraints on %s: %d checks, %d failures", report.lattice,
                report.checked, len(report.failures))
    return report


def check_dense(lattice: Lattice, tol: float | None = None) -> ConstraintReport:
    """Evaluate the network densely and compare every generator with its image.

    ``D`` must be an isometry on the even states, and ``D O D†`` must equal
    the image sandwiched by the projector ``D D†``.
    """
    tol = get_settings().tolerance if tol is None else tol
    d = boson_matrix(lattice)
    n, m = lattice.n_vertices, lattice.n_edges
    report = ConstraintReport(lattice.describe())

    even = even_projector(n)
    dev = float(np.abs(d.conj().T @ d - even).max())
    report.checked += 1
    if dev > tol:
        report.failures.append(f"D is not an isometry on even states (deviation {dev:.3g})")

    proj = d @ d.conj().T
    for label, fermionic, image in generator_images(lattice):
        lhs = d @ jw_matrix(fermionic, n) @ d.conj().T
        rhs = proj @ jw_matrix(image, 0, m) @ proj
        dev = float(np.abs(lhs - rhs).max())
        report.checked += 1
        if dev > tol:
            report.failures.append(f"{label}: conjugation misses {image} by {dev:.3g}")
    logger.info("Dense images on %s: %d checks, %d failures", report.lattice,
                report.checked, len(report.failures))
    return report


# ── Hamiltonians ──

def _as_gammas_and_parities(term: HybridString) -> tuple[complex, list[int], list[int]]:
    """Rewrite ``term`` as ``c · ∏ γ · ∏ P`` using ``γ'_b = -i γ_b P_b``."""
    coeff = term.coeff
    ms = term.majoranas
    gammas, parities = [], []
    for i, m in enumerate(ms):
        gammas.append(m.mode)
        if m.primed:
            coeff *= -1j
            parities.append(m.mode)
            # P_b moves right past every later Majorana on mode b
            if sum(1 for later in ms[i + 1:] if later.mode == m.mode) % 2:
                coeff = -coeff
    reduced = majorana_string(*[gamma(j) for j in gammas], coeff=coeff)
    return reduced.coeff, [m.mode for m in reduced.majoranas], parities


def term_image(lattice: Lattice, term: HybridString) -> HybridString:
    """Image of one even fermionic string built from neighbour bilinears and parities."""
    if term.paulis:
        raise UnsupportedError(f"term {term} already acts on qubits")
    if not term.is_even:
        raise UnsupportedError(f"term {term} is odd")
    if term.max_mode >= lattice.n_vertices:
        raise RangeError(f"term {term} acts outside the {lattice.n_vertices} vertex modes")
    coeff, gammas, parities = _as_gammas_and_parities(term)
    if len(gammas) == 0:
        image = IDENTITY
    elif len(gammas) == 2 and lattice.edges_between(*gammas):
        image = bilinear_image(lattice, *gammas)
    else:
        raise UnsupportedError(f"term {term} is not a neighbour bilinear times parities")
    for v in parities:
        image = image * parity_image(lattice, v)
    return image.scaled(coeff)


def simulate_hamiltonian_map(lattice: Lattice, terms: Iterable[HybridString],
                             penalty: bool = True) -> list[HybridString]:
    """``H_Q = D(H_F) - Σ_p 𝖯_p`` as a list of Pauli strings, like terms merged."""
    mapped = [term_image(lattice, t) for t in terms]
    if penalty:
        mapped += penalty_terms(lattice)
    out = combine(mapped)
    logger.debug("Mapped %d fermionic terms to %d qubit terms on %s",
                 len(mapped), len(out), lattice.describe())
    return out
