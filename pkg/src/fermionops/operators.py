"""Operator diagrams for Majoranas, ladder operators, the Kitaev chain and scattering.

Operators act on modes ``j`` through legs ``i{j}`` (In) and ``o{j}`` (Out),
on qubits through ``iq{k}``/``oq{k}``. An odd operator carries one open ODD
leg named ``odd``; its tensor is ``φ·K`` for an Out odd leg and ``K·φ̄`` for
an In one. Two odd operators become an even one with :func:`pair_odd`.
"""

from __future__ import annotations

import cmath
import logging
import math
from typing import Iterable

import numpy as np

from src.calculus.diagram import (
    Diagram,
    DiagramBuilder,
    close,
    evaluate,
    juxtapose,
    operator_of,
    rename_boundary,
    single,
    then,
)
from src.calculus.generators import (
    F_IN,
    F_OUT,
    O_IN,
    O_OUT,
    Q_IN,
    Q_OUT,
    Wire,
    identity,
    ket1,
    parity_dot,
    qubit_x,
    qubit_z,
    raw,
    scalar,
    w_dual,
    w_tensor,
    x_spider,
    z_spider,
)
from src.config import get_settings
from src.core.errors import ParityError, PoleError, RangeError
from src.core.graded import Direction, EqualityReport, approx_equal, operator_tensor, rename
from src.fermionops.oracle import jw_dense, mode_names, operator_specs
from src.fermionops.strings import HybridString, Majorana, gamma, gamma_prime, majorana_string

logger = logging.getLogger(__name__)

ODD_LEG = "odd"


# ── Layout helpers ──

def identity_layer(n_modes: int, n_qubits: int = 0) -> Diagram:
    b = DiagramBuilder()
    for j in range(n_modes):
        b.add(f"id{j}", identity(Wire.FERMION))
        b.expose((f"id{j}", 0), f"i{j}").expose((f"id{j}", 1), f"o{j}")
    for k in range(n_qubits):
        b.add(f"idq{k}", identity(Wire.QUBIT))
        b.expose((f"idq{k}", 0), f"iq{k}").expose((f"idq{k}", 1), f"oq{k}")
    return b.build()


def pad(d: Diagram, n_modes: int, n_qubits: int = 0) -> Diagram:
    """Add identity wires on every mode and qubit ``d`` does not touch."""
    names = set(d.boundary_names)
    outs, _ = mode_names(n_modes, n_qubits)
    for out in outs:
        key = out[1:]
        if out in names or f"i{key}" in names:
            continue
        wire = Wire.QUBIT if key.startswith("q") else Wire.FERMION
        d = juxtapose(d, single(identity(wire), [f"i{key}", out], node_id=f"pad{key}"))
    return d


def operator_matrix_of(d: Diagram, n_modes: int, n_qubits: int = 0) -> np.ndarray:
    """Matrix of an even operator diagram in the oracle layout."""
    odd = d.open_odd_legs()
    if odd:
        raise ParityError(f"unpaired odd legs {odd}; pair them before extracting an operator")
    outs, ins = mode_names(n_modes, n_qubits)
    return operator_of(pad(d, n_modes, n_qubits), outs, ins)


def dense_operator_diagram(matrix: np.ndarray, n_modes: int, n_qubits: int = 0,
                           node_id: str = "rho", ket: bool = False) -> Diagram:
    """One raw node holding a dense operator, or a state when ``ket`` is set."""
    outs, ins = operator_specs(n_modes, n_qubits)
    t = operator_tensor(np.asarray(matrix, dtype=np.complex128), outs, [] if ket else ins)
    names = [str(i) for i in t.ids]
    t = rename(t, {name: pos for pos, name in enumerate(names)})
    return single(raw(t), names, node_id=node_id)


def check_against_oracle(d: Diagram, expected: HybridString | Iterable[HybridString],
                         n_modes: int, n_qubits: int = 0, tol: float | None = None) -> EqualityReport:
    odd = d.open_odd_legs()
    if odd:
        raise ParityError(f"unpaired odd legs {odd}")
    tensor = evaluate(pad(d, n_modes, n_qubits))
    return approx_equal(tensor, jw_dense(expected, n_modes, n_qubits), tol=tol)


# ── Odd operators ──

def majorana_diagram(m: Majorana) -> Diagram:
    """``γ'_j`` is one X-spider ``[In, Out, odd Out]``; ``γ_j = i γ'_j P_j``."""
    j = m.mode
    b = DiagramBuilder()
    b.add("g", x_spider(F_IN, F_OUT, O_OUT))
    if m.primed:
        b.expose(("g", 0), f"i{j}")
    else:
        b.add("p", parity_dot())
        b.add("s", scalar(1j))
        b.connect(("p", 1), ("g", 0))
        b.expose(("p", 0), f"i{j}")
    b.expose(("g", 1), f"o{j}").expose(("g", 2), ODD_LEG)
    return b.build()


def annihilation_diagram(mode: int) -> Diagram:
    """``a_j``: a W tensor whose second branch ends in ``(1|``."""
    b = DiagramBuilder()
    b.add("w", w_tensor(2))
    b.add("bra", x_spider(O_IN, F_IN))
    b.connect(("w", 2), ("bra", 1))
    b.expose(("w", 0), f"i{mode}").expose(("w", 1), f"o{mode}").expose(("bra", 0), ODD_LEG)
    return b.build()


def creation_diagram(mode: int) -> Diagram:
    """``a†_j``: the dual W tensor fed by ``|1)`` on its second input."""
    b = DiagramBuilder()
    b.add("w", w_dual(2))
    b.add("ket", ket1())
    b.connect(("ket", 0), ("w", 2))
    b.expose(("w", 1), f"i{mode}").expose(("w", 0), f"o{mode}").expose(("ket", 1), ODD_LEG)
    return b.build()


def pair_odd(first: Diagram, second: Diagram) -> Diagram:
    """Even operator ``second ∘ first`` of two odd operators.

    The odd legs are joined directly when their directions allow it, else
    through a two-leg ODD X-spider; the applied-first operator always takes
    the spider's leg 0. Joining a later Out leg into an earlier In leg costs
    a sign.
    """
    a = rename_boundary(first, {ODD_LEG: "_odd_a"})
    b = rename_boundary(second, {ODD_LEG: "_odd_b"})
    d = then(a, b)
    da = d.leg(d.boundary_leg("_odd_a").port).direction
    db = d.leg(d.boundary_leg("_odd_b").port).direction
    if da is Direction.OUT and db is Direction.OUT:
        d = juxtapose(d, single(x_spider(O_IN, O_IN), ["_q0", "_q1"], node_id="q"))
        return close(close(d, "_odd_a", "_q0"), "_odd_b", "_q1")
    if da is Direction.IN and db is Direction.IN:
        d = juxtapose(d, single(x_spider(O_OUT, O_OUT), ["_q0", "_q1"], node_id="q"))
        return close(close(d, "_q0", "_odd_a"), "_q1", "_odd_b")
    if da is Direction.OUT:
        return close(d, "_odd_a", "_odd_b")
    return juxtapose(close(d, "_odd_b", "_odd_a"), single(scalar(-1.0), node_id="sign"))


def pauli_diagram(site: int, letter: str) -> Diagram:
    names = [f"iq{site}", f"oq{site}"]
    if letter == "X":
        return single(qubit_x(Q_IN, Q_OUT, alpha=math.pi), names, node_id="px")
    if letter == "Z":
        return single(qubit_z(Q_IN, Q_OUT, alpha=math.pi), names, node_id="pz")
    if letter == "Y":
        # Y = i X Z
        b = DiagramBuilder()
        b.add("pz", qubit_z(Q_IN, Q_OUT, alpha=math.pi))
        b.add("px", qubit_x(Q_IN, Q_OUT, alpha=math.pi))
        b.add("py", scalar(1j))
        b.connect(("pz", 1), ("px", 0))
        return b.expose(("pz", 0), names[0]).expose(("px", 1), names[1]).build()
    return single(identity(Wire.QUBIT), names, node_id="pi")


def string_diagram(s: HybridString, n_modes: int, n_qubits: int = 0) -> Diagram:
    """Diagram of an even string; Majoranas pair up from the right."""
    if not s.is_even:
        raise ParityError(f"{s} has an odd number of Majoranas")
    if s.max_mode >= n_modes:
        raise RangeError(f"mode {s.max_mode} outside 0..{n_modes - 1}")
    if s.max_site >= n_qubits:
        raise RangeError(f"qubit site {s.max_site} outside 0..{n_qubits - 1}")
    d = identity_layer(n_modes, n_qubits)
    ms = s.majoranas
    for k in range(len(ms) - 1, 0, -2):
        d = then(d, pair_odd(majorana_diagram(ms[k]), majorana_diagram(ms[k - 1])))
    for site, letter in s.paulis:
        d = then(d, pauli_diagram(site, letter))
    if s.coeff != 1:
        d = juxtapose(d, single(scalar(s.coeff), node_id="coeff"))
    return d


# ── Qubit embedding and the Kitaev chain ──

def kitaev_embedding(modes: tuple[int, int] = (0, 1), site: int = 0) -> Diagram:
    """Z-spider sending ``|0⟩, |1⟩`` to ``|0)|0), |1)|1)`` on two modes."""
    low, high = sorted(modes)
    if low == high:
        raise RangeError("the embedding needs two distinct modes")
    return single(z_spider(Q_IN, F_OUT, F_OUT), [f"iq{site}", f"o{low}", f"o{high}"], node_id="emb")


def kitaev_term(j: int, n: int) -> HybridString:
    """``-i γ_{j+1} γ'_j``; the wrap bond ``j = n-1`` is ``+i γ_0 γ'_{n-1}``.

    The sign on the wrap bond is the bounding boundary condition of the ring.
    """
    if n < 2 or not 0 <= j < n:
        raise RangeError(f"bond {j} invalid for a chain of {n} modes")
    coeff = 1j if j == n - 1 else -1j
    return majorana_string(gamma((j + 1) % n), gamma_prime(j), coeff=coeff)


def kitaev_terms(n: int) -> list[HybridString]:
    return [kitaev_term(j, n) for j in range(n)]


def kitaev_chain_state(n: int) -> Diagram:
    """X-spider with ``n`` Out legs: the common +1 eigenvector of every term."""
    if n < 1:
        raise RangeError("a chain needs at least one mode")
    return single(x_spider(*[F_OUT] * n), [f"o{j}" for j in range(n)], node_id="chain")


def kitaev_chain_projector(j: int, n: int) -> Diagram:
    """``(1 + h_j)/2`` for the term on bond ``j``: two X-spiders sharing a wire.

    The spider on mode ``j+1`` has its shared leg before its output, which
    turns its branch into ``γ'P``. The wrap bond puts a parity dot on the
    shared wire.
    """
    if n < 2 or not 0 <= j < n:
        raise RangeError(f"bond {j} invalid for a chain of {n} modes")
    k = (j + 1) % n
    b = DiagramBuilder()
    b.add("a", x_spider(F_IN, F_OUT, F_OUT))
    b.add("b", x_spider(F_IN, F_IN, F_OUT))
    b.add("half", scalar(0.5))
    if j == n - 1:
        b.add("wrap", parity_dot())
        b.connect(("a", 2), ("wrap", 0)).connect(("wrap", 1), ("b", 1))
    else:
        b.connect(("a", 2), ("b", 1))
    b.expose(("a", 0), f"i{j}").expose(("a", 1), f"o{j}")
    b.expose(("b", 0), f"i{k}").expose(("b", 2), f"o{k}")
    return b.build()


def kitaev_projector_string(j: int, n: int) -> list[HybridString]:
    return [HybridString(0.5), kitaev_term(j, n).scaled(0.5)]


# ── Scattering ──

def scattering_strings(theta: float, mode: int = 0, same_mode: bool = False) -> list[HybridString]:
    """``(1+e^{iθ})/2 + (1-e^{iθ})/2 · i γ'_b γ_a`` as strings; finite for every θ."""
    c = (1 + cmath.exp(1j * theta)) / 2
    s = (1 - cmath.exp(1j * theta)) / 2
    partner = mode if same_mode else mode + 1
    return [HybridString(c), majorana_string(gamma_prime(partner), gamma(mode), coeff=1j * s)]


def scattering(theta: float, mode: int = 0, same_mode: bool = False) -> Diagram:
    """Scattering of two Majoranas on one mode or on modes ``mode``, ``mode+1``.

    On one mode the operator is a two-leg Z-spider. Across two modes it is two
    X-spiders joined through ``Z(z)`` with ``z = -(1-e^{iθ})/(1+e^{iθ})``,
    which has a pole at ``θ = π``.
    """
    phase = cmath.exp(1j * theta)
    if same_mode:
        b = DiagramBuilder()
        b.add("z", z_spider(F_IN, F_OUT, z=1 / phase))
        b.add("c", scalar(phase))
        return b.expose(("z", 0), f"i{mode}").expose(("z", 1), f"o{mode}").build()
    c = (1 + phase) / 2
    s = (1 - phase) / 2
    if abs(c) < get_settings().phase_snap:
        raise PoleError(f"scattering at θ = {theta} sits on the pole of the link amplitude")
    k = mode + 1
    b = DiagramBuilder()
    b.add("a", x_spider(F_IN, F_OUT, F_OUT))
    b.add("link", z_spider(F_IN, F_OUT, z=-s / c))
    b.add("b", x_spider(F_IN, F_OUT, F_IN))
    b.add("c", scalar(c))
    b.connect(("a", 1), ("link", 0)).connect(("link", 1), ("b", 2))
    b.expose(("a", 0), f"i{mode}").expose(("a", 2), f"o{mode}")
    b.expose(("b", 0), f"i{k}").expose(("b", 1), f"o{k}")
    logger.debug("Scattering across modes %d,%d at θ=%.6g", mode, k, theta)
    return b.build()
