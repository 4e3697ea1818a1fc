"""Characteristic-function transforms, Majorana partial traces and purification.

A transform or channel is a diagram with four legs per mode ``k``: ``ri{k}``
(In) takes the operand's ``o{k}``, ``ro{k}`` (Out) feeds the operand's
``i{k}``, and ``o{k}`` / ``i{k}`` are the legs of the result. Applying one
splices it into the operand's legs with :func:`apply_transform`.
"""

from __future__ import annotations

import cmath
import logging
import math

from src.calculus.diagram import Diagram, DiagramBuilder, close, juxtapose, rename_boundary, then
from src.calculus.generators import (
    F_IN,
    F_OUT,
    Q_IN,
    Q_OUT,
    hadamard,
    parity_dot,
    qubit_x,
    qubit_z,
    scalar,
    x_spider,
    z_spider,
)
from src.core.errors import RangeError, SignatureError
from src.fermionops.operators import pad

logger = logging.getLogger(__name__)

_OMEGA = cmath.exp(1j * math.pi / 4)


def _phase_gadget(b: DiagramBuilder, key: str, inverse: bool) -> tuple[tuple[str, int], ...]:
    """Diagonal map ``|u)(v| ↦ i^{u(1-v)} |u)(v|`` on one mode, conjugated when ``inverse``.

    Two Z-spiders copy the ket and bra values, two X-spiders read their
    parity and a phase sits on the parity wire. Returns the ports
    ``(ket in, ket out, bra in, bra out)``.
    """
    sign = -1 if inverse else 1
    ket, bra, low, high, link = (f"{name}{key}" for name in ("gk", "gb", "gx", "gy", "gp"))
    b.add(ket, z_spider(F_IN, F_OUT, F_OUT, F_OUT, z=_OMEGA ** (3 * sign)))
    b.add(bra, z_spider(F_IN, F_OUT, F_OUT, F_OUT, z=_OMEGA ** sign))
    b.add(low, x_spider(F_IN, F_IN, F_OUT))
    b.add(high, x_spider(F_IN, F_IN, F_IN))
    b.add(link, z_spider(F_IN, F_OUT, z=_OMEGA ** -sign))
    b.connect((ket, 2), (low, 0)).connect((ket, 3), (high, 0))
    b.connect((bra, 2), (low, 1)).connect((bra, 3), (high, 1))
    b.connect((low, 2), (link, 0)).connect((link, 1), (high, 2))
    return (ket, 0), (ket, 1), (bra, 0), (bra, 1)


def _fermion_block(b: DiagramBuilder, key: str, inverse: bool) -> None:
    # spider legs [bra in, ket in, ket out, bra out]; the dot sits on the ket input
    spider, dot = f"t{key}", f"d{key}"
    b.add(spider, x_spider(F_IN, F_IN, F_OUT, F_OUT))
    b.add(dot, parity_dot())
    b.connect((dot, 1), (spider, 1))
    ket_in, ket_out, bra_in, bra_out = _phase_gadget(b, key, inverse)
    if inverse:
        b.connect(ket_out, (dot, 0)).connect((spider, 3), bra_in)
        b.expose(ket_in, f"ri{key}").expose(bra_out, f"ro{key}")
        b.expose((spider, 0), f"i{key}").expose((spider, 2), f"o{key}")
        return
    b.add(f"h{key}", scalar(0.5))
    b.connect((spider, 2), ket_in).connect(bra_out, (spider, 0))
    b.expose((dot, 0), f"ri{key}").expose((spider, 3), f"ro{key}")
    b.expose(bra_in, f"i{key}").expose(ket_out, f"o{key}")


def char_transform_fermion(n_modes: int, inverse: bool = False) -> Diagram:
    """``T_F``: computational basis to Majorana basis, one block per mode.

    On one mode ``1, P, γ, γ'`` map to ``|0)(0|, |1)(1|, |1)(0|, |0)(1|``.
    The dotted X-spider alone sends the real monomials ``1, P, γ', Pγ'``
    to the four basis operators; the phase gadget after it carries the
    ``i`` of ``γ = iγ'P``. Up to the factor ``1/2`` the spider is its own
    inverse, so the inverse runs the conjugate gadget first.
    """
    if n_modes < 1:
        raise RangeError("a transform needs at least one mode")
    b = DiagramBuilder()
    for j in range(n_modes):
        _fermion_block(b, str(j), inverse)
    return b.build()


def _qubit_block(b: DiagramBuilder, key: str, inverse: bool) -> None:
    # copy -> Hadamard gives (-1)^{px}, the X-spider ties q to x ⊕ y, and the
    # gadget on p, q supplies i^{±pq}
    sign = -1 if inverse else 1
    copy, had, tie = f"c{key}", f"h{key}", f"x{key}"
    p_node, q_node, parity, phase = f"p{key}", f"q{key}", f"s{key}", f"z{key}"
    b.add(copy, qubit_z(Q_IN, Q_OUT, Q_OUT))
    b.add(had, hadamard())
    b.add(tie, qubit_x(Q_IN, Q_IN, Q_OUT))
    b.add(p_node, qubit_z(Q_IN, Q_OUT, Q_OUT, alpha=sign * math.pi / 4))
    b.add(q_node, qubit_z(Q_IN, Q_OUT, Q_OUT, alpha=sign * math.pi / 4))
    b.add(parity, qubit_x(Q_IN, Q_IN, Q_OUT))
    b.add(phase, qubit_z(Q_IN, alpha=-sign * math.pi / 4))
    b.connect((copy, 2), (tie, 0))
    b.connect((p_node, 2), (parity, 0)).connect((q_node, 2), (parity, 1)).connect((parity, 2), (phase, 0))
    if inverse:
        b.add(f"n{key}", scalar(math.sqrt(2)))
        b.connect((p_node, 1), (had, 0)).connect((had, 1), (copy, 0))
        b.connect((tie, 2), (q_node, 0))
        b.expose((p_node, 0), f"ri{key}").expose((q_node, 1), f"ro{key}")
        b.expose((tie, 1), f"i{key}").expose((copy, 1), f"o{key}")
        return
    b.add(f"n{key}", scalar(2 * math.sqrt(2)))
    b.connect((copy, 1), (had, 0)).connect((had, 1), (p_node, 0))
    b.connect((q_node, 1), (tie, 1))
    b.expose((copy, 0), f"ri{key}").expose((tie, 2), f"ro{key}")
    b.expose((q_node, 0), f"i{key}").expose((p_node, 1), f"o{key}")


def char_transform_qubit(n_qubits: int = 1, inverse: bool = False) -> Diagram:
    """``T_Q``: Pauli weights ``W_{p,q} = Tr[ρ w(p,q)]`` with ``w(p,q) = i^{-pq} Z^p X^q``.

    The inverse carries the ``1/2`` per site.
    """
    if n_qubits < 1:
        raise RangeError("a transform needs at least one qubit")
    b = DiagramBuilder()
    for k in range(n_qubits):
        _qubit_block(b, f"q{k}", inverse)
    return b.build()


def apply_transform(transform: Diagram, operand: Diagram) -> Diagram:
    """Splice ``transform`` into the matching legs of ``operand``.

    Legs of the operand the transform does not touch stay on the boundary.
    """
    keys = [name[2:] for name in transform.boundary_names if name.startswith("ri")]
    names = set(operand.boundary_names)
    mapping = {}
    for key in keys:
        for side in ("o", "i"):
            if f"{side}{key}" not in names:
                raise SignatureError(f"operand has no leg {side}{key!r} for the transform")
            mapping[f"{side}{key}"] = f"_x{side}{key}"
    d = juxtapose(rename_boundary(operand, mapping), transform)
    for key in keys:
        d = close(d, f"_xo{key}", f"ri{key}")
        d = close(d, f"ro{key}", f"_xi{key}")
    logger.debug("Spliced a transform into %d legs", 2 * len(keys))
    return d


# ── Majorana partial traces ──

def _check_mode(j: int, n_modes: int | None) -> None:
    if j < 0 or (n_modes is not None and j >= n_modes):
        raise RangeError(f"mode {j} outside the operand")


def partial_trace_gamma_prime(j: int) -> Diagram:
    """``ρ ↦ ½(ρ + γ'_j ρ γ'_j)``: two X-spiders joined by one fermion wire."""
    _check_mode(j, None)
    b = DiagramBuilder()
    b.add("ta", x_spider(F_IN, F_OUT, F_OUT))
    b.add("tb", x_spider(F_IN, F_OUT, F_IN))
    b.add("half", scalar(0.5))
    b.connect(("ta", 2), ("tb", 2))
    b.expose(("ta", 0), f"ri{j}").expose(("tb", 1), f"ro{j}")
    b.expose(("tb", 0), f"i{j}").expose(("ta", 1), f"o{j}")
    return b.build()


def partial_trace_gamma(j: int) -> Diagram:
    """``ρ ↦ ½(ρ + γ_j ρ γ_j)``: the ticks move and a parity dot sits on the link."""
    _check_mode(j, None)
    b = DiagramBuilder()
    b.add("ta", x_spider(F_IN, F_OUT, F_OUT))
    b.add("dot", parity_dot())
    b.add("tb", x_spider(F_IN, F_IN, F_OUT))
    b.add("half", scalar(0.5))
    b.connect(("ta", 1), ("dot", 0)).connect(("dot", 1), ("tb", 1))
    b.expose(("ta", 0), f"ri{j}").expose(("tb", 2), f"ro{j}")
    b.expose(("tb", 0), f"i{j}").expose(("ta", 2), f"o{j}")
    return b.build()


def partial_trace(j: int) -> list[Diagram]:
    """Both Majorana traces of mode ``j``, applied in order they give ``Tr_j``."""
    return [partial_trace_gamma_prime(j), partial_trace_gamma(j)]


def trace_channel(operand: Diagram, channels: list[Diagram]) -> Diagram:
    for channel in channels:
        operand = apply_transform(channel, operand)
    return operand


# ── Purification ──

def purification_isometry(j: int, n_modes: int, primed: bool = True) -> Diagram:
    """Isometry ``ψ ↦ (|0)ψ + |1)γ'_j ψ)/√2`` onto a new top mode ``n_modes``.

    With ``primed`` unset the branch is ``i γ_j``. Tracing the new mode out of
    the purified state gives the matching Majorana partial trace.
    """
    _check_mode(j, n_modes)
    b = DiagramBuilder()
    b.add("v", x_spider(F_IN, F_OUT, F_OUT))
    b.add("norm", scalar(1 / math.sqrt(2)))
    out, extra = (1, 2) if primed else (2, 1)
    b.expose(("v", 0), f"i{j}").expose(("v", out), f"o{j}").expose(("v", extra), f"o{n_modes}")
    return pad(b.build(), n_modes)


def purify(state: Diagram, j: int, n_modes: int, primed: bool = True) -> Diagram:
    return then(state, purification_isometry(j, n_modes, primed))
