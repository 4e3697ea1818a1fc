"""Local gadgets of the Floquet circuit and their operator identities.

- A qubit X-spider with two inputs and two outputs is ``(1 + XX)/2``.
- A fermionic Z-spider on two modes is ``(1 + PP)/2``.
- A Z-spider with two qubit and two fermion legs, flanked by two three-leg
  X-spiders, is the qubit-controlled ``i γ_0 γ'_1``. Its ``-1`` prefactor is
  a parity dot on the internal wire, which is occupied exactly when the
  control is set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.calculus.diagram import Diagram, DiagramBuilder, single
from src.calculus.generators import F_IN, F_OUT, Q_IN, Q_OUT, parity_dot, qubit_x, x_spider, z_spider
from src.config import get_settings
from src.fermionops.operators import check_against_oracle, operator_matrix_of
from src.fermionops.strings import HybridString, gamma, gamma_prime, majorana_string, parity, pauli_string

logger = logging.getLogger(__name__)


def measure_xx() -> Diagram:
    return single(qubit_x(Q_IN, Q_IN, Q_OUT, Q_OUT), ["iq0", "iq1", "oq1", "oq0"], node_id="mxx")


def measure_pp() -> Diagram:
    return single(z_spider(F_IN, F_IN, F_OUT, F_OUT), ["i1", "i0", "o0", "o1"], node_id="mpp")


def controlled_pair() -> Diagram:
    """Control on qubit 0; ``γ`` on mode 0 and ``γ'`` on mode 1.

    The spider on mode 1 lists its wire last and acts as ``γ'``; the one on
    mode 0 lists the wire between its input and output and acts as ``γ'P``.
    """
    b = DiagramBuilder()
    b.add("c", z_spider(F_IN, Q_IN, F_OUT, Q_OUT))
    b.add("g0", x_spider(F_IN, F_IN, F_OUT))
    b.add("g1", x_spider(F_IN, F_OUT, F_OUT))
    b.add("sign", parity_dot())
    b.connect(("g1", 2), ("c", 0))
    b.connect(("c", 2), ("sign", 0)).connect(("sign", 1), ("g0", 1))
    b.expose(("g0", 0), "i0").expose(("g0", 2), "o0")
    b.expose(("g1", 0), "i1").expose(("g1", 1), "o1")
    b.expose(("c", 1), "iq0").expose(("c", 3), "oq0")
    return b.build()


# ── Oracles ──

def pair_operator(left: int = 0, right: int = 1) -> HybridString:
    """``W = i γ_left γ'_right``, a Hermitian involution."""
    return majorana_string(gamma(left), gamma_prime(right), coeff=1j)


def measure_xx_strings() -> list[HybridString]:
    return [HybridString(0.5), pauli_string({0: "X", 1: "X"}, coeff=0.5)]


def measure_pp_strings() -> list[HybridString]:
    return [HybridString(0.5), (parity(0) * parity(1)).scaled(0.5)]


def controlled_pair_strings(control: int = 0, left: int = 0, right: int = 1) -> list[HybridString]:
    """``(1 + Z)/2 + (1 - Z)/2 · W``."""
    z = pauli_string({control: "Z"})
    w = pair_operator(left, right)
    return [HybridString(0.5), z.scaled(0.5), w.scaled(0.5), (z * w).scaled(-0.5)]


# ── Report ──

@dataclass(frozen=True)
class GateCheck:
    name: str
    max_dev: float
    passed: bool


def gate_identities(tol: float | None = None) -> list[GateCheck]:
    """Evaluate the three gadgets against their dense oracles."""
    tol = get_settings().tolerance if tol is None else tol
    checks = []
    for name, diagram, strings, n_modes, n_qubits in (
        ("measure-XX", measure_xx(), measure_xx_strings(), 0, 2),
        ("measure-PP", measure_pp(), measure_pp_strings(), 2, 0),
        ("controlled-gg'", controlled_pair(), controlled_pair_strings(), 2, 1),
    ):
        report = check_against_oracle(diagram, strings, n_modes, n_qubits, tol=tol)
        checks.append(GateCheck(name, report.max_dev, report.equal))

    u = operator_matrix_of(controlled_pair(), 2, 1)
    dev = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    checks.append(GateCheck("controlled-gg' unitary", dev, dev <= tol))

    for check in checks:
        logger.debug("Gate %s: max deviation %.3g", check.name, check.max_dev)
    return checks
