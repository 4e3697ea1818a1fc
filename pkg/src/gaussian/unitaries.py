"""Gaussian unitaries on the dense Jordan-Wigner side.

Two oracle helpers: number-conserving unitaries ``exp(i Σ h_ij a†_i a_j)``,
which must equal the determinant operator of ``e^{ih}``, and Majorana
quadratic forms ``exp(¼ Σ h_ab c_a c_b)``, whose image of the vacuum must obey
the Pfaffian amplitude law. Majoranas are ordered ``c = (γ_0, γ'_0, γ_1, ...)``.
"""

from __future__ import annotations

import itertools
import logging

import numpy as np

from src.core.errors import InputError
from src.core.graded import EqualityReport, approx_equal, operator_tensor
from src.fermionops.oracle import jw_matrix
from src.fermionops.strings import (
    HybridString,
    Majorana,
    annihilation,
    creation,
    gamma,
    gamma_prime,
    majorana_string,
    multiply_sums,
)
from src.gaussian.pfaffian import check_antisymmetric, pfaffian
from src.gaussian.tensors import pnc_dense, pnc_specs

logger = logging.getLogger(__name__)

_HERMITIAN_TOL = 1e-12


def _exp_i_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(i t h)`` for Hermitian ``h`` by eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InputError(f"expected a square matrix, got shape {h.shape}")
    if np.abs(h - h.conj().T).max(initial=0.0) > _HERMITIAN_TOL * max(1.0, float(np.abs(h).max(initial=0.0))):
        raise InputError("matrix is not Hermitian")
    return h


def hopping_terms(h: np.ndarray) -> list[HybridString]:
    """``Σ h_ij a†_i a_j`` as a weighted sum of strings."""
    h = np.asarray(h, dtype=np.complex128)
    terms: list[HybridString] = []
    for i, j in itertools.product(range(h.shape[0]), repeat=2):
        if h[i, j] != 0:
            terms += [t.scaled(h[i, j]) for t in multiply_sums(creation(i), annihilation(j))]
    return terms


def pnc_unitary(h: np.ndarray) -> np.ndarray:
    """Dense ``exp(i Σ h_ij a†_i a_j)`` on ``n`` modes."""
    h = _check_hermitian(h)
    n = h.shape[0]
    return _exp_i_hermitian(jw_matrix(hopping_terms(h), n))


def pnc_unitary_check(h: np.ndarray) -> EqualityReport:
    """The Jordan-Wigner exponential against the determinant operator of ``e^{ih}``."""
    h = _check_hermitian(h)
    n = h.shape[0]
    outs, ins = pnc_specs(n, n)
    dense = operator_tensor(pnc_unitary(h), outs, ins)
    report = approx_equal(dense, pnc_dense(_exp_i_hermitian(h)))
    logger.debug("Number-conserving unitary on %d modes: max dev %.3g", n, report.max_dev)
    return report


# ── Majorana quadratic forms ──

def majorana_order(n_modes: int) -> list[Majorana]:
    return [m for j in range(n_modes) for m in (gamma(j), gamma_prime(j))]


def gaussian_from_majorana(h: np.ndarray) -> np.ndarray:
    """Dense ``exp(¼ Σ h_ab c_a c_b)`` for real antisymmetric ``h`` of size ``2n``."""
    h = check_antisymmetric(h)
    if np.abs(h.imag).max(initial=0.0) > 0:
        raise InputError("a Gaussian unitary needs a real antisymmetric generator")
    if h.shape[0] % 2:
        raise InputError(f"generator size {h.shape[0]} is odd; two Majoranas per mode")
    n = h.shape[0] // 2
    cs = majorana_order(n)
    terms = [majorana_string(cs[a], cs[b], coeff=0.25 * h[a, b].real)
             for a, b in itertools.permutations(range(2 * n), 2) if h[a, b] != 0]
    q = jw_matrix(terms, n) if terms else np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    # q is anti-Hermitian, so exp(q) = exp(-i (iq))
    return _exp_i_hermitian(1j * q, t=-1.0)


def pairing_matrix(psi: np.ndarray, n_modes: int) -> np.ndarray:
    """Antisymmetric ``A`` with ``A_ij = ψ(e_i + e_j) / ψ(0)`` for ``i < j``."""
    if abs(psi[0]) == 0:
        raise InputError("the state has no vacuum component")
    a = np.zeros((n_modes, n_modes), dtype=np.complex128)
    for i, j in itertools.combinations(range(n_modes), 2):
        a[i, j] = psi[(1 << i) | (1 << j)] / psi[0]
        a[j, i] = -a[i, j]
    return a


def vacuum_pfaffian_check(h: np.ndarray, tol: float = 1e-9) -> EqualityReport:
    """``U|0)`` of a Gaussian unitary has amplitudes ``ψ(0) Pf(A|_x)``.

    ``A`` is read off the two-particle amplitudes; every other amplitude is
    then predicted.
    """
    u = gaussian_from_majorana(h)
    n = h.shape[0] // 2
    psi = u[:, 0]
    a = pairing_matrix(psi, n)
    predicted = np.zeros_like(psi)
    for x in range(2 ** n):
        rows = [k for k in range(n) if x >> k & 1]
        if len(rows) % 2 == 0:
            predicted[x] = psi[0] * pfaffian(a[np.ix_(rows, rows)])
    diff = np.abs(psi - predicted)
    worst = int(np.argmax(diff))
    return EqualityReport(bool(diff[worst] <= tol), float(diff[worst]), (worst,), complex(psi[0]))
