"""Dense Jordan-Wigner oracle.

Mode ``j`` of ``n`` maps to qubit ``j`` with the string on the higher modes:
``γ_j ↦ Z_{n-1} ⋯ Z_{j+1} Y_j`` and ``γ'_j ↦ Z_{n-1} ⋯ Z_{j+1} X_j``. Matrices
are Kronecker products with the highest mode first, followed by the qubit
sites, highest first. The operator legs are ``o{j}``/``i{j}`` for modes and
``oq{k}``/``iq{k}`` for qubits, matching the diagram constructors.
"""

from __future__ import annotations

import logging
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from src.config import get_settings
from src.core.errors import CapacityError, RangeError
from src.core.graded import FERMION, QUBIT, Direction, GradedTensor, IndexSpec, operator_tensor
from src.fermionops.strings import HybridString, Majorana

logger = logging.getLogger(__name__)

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def mode_names(n_modes: int, n_qubits: int = 0) -> tuple[list[str], list[str]]:
    """Out and In leg names, most significant first."""
    outs = [f"o{j}" for j in reversed(range(n_modes))] + [f"oq{k}" for k in reversed(range(n_qubits))]
    ins = [f"i{j}" for j in reversed(range(n_modes))] + [f"iq{k}" for k in reversed(range(n_qubits))]
    return outs, ins


def operator_specs(n_modes: int, n_qubits: int = 0) -> tuple[list[IndexSpec], list[IndexSpec]]:
    outs, ins = mode_names(n_modes, n_qubits)
    dims = [FERMION] * n_modes + [QUBIT] * n_qubits
    return ([IndexSpec(name, Direction.OUT, dim) for name, dim in zip(outs, dims)],
            [IndexSpec(name, Direction.IN, dim) for name, dim in zip(ins, dims)])


def _kron(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors, np.eye(1, dtype=np.complex128))


def majorana_matrix(m: Majorana, n_modes: int) -> np.ndarray:
    if not 0 <= m.mode < n_modes:
        raise RangeError(f"mode {m.mode} outside 0..{n_modes - 1}")
    letters = []
    for k in reversed(range(n_modes)):
        if k > m.mode:
            letters.append("Z")
        elif k == m.mode:
            letters.append("X" if m.primed else "Y")
        else:
            letters.append("I")
    return _kron([PAULI[x] for x in letters])


def _check_size(n_modes: int, n_qubits: int) -> None:
    limit = get_settings().capacity_legs
    if 2 * (n_modes + n_qubits) > limit:
        raise CapacityError(f"{n_modes} modes and {n_qubits} qubits exceed the capacity of {limit} legs")


def jw_matrix(string: HybridString | Iterable[HybridString], n_modes: int,
              n_qubits: int = 0) -> np.ndarray:
    """Dense matrix of a string, or of a weighted sum of strings."""
    _check_size(n_modes, n_qubits)
    if not isinstance(string, HybridString):
        dim = 2 ** (n_modes + n_qubits)
        total = np.zeros((dim, dim), dtype=np.complex128)
        for term in string:
            total += jw_matrix(term, n_modes, n_qubits)
        return total
    if string.max_site >= n_qubits:
        raise RangeError(f"qubit site {string.max_site} outside 0..{n_qubits - 1}")
    fermion = np.eye(2 ** n_modes, dtype=np.complex128)
    for m in string.majoranas:
        fermion = fermion @ majorana_matrix(m, n_modes)
    letters = string.pauli_map
    qubits = _kron([PAULI[letters.get(k, "I")] for k in reversed(range(n_qubits))])
    return string.coeff * np.kron(fermion, qubits)


def jw_dense(string: HybridString | Iterable[HybridString], n_modes: int,
             n_qubits: int = 0) -> GradedTensor:
    """The oracle as an even graded operator on the standard leg names."""
    outs, ins = operator_specs(n_modes, n_qubits)
    return operator_tensor(jw_matrix(string, n_modes, n_qubits), outs, ins)


def conjugate(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return op @ rho @ op.conj().T


def partial_trace_top(rho: np.ndarray, n_top: int = 1) -> np.ndarray:
    """Trace out the ``n_top`` most significant tensor factors of ``rho``."""
    dim = rho.shape[0]
    top = 2 ** n_top
    rest = dim // top
    return np.einsum("aiaj->ij", rho.reshape(top, rest, top, rest))
