"""Pfaffians of antisymmetric matrices."""

from __future__ import annotations

import logging
from typing import Any

import numpy as np

from src.core.errors import CapacityError, InputError

logger = logging.getLogger(__name__)

_ANTISYMMETRY_TOL = 1e-12
_MATCHING_LIMIT = 10


def check_antisymmetric(a: np.ndarray) -> np.ndarray:
    """Return ``a`` as a complex square array, or raise if ``a^T != -a``."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return a
    scale = max(1.0, float(np.abs(a).max()))
    skew = float(np.abs(a + a.T).max())
    if skew > _ANTISYMMETRY_TOL * scale:
        raise InputError(f"matrix is not antisymmetric (|A + A^T| = {skew:.3g})")
    return a


def pfaffian(a: np.ndarray) -> complex:
    """Pfaffian by skew tridiagonalization with partial pivoting.

    Empty matrices give 1, odd sizes give exactly 0.
    """
    a = np.array(check_antisymmetric(a), copy=True)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n % 2:
        return 0j
    value = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(a[k + 1:, k]).argmax())
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            value = -value
        if a[k + 1, k] == 0:
            return 0j
        value *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return complex(value)


def pfaffian_matchings(a: np.ndarray) -> complex:
    """Pfaffian as the signed sum over perfect matchings; only for ``n <= 10``."""
    a = check_antisymmetric(a)
    n = a.shape[0]
    if n > _MATCHING_LIMIT:
        raise CapacityError(f"matching expansion is limited to n <= {_MATCHING_LIMIT}, got {n}")
    return complex(expand_pfaffian(a))


def expand_pfaffian(a: Any, rows: list[int] | None = None) -> Any:
    """Matching expansion along the first row; works on numpy arrays and sympy matrices."""
    if rows is None:
        rows = list(range(a.shape[0]))
    if not rows:
        return 1
    if len(rows) % 2:
        return 0
    first, rest = rows[0], rows[1:]
    total: Any = 0
    for pos, j in enumerate(rest):
        if a[first, j] == 0:
            continue
        sign = -1 if pos % 2 else 1
        total += sign * a[first, j] * expand_pfaffian(a, rest[:pos] + rest[pos + 1:])
    return total
