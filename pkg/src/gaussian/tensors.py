"""Gaussian tensors: dense Pfaffian form, W/Z diagram form and Schur-complement contraction.

A Gaussian tensor on ``n`` fermion legs ``m0..m{n-1}`` (all In by default)
has entry ``Pf(A|_x)`` at the bitstring ``x``, where ``A|_x`` keeps the rows
and columns with ``x_i = 1``. Contracting leg ``i`` with leg ``j`` means
joining both to a two-leg X-spider cap ``X[Out, Out]`` whose first leg meets
``i``.
"""

from __future__ import annotations

import itertools
import logging
from typing import Hashable, Sequence

import numpy as np
import sympy

from src.calculus.diagram import Diagram, DiagramBuilder
from src.calculus.generators import F_IN, F_OUT, make_x_spider, w_tensor, x_spider, z_spider
from src.config import get_settings
from src.core.errors import InputError, RangeError, SingularityError
from src.core.graded import (
    FERMION,
    Direction,
    EqualityReport,
    GradedTensor,
    IndexSpec,
    approx_equal,
    contract_between,
    operator_tensor,
    permute,
    rename,
)
from src.gaussian.pfaffian import check_antisymmetric, expand_pfaffian, pfaffian

logger = logging.getLogger(__name__)


def leg_names(n: int) -> list[str]:
    return [f"m{i}" for i in range(n)]


def _directions(n: int, directions: Sequence[Direction | str] | None) -> list[Direction]:
    if directions is None:
        return [Direction.IN] * n
    if len(directions) != n:
        raise RangeError(f"{len(directions)} directions for {n} legs")
    return [Direction(d) for d in directions]


def _cap(first: Hashable, second: Hashable) -> GradedTensor:
    return rename(make_x_spider([F_OUT, F_OUT]), {0: first, 1: second})


# ── Dense form ──

def gaussian_dense(a: np.ndarray, directions: Sequence[Direction | str] | None = None) -> GradedTensor:
    """Entry ``Pf(A|_x)`` on legs ``m0..m{n-1}``.

    An Out leg is an In leg bent round by a cap, so ``m_i`` Out carries the
    same Pfaffian pattern read as a ket.
    """
    a = check_antisymmetric(a)
    n = a.shape[0]
    names = leg_names(n)
    data = np.zeros((2,) * n, dtype=np.complex128)
    for bits in itertools.product((0, 1), repeat=n):
        if sum(bits) % 2:
            continue
        rows = [i for i, b in enumerate(bits) if b]
        data[bits] = pfaffian(a[np.ix_(rows, rows)])
    t = GradedTensor([IndexSpec(name, Direction.IN, FERMION) for name in names], data)
    for i, direction in enumerate(_directions(n, directions)):
        if direction is Direction.OUT:
            bent = f"{names[i]}'"
            t = contract_between(t, _cap(("cap", i), bent), [(names[i], ("cap", i))])
            t = rename(t, {bent: names[i]})
    return permute(t, names)


def gaussian_diagram(a: np.ndarray, directions: Sequence[Direction | str] | None = None) -> Diagram:
    """One W tensor per leg with a ``Z(A_ij)`` link between every pair of W tensors.

    W tensor ``i`` sends its branch toward ``j`` into link ``(i, j)``; each
    link ``i < j`` takes the wire from ``j`` on its first leg.
    """
    a = check_antisymmetric(a)
    n = a.shape[0]
    if n < 1:
        raise RangeError("a Gaussian diagram needs at least one leg")
    names = leg_names(n)
    dirs = _directions(n, directions)
    b = DiagramBuilder()

    def branch(i: int, j: int) -> int:
        return 1 + (j if j < i else j - 1)

    for i in range(n):
        b.add(f"w{i}", w_tensor(n - 1) if n > 1 else x_spider(F_IN))
    for i, j in itertools.combinations(range(n), 2):
        link = f"z{i}_{j}"
        b.add(link, z_spider(F_IN, F_IN, z=complex(a[i, j])))
        b.connect((f"w{j}", branch(j, i)), (link, 0))
        b.connect((f"w{i}", branch(i, j)), (link, 1))
    for i in range(n):
        if dirs[i] is Direction.OUT:
            b.add(f"c{i}", x_spider(F_OUT, F_OUT))
            b.connect((f"c{i}", 0), (f"w{i}", 0))
            b.expose((f"c{i}", 1), names[i])
        else:
            b.expose((f"w{i}", 0), names[i])
    return b.build()


# ── Contraction ──

def dense_contract(t: GradedTensor, pairs: Sequence[tuple[int, int]]) -> GradedTensor:
    """Join legs ``m_i`` and ``m_j`` of an all-In tensor through a cap, pair by pair."""
    for i, j in pairs:
        first, second = ("cap", i, j, 0), ("cap", i, j, 1)
        t = contract_between(t, _cap(first, second), [(f"m{i}", first), (f"m{j}", second)])
    return t


def _check_pairs(n: int, pairs: Sequence[tuple[int, int]]) -> list[int]:
    flat = [k for pair in pairs for k in pair]
    if len(set(flat)) != len(flat):
        raise InputError(f"contracted indices repeat in {list(pairs)}")
    for k in flat:
        if not 0 <= k < n:
            raise RangeError(f"index {k} outside 0..{n - 1}")
    return flat


def contract_gaussian(a: np.ndarray, pairs: Sequence[tuple[int, int]]) -> tuple[np.ndarray, complex]:
    """Contract index pairs of a Gaussian tensor at the level of its matrix.

    A symplectic block ``((0, 1), (-1, 0))`` is added on each pair in the
    given order, then the Schur complement is taken on the contracted rows
    and columns. Returns ``(A', Pf(D))`` with
    ``dense_contract(gaussian_dense(A)) == Pf(D) * gaussian_dense(A')``; the
    kept indices keep their relative order.
    """
    a = check_antisymmetric(a)
    n = a.shape[0]
    contracted = _check_pairs(n, pairs)
    if not pairs:
        return a.copy(), 1.0 + 0j
    kept = [k for k in range(n) if k not in contracted]
    d = a[np.ix_(contracted, contracted)].copy()
    for r in range(len(pairs)):
        d[2 * r, 2 * r + 1] += 1
        d[2 * r + 1, 2 * r] -= 1
    settings = get_settings()
    det = np.linalg.det(d) if d.size else 1.0
    scale = max(1.0, float(np.abs(d).max())) ** d.shape[0] if d.size else 1.0
    if abs(det) < settings.singular_threshold * scale:
        raise SingularityError(
            f"shifted block on indices {contracted} is singular (|det| = {abs(det):.3g})",
            block=tuple(contracted),
        )
    b = a[np.ix_(kept, contracted)]
    c = a[np.ix_(contracted, kept)]
    schur = a[np.ix_(kept, kept)] - b @ np.linalg.solve(d, c)
    schur = (schur - schur.T) / 2
    scalar = pfaffian(d)
    logger.debug("Contracted %d pairs, scalar %s", len(pairs), scalar)
    return schur, scalar


def contract_gaussian_symbolic(a: sympy.Matrix,
                               pairs: Sequence[tuple[int, int]]) -> tuple[sympy.Matrix, sympy.Expr]:
    """Exact symbolic counterpart of :func:`contract_gaussian`."""
    n = a.shape[0]
    contracted = _check_pairs(n, pairs)
    kept = [k for k in range(n) if k not in contracted]
    d = a.extract(contracted, contracted)
    for r in range(len(pairs)):
        d[2 * r, 2 * r + 1] += 1
        d[2 * r + 1, 2 * r] -= 1
    schur = a.extract(kept, kept) - a.extract(kept, contracted) * d.inv() * a.extract(contracted, kept)
    return schur.applyfunc(sympy.simplify), sympy.expand(expand_pfaffian(d))


def contract_check(a: np.ndarray, pairs: Sequence[tuple[int, int]]) -> EqualityReport:
    """Compare the Schur-complement result with dense contraction."""
    reduced, scalar = contract_gaussian(a, pairs)
    dense = dense_contract(gaussian_dense(a), pairs)
    n = a.shape[0]
    contracted = {k for pair in pairs for k in pair}
    kept = [k for k in range(n) if k not in contracted]
    expected = rename(gaussian_dense(reduced), {f"m{p}": f"m{k}" for p, k in enumerate(kept)})
    return approx_equal(dense, expected, scalar=scalar, tol=max(get_settings().tolerance, 1e-8))


# ── Number-conserving tensors ──

def pnc_specs(rows: int, cols: int) -> tuple[list[IndexSpec], list[IndexSpec]]:
    """Out legs ``o{k}`` and In legs ``i{k}``, both listed most-significant first."""
    outs = [IndexSpec(f"o{k}", Direction.OUT, FERMION) for k in reversed(range(rows))]
    ins = [IndexSpec(f"i{k}", Direction.IN, FERMION) for k in reversed(range(cols))]
    return outs, ins


def _minor(m: np.ndarray, rows: list[int], cols: list[int]) -> complex:
    if not rows:
        return 1.0
    return complex(np.linalg.det(m[np.ix_(rows, cols)]))


def pnc_matrix(m: np.ndarray) -> np.ndarray:
    """Dense matrix of ``Γ(M)``: the minor ``det M[x_O, x_I]`` where the weights agree."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise InputError(f"expected a matrix, got shape {m.shape}")
    rows, cols = m.shape
    out = np.zeros((2 ** rows, 2 ** cols), dtype=np.complex128)
    for r in range(2 ** rows):
        sel_r = [k for k in range(rows) if r >> k & 1]
        for c in range(2 ** cols):
            sel_c = [k for k in range(cols) if c >> k & 1]
            if len(sel_r) == len(sel_c):
                out[r, c] = _minor(m, sel_r, sel_c)
    return out


def pnc_dense(m: np.ndarray) -> GradedTensor:
    m = np.asarray(m, dtype=np.complex128)
    outs, ins = pnc_specs(*m.shape)
    return operator_tensor(pnc_matrix(m), outs, ins)


def pnc_compose(first: GradedTensor, second: GradedTensor, width: int) -> GradedTensor:
    """``second ∘ first`` where ``first`` has ``width`` outputs feeding ``second``'s inputs."""
    first = rename(first, {f"o{k}": ("mid", k) for k in range(width)})
    second = rename(second, {f"i{k}": ("mid'", k) for k in range(width)})
    return contract_between(second, first, [(("mid'", k), ("mid", k)) for k in range(width)])


def pnc_multiply_check(ma: np.ndarray, mb: np.ndarray) -> EqualityReport:
    """``Γ(Ma) ∘ Γ(Mb) == Γ(Ma Mb)`` by dense graded contraction."""
    ma, mb = np.asarray(ma, dtype=np.complex128), np.asarray(mb, dtype=np.complex128)
    if ma.shape[1] != mb.shape[0]:
        raise InputError(f"shapes {ma.shape} and {mb.shape} do not compose")
    composed = pnc_compose(pnc_dense(mb), pnc_dense(ma), ma.shape[1])
    return approx_equal(composed, pnc_dense(ma @ mb))


def block_off_diagonal(m: np.ndarray) -> np.ndarray:
    """The antisymmetric matrix ``((0, M), (-M^T, 0))`` on outputs then inputs."""
    m = np.asarray(m, dtype=np.complex128)
    rows, cols = m.shape
    a = np.zeros((rows + cols, rows + cols), dtype=np.complex128)
    a[:rows, rows:] = m
    a[rows:, :rows] = -m.T
    return a
