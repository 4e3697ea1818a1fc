"""Unit tests for generator specs and their dense tensors."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.calculus.generators import (
    F_IN,
    F_OUT,
    O_OUT,
    Q_IN,
    Q_OUT,
    GeneratorSpec,
    Kind,
    dagger_spec,
    hadamard,
    identity,
    ket1,
    make_qubit_generator,
    make_tensor,
    make_w,
    make_x_spider,
    make_z_spider,
    parity_dot,
    qubit_z,
    raw,
    scalar,
    w_tensor,
    Wire,
    z_spider,
)
from src.core.errors import ArityError, WireTypeError
from src.core.graded import FERMION, Direction, IndexSpec, from_entries, operator_matrix


def _matrix(spec: GeneratorSpec) -> np.ndarray:
    """Two-leg generator ``[In, Out]`` as a 2x2 matrix."""
    return operator_matrix(make_tensor(spec), [1], [0])


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class TestValidation:

    def test_z_spider_needs_even_fermion_legs(self) -> None:
        with pytest.raises(ArityError):
            z_spider(F_IN, F_OUT, F_OUT)
        z_spider(F_IN, F_OUT, Q_OUT)

    def test_wire_types(self) -> None:
        with pytest.raises(WireTypeError):
            GeneratorSpec(Kind.HADAMARD, (F_IN, F_OUT))
        with pytest.raises(WireTypeError):
            GeneratorSpec(Kind.X_SPIDER, (Q_IN, Q_OUT))

    def test_two_leg_wires_run_in_to_out(self) -> None:
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.PARITY, (F_OUT, F_IN))
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.IDENTITY, (F_IN, Q_OUT))

    def test_w_shape(self) -> None:
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.W, (F_IN,))
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.W, (F_IN, F_IN, F_OUT))

    def test_scalar_has_no_legs(self) -> None:
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.SCALAR, (F_IN,), 1.0)
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.SCALAR, (Q_OUT, Q_IN), 1.0)

    def test_raw_tensor_must_match_legs(self) -> None:
        t = from_entries([IndexSpec(1, Direction.OUT, FERMION), IndexSpec(0, Direction.IN, FERMION)],
                         {(0, 0): 1.0, (1, 1): 2.0})
        node = raw(t)
        assert node.legs == (F_IN, F_OUT)
        with pytest.raises(WireTypeError):
            GeneratorSpec(Kind.RAW, (F_OUT, F_OUT), tensor=t)
        with pytest.raises(ArityError):
            GeneratorSpec(Kind.RAW, (F_IN,), tensor=t)


# ---------------------------------------------------------------------------
# Tensors
# ---------------------------------------------------------------------------

class TestTensors:

    def test_x_spider_is_one_on_even_configurations(self) -> None:
        t = make_x_spider([F_IN, F_OUT, F_OUT])
        assert int(np.count_nonzero(t.data)) == 4
        assert set(np.unique(t.data)) <= {0, 1}

    def test_z_spider_entries(self) -> None:
        t = make_z_spider([F_IN, F_OUT, F_IN, F_OUT], z=0.5j)
        assert t.data[0, 0, 0, 0] == 1
        assert t.data[1, 1, 1, 1] == 0.5j
        assert int(np.count_nonzero(t.data)) == 2

    def test_legless_z_spider_is_one_plus_z(self) -> None:
        assert make_z_spider([], z=3.0).scalar == 4

    def test_parity_dot_and_identity(self) -> None:
        assert_allclose(_matrix(parity_dot()), np.diag([1, -1]))
        assert_allclose(_matrix(identity()), np.eye(2))
        assert_allclose(_matrix(z_spider(F_IN, F_OUT, z=2.0)), np.diag([1, 2]))

    def test_w_splits_one_fermion_over_its_outputs(self) -> None:
        m = operator_matrix(make_w(2), [1, 2], [0])
        assert_allclose(m, [[1, 0], [0, 1], [0, 1], [0, 0]])
        assert make_tensor(w_tensor(3)).arity == 4

    def test_ket1(self) -> None:
        t = make_tensor(ket1())
        assert t.data.shape == (1, 2)
        assert_allclose(t.data, [[0, 1]])
        assert ket1().legs == (F_OUT, O_OUT)

    def test_scalar(self) -> None:
        assert make_tensor(scalar(2 - 1j)).scalar == 2 - 1j


class TestQubitGenerators:

    def test_hadamard(self) -> None:
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        assert_allclose(_matrix(hadamard()), h)

    def test_z_phase(self) -> None:
        assert_allclose(_matrix(qubit_z(Q_IN, Q_OUT, alpha=0.7)), np.diag([1, cmath.exp(0.7j)]))

    def test_x_pi_is_not(self) -> None:
        t = make_qubit_generator(Kind.QUBIT_X, 2, phase=math.pi)
        assert_allclose(operator_matrix(t, [1], [0]), [[0, 1], [1, 0]], atol=1e-12)

    def test_x_zero_is_identity(self) -> None:
        t = make_qubit_generator(Kind.QUBIT_X, 2)
        assert_allclose(operator_matrix(t, [1], [0]), np.eye(2), atol=1e-12)

    def test_legless_spiders(self) -> None:
        assert make_qubit_generator(Kind.QUBIT_Z, 0, phase=math.pi).scalar == pytest.approx(0)

    def test_rejects_other_kinds(self) -> None:
        with pytest.raises(WireTypeError):
            make_qubit_generator(Kind.W, 2)
        with pytest.raises(ArityError):
            make_qubit_generator(Kind.HADAMARD, 3)


# ---------------------------------------------------------------------------
# Conjugation
# ---------------------------------------------------------------------------

class TestDaggerSpec:

    def test_spider_reverses_and_flips(self) -> None:
        conj, moves = dagger_spec(z_spider(F_IN, F_OUT, Q_OUT, z=2j))
        assert conj.kind is Kind.Z_SPIDER
        assert conj.legs == (Q_IN, F_IN, F_OUT)
        assert conj.param == -2j
        assert moves == [2, 1, 0]

    def test_w_swaps_with_its_dual(self) -> None:
        conj, moves = dagger_spec(w_tensor(2))
        assert conj.kind is Kind.W_DUAL
        assert conj.legs == (F_OUT, F_IN, F_IN)
        assert moves == [0, 1, 2]

    def test_qubit_phase_negates(self) -> None:
        conj, _ = dagger_spec(qubit_z(Q_IN, Q_OUT, alpha=0.3))
        assert conj.param == pytest.approx(-0.3)

    def test_ket1_becomes_a_bra(self) -> None:
        conj, _ = dagger_spec(ket1())
        assert conj.kind is Kind.X_SPIDER
        assert {leg.wire for leg in conj.legs} == {Wire.FERMION, Wire.ODD}
        assert all(leg.direction is Direction.IN for leg in conj.legs)

    def test_scalar_conjugates(self) -> None:
        conj, moves = dagger_spec(scalar(1 + 2j))
        assert conj.param == 1 - 2j
        assert moves == []

    def test_two_leg_matrix_is_adjoint(self) -> None:
        spec = z_spider(F_IN, F_OUT, z=0.3 + 0.4j)
        conj, _ = dagger_spec(spec)
        assert_allclose(_matrix(conj), _matrix(spec).conj().T)
