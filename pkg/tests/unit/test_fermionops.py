"""Unit tests for hybrid strings, the Jordan-Wigner oracle, operator diagrams and channels."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from src.calculus.diagram import evaluate, juxtapose, operator_of, single, then
from src.calculus.generators import Kind, scalar
from src.core.errors import CapacityError, ParityError, PoleError, RangeError, SignatureError
from src.core.graded import (
    FERMION,
    ODD,
    Direction,
    IndexSpec,
    approx_equal,
    from_entries,
    operator_matrix,
)
from src.fermionops.channels import (
    apply_transform,
    char_transform_fermion,
    char_transform_qubit,
    partial_trace,
    partial_trace_gamma,
    partial_trace_gamma_prime,
    purification_isometry,
    purify,
    trace_channel,
)
from src.fermionops.operators import (
    annihilation_diagram,
    check_against_oracle,
    creation_diagram,
    dense_operator_diagram,
    identity_layer,
    kitaev_chain_projector,
    kitaev_chain_state,
    kitaev_embedding,
    kitaev_projector_string,
    kitaev_term,
    kitaev_terms,
    majorana_diagram,
    operator_matrix_of,
    pair_odd,
    scattering,
    scattering_strings,
    string_diagram,
)
from src.fermionops.oracle import (
    PAULI,
    jw_dense,
    jw_matrix,
    majorana_matrix,
    mode_names,
    operator_specs,
    partial_trace_top,
)
from src.fermionops.strings import (
    HybridString,
    annihilation,
    creation,
    gamma,
    gamma_prime,
    majorana_string,
    multiply_sums,
    parity,
    pauli_string,
)


def _parities(n_modes: int) -> np.ndarray:
    return np.array([bin(r).count("1") % 2 for r in range(2 ** n_modes)])


def _random_even_operator(rng: np.random.Generator, n_modes: int) -> np.ndarray:
    dim = 2 ** n_modes
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    p = _parities(n_modes)
    m[p[:, None] != p[None, :]] = 0
    return m


def _random_even_state(rng: np.random.Generator, n_modes: int) -> np.ndarray:
    dim = 2 ** n_modes
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi[_parities(n_modes) == 1] = 0
    return psi / np.linalg.norm(psi)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


# ── Hybrid strings ──

class TestHybridString:
    def test_swap_costs_a_sign(self) -> None:
        s = majorana_string(gamma_prime(0), gamma(0))
        assert s.majoranas == (gamma(0), gamma_prime(0))
        assert s.coeff == -1

    def test_square_collapses(self) -> None:
        s = majorana_string(gamma(2), gamma(2))
        assert s.majoranas == ()
        assert s.coeff == 1

    def test_normal_ordering_is_confluent(self) -> None:
        ops = [gamma(0), gamma_prime(1), gamma(2), gamma_prime(0)]
        reference = majorana_string(*ops)
        for perm in itertools.permutations(range(4)):
            sign = round(np.linalg.det(np.eye(4)[list(perm)]))
            s = majorana_string(*[ops[k] for k in perm])
            assert s.majoranas == reference.majoranas
            assert s.coeff == sign * reference.coeff

    def test_pauli_products(self) -> None:
        s = pauli_string({0: "X"}) * pauli_string({0: "Y"})
        assert s.pauli_map == {0: "Z"}
        assert s.coeff == 1j

    def test_dagger_of_bilinear(self) -> None:
        s = majorana_string(gamma(0), gamma(1), coeff=1j)
        assert s.dagger().coeff == pytest.approx(1j)

    def test_commutation_sign(self) -> None:
        a = majorana_string(gamma(0), gamma(1))
        b = majorana_string(gamma(1), gamma(2))
        c = majorana_string(gamma(2), gamma(3))
        assert a.commutation_sign(b) == -1
        assert a.commutes(c)
        assert pauli_string({0: "X"}).commutation_sign(pauli_string({0: "Z"})) == -1

    def test_unknown_letter(self) -> None:
        with pytest.raises(ValueError):
            pauli_string({0: "Q"})

    def test_str(self) -> None:
        assert str(majorana_string(gamma(0), gamma_prime(1), coeff=-1j)) == "-i γ0 γ'1"


# ── Dense oracle ──

class TestOracle:
    def test_gamma_prime_gamma_is_iz(self) -> None:
        m = jw_matrix(majorana_string(gamma_prime(0), gamma(0)), 1)
        np.testing.assert_allclose(m, 1j * PAULI["Z"])

    def test_parity_is_z(self) -> None:
        m = jw_matrix(parity(1), 2)
        np.testing.assert_allclose(m, np.kron(PAULI["Z"], PAULI["I"]))

    def test_anticommutator_vanishes(self) -> None:
        g0, g1 = majorana_matrix(gamma(0), 2), majorana_matrix(gamma(1), 2)
        np.testing.assert_allclose(g0 @ g1 + g1 @ g0, np.zeros((4, 4)))

    def test_linear_combination(self) -> None:
        a = jw_matrix(annihilation(0), 1)
        np.testing.assert_allclose(a, [[0, 1], [0, 0]])

    def test_dense_tensor_carries_the_matrix(self) -> None:
        terms = [parity(1).scaled(0.5), majorana_string(gamma(0), gamma_prime(1))]
        t = jw_dense(terms, 2)
        outs, ins = operator_specs(2)
        np.testing.assert_allclose(operator_matrix(t, [s.id for s in outs], [s.id for s in ins]),
                                   jw_matrix(terms, 2))

    def test_out_of_range(self) -> None:
        with pytest.raises(RangeError):
            jw_matrix(majorana_string(gamma(3)), 2)

    def test_capacity(self) -> None:
        with pytest.raises(CapacityError):
            jw_matrix(HybridString(), 14)

    def test_partial_trace_top(self) -> None:
        rho = np.kron(np.diag([0.25, 0.75]), np.diag([0.5, 0.5]))
        np.testing.assert_allclose(partial_trace_top(rho), np.diag([0.5, 0.5]))


# ── Operator diagrams ──

class TestMajoranaDiagrams:
    def test_single_majorana_tensor(self) -> None:
        order = [IndexSpec("odd", Direction.OUT, ODD), IndexSpec("o0", Direction.OUT, FERMION),
                 IndexSpec("i0", Direction.IN, FERMION)]
        expected = from_entries(order, {(0, 0, 1): 1.0, (0, 1, 0): 1.0})
        assert approx_equal(evaluate(majorana_diagram(gamma_prime(0))), expected)

    def test_all_products_on_three_modes(self) -> None:
        ops = [gamma(j) for j in range(3)] + [gamma_prime(j) for j in range(3)]
        for a, b in itertools.product(ops, repeat=2):
            s = majorana_string(a, b)
            report = check_against_oracle(string_diagram(s, 3), s, 3)
            assert report, f"{a} {b}: deviation {report.max_dev}"

    def test_pair_matches_ordered_product(self) -> None:
        d = pair_odd(majorana_diagram(gamma(0)), majorana_diagram(gamma_prime(1)))
        assert check_against_oracle(d, majorana_string(gamma_prime(1), gamma(0)), 2)

    def test_gamma_prime_gamma_gives_parity(self) -> None:
        pair = pair_odd(majorana_diagram(gamma(0)), majorana_diagram(gamma_prime(0)))
        d = juxtapose(pair, single(scalar(-1j), node_id="phase"))
        assert check_against_oracle(d, parity(0), 1)

    def test_gamma_squared(self) -> None:
        d = pair_odd(majorana_diagram(gamma(0)), majorana_diagram(gamma(0)))
        np.testing.assert_allclose(operator_matrix_of(d, 1), np.eye(2), atol=1e-12)

    def test_unpaired_odd_leg(self) -> None:
        with pytest.raises(ParityError):
            operator_matrix_of(majorana_diagram(gamma(0)), 1)

    def test_hybrid_string_with_paulis(self) -> None:
        s = majorana_string(gamma(0), gamma_prime(1), coeff=1j) * pauli_string({0: "Y", 1: "Z"})
        assert check_against_oracle(string_diagram(s, 2, 2), s, 2, 2)

    def test_odd_string_refused(self) -> None:
        with pytest.raises(ParityError):
            string_diagram(majorana_string(gamma(0)), 1)


class TestLadderOperators:
    def test_annihilation_squares_to_zero(self) -> None:
        d = pair_odd(annihilation_diagram(0), annihilation_diagram(0))
        np.testing.assert_allclose(operator_matrix_of(d, 1), np.zeros((2, 2)), atol=1e-12)

    def test_number_operator(self) -> None:
        d = pair_odd(annihilation_diagram(0), creation_diagram(0))
        assert check_against_oracle(d, multiply_sums(creation(0), annihilation(0)), 1)
        np.testing.assert_allclose(operator_matrix_of(d, 1), np.diag([0, 1]), atol=1e-12)

    def test_hopping_across_modes(self) -> None:
        d = pair_odd(annihilation_diagram(0), creation_diagram(1))
        assert check_against_oracle(d, multiply_sums(creation(1), annihilation(0)), 2)

    def test_pair_annihilation_across_modes(self) -> None:
        d = pair_odd(annihilation_diagram(1), annihilation_diagram(0))
        assert check_against_oracle(d, multiply_sums(annihilation(0), annihilation(1)), 2)


class TestKitaev:
    def test_embedding_is_isometry(self) -> None:
        f = operator_of(kitaev_embedding(), ["o1", "o0"], ["iq0"])
        np.testing.assert_allclose(f.conj().T @ f, np.eye(2), atol=1e-12)

    def test_embedding_images(self) -> None:
        f = operator_of(kitaev_embedding(), ["o1", "o0"], ["iq0"])
        hop = jw_matrix(majorana_string(gamma(1), gamma_prime(0), coeff=-1j), 2)
        np.testing.assert_allclose(f.conj().T @ hop @ f, PAULI["X"], atol=1e-12)
        np.testing.assert_allclose(f.conj().T @ jw_matrix(parity(0), 2) @ f, PAULI["Z"], atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_chain_state_is_eigenvector(self, n: int) -> None:
        outs, _ = mode_names(n)
        psi = operator_of(kitaev_chain_state(n), outs, [])[:, 0]
        for term in kitaev_terms(n):
            np.testing.assert_allclose(jw_matrix(term, n) @ psi, psi, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_projector_absorbs_chain_state(self, n: int) -> None:
        state = kitaev_chain_state(n)
        for j in range(n):
            absorbed = evaluate(then(state, kitaev_chain_projector(j, n)))
            assert approx_equal(absorbed, evaluate(state)), f"bond {j} of {n}"

    def test_wrap_bond_is_bounding(self) -> None:
        assert kitaev_term(1, 3).coeff == -1j
        assert kitaev_term(2, 3).coeff == 1j
        kinds = [spec.kind for spec in kitaev_chain_projector(2, 3).nodes.values()]
        assert kinds.count(Kind.PARITY) == 1
        assert Kind.PARITY not in [spec.kind for spec in kitaev_chain_projector(1, 3).nodes.values()]

    def test_projector_matches_oracle(self) -> None:
        for j in range(3):
            assert check_against_oracle(kitaev_chain_projector(j, 3), kitaev_projector_string(j, 3), 3)

    def test_bad_bond(self) -> None:
        with pytest.raises(RangeError):
            kitaev_chain_projector(3, 3)


class TestScattering:
    def test_zero_angle_is_identity(self) -> None:
        np.testing.assert_allclose(operator_matrix_of(scattering(0.0), 2), np.eye(4), atol=1e-12)
        np.testing.assert_allclose(operator_matrix_of(scattering(0.0, same_mode=True), 1), np.eye(2),
                                   atol=1e-12)

    @pytest.mark.parametrize("theta", [math.pi / 2, 1.2345, -0.7])
    def test_across_modes_matches_oracle(self, theta: float) -> None:
        assert check_against_oracle(scattering(theta, 0), scattering_strings(theta, 0), 2)

    @pytest.mark.parametrize("theta", [math.pi / 2, math.pi, 1.2345])
    def test_same_mode_matches_oracle(self, theta: float) -> None:
        d = scattering(theta, 0, same_mode=True)
        assert check_against_oracle(d, scattering_strings(theta, 0, same_mode=True), 1)

    def test_pole(self) -> None:
        with pytest.raises(PoleError):
            scattering(math.pi)

    def test_unitary(self) -> None:
        u = operator_matrix_of(scattering(1.2345), 2)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


# ── Characteristic functions ──

def _image(operand, n_modes: int = 1):
    return apply_transform(char_transform_fermion(n_modes), operand)


class TestFermionTransform:
    def test_identity_image(self) -> None:
        m = operator_matrix_of(_image(identity_layer(1)), 1)
        np.testing.assert_allclose(m, [[1, 0], [0, 0]], atol=1e-12)

    def test_parity_image(self) -> None:
        m = operator_matrix_of(_image(string_diagram(parity(0), 1)), 1)
        np.testing.assert_allclose(m, [[0, 0], [0, 1]], atol=1e-12)

    @pytest.mark.parametrize("primed, config", [(False, (0, 1, 0)), (True, (0, 0, 1))])
    def test_majorana_images(self, primed: bool, config: tuple[int, int, int]) -> None:
        m = gamma_prime(0) if primed else gamma(0)
        order = [IndexSpec("odd", Direction.OUT, ODD), IndexSpec("o0", Direction.OUT, FERMION),
                 IndexSpec("i0", Direction.IN, FERMION)]
        expected = from_entries(order, {config: 1.0})
        report = approx_equal(evaluate(_image(majorana_diagram(m))), expected, tol=1e-12)
        assert report, report.max_dev

    @pytest.mark.parametrize("n", [1, 2])
    def test_round_trip(self, rng: np.random.Generator, n: int) -> None:
        rho = _random_even_operator(rng, n)
        forward = apply_transform(char_transform_fermion(n), dense_operator_diagram(rho, n))
        back = apply_transform(char_transform_fermion(n, inverse=True), forward)
        np.testing.assert_allclose(operator_matrix_of(back, n), rho, atol=1e-12)

    def test_missing_legs(self) -> None:
        with pytest.raises(SignatureError):
            apply_transform(char_transform_fermion(2), identity_layer(1))

    @pytest.mark.parametrize("inverse", [False, True])
    def test_built_from_generators(self, inverse: bool) -> None:
        kinds = [spec.kind for spec in char_transform_fermion(2, inverse=inverse).nodes.values()]
        assert Kind.RAW not in kinds
        assert kinds.count(Kind.PARITY) == 2
        assert Kind.X_SPIDER in kinds and Kind.Z_SPIDER in kinds

    @pytest.mark.parametrize("primed", [False, True])
    def test_odd_round_trip(self, primed: bool) -> None:
        operand = majorana_diagram(gamma_prime(0) if primed else gamma(0))
        back = apply_transform(char_transform_fermion(1, inverse=True), _image(operand))
        report = approx_equal(evaluate(back), evaluate(operand), tol=1e-12)
        assert report, report.max_dev


class TestQubitTransform:
    def test_built_from_generators(self) -> None:
        kinds = {spec.kind for spec in char_transform_qubit(1).nodes.values()}
        assert Kind.RAW not in kinds
        assert {Kind.HADAMARD, Kind.QUBIT_Z, Kind.QUBIT_X} <= kinds

    def test_y_eigenstate_weights(self) -> None:
        # w(1, 1) = i^{-1} Z X = Y
        rho = 0.5 * np.array([[1, -1j], [1j, 1]])
        w = operator_matrix_of(apply_transform(char_transform_qubit(), dense_operator_diagram(rho, 0, 1)),
                               0, 1)
        np.testing.assert_allclose(w, np.eye(2), atol=1e-12)

    def test_ground_state_weights(self) -> None:
        rho = np.diag([1.0, 0.0]).astype(complex)
        w = operator_matrix_of(apply_transform(char_transform_qubit(), dense_operator_diagram(rho, 0, 1)),
                               0, 1)
        # rows p (Z power), columns q (X power)
        np.testing.assert_allclose(w, [[1, 0], [1, 0]], atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    def test_round_trip(self, rng: np.random.Generator, n: int) -> None:
        dim = 2 ** n
        rho = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        forward = apply_transform(char_transform_qubit(n), dense_operator_diagram(rho, 0, n))
        back = apply_transform(char_transform_qubit(n, inverse=True), forward)
        np.testing.assert_allclose(operator_matrix_of(back, 0, n), rho, atol=1e-12)


# ── Partial traces and purification ──

def _conjugated(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return op @ rho @ op.conj().T


class TestPartialTrace:
    @pytest.mark.parametrize("j", [0, 1])
    def test_gamma_prime(self, rng: np.random.Generator, j: int) -> None:
        rho = _random_even_operator(rng, 2)
        g = majorana_matrix(gamma_prime(j), 2)
        got = operator_matrix_of(apply_transform(partial_trace_gamma_prime(j), dense_operator_diagram(rho, 2)), 2)
        np.testing.assert_allclose(got, 0.5 * (rho + _conjugated(g, rho)), atol=1e-9)

    @pytest.mark.parametrize("j", [0, 1])
    def test_gamma(self, rng: np.random.Generator, j: int) -> None:
        rho = _random_even_operator(rng, 2)
        g = majorana_matrix(gamma(j), 2)
        got = operator_matrix_of(apply_transform(partial_trace_gamma(j), dense_operator_diagram(rho, 2)), 2)
        np.testing.assert_allclose(got, 0.5 * (rho + _conjugated(g, rho)), atol=1e-9)

    @pytest.mark.parametrize("j", [0, 1])
    def test_composition_either_order(self, rng: np.random.Generator, j: int) -> None:
        rho = _random_even_operator(rng, 2)
        g, gp = majorana_matrix(gamma(j), 2), majorana_matrix(gamma_prime(j), 2)
        expected = 0.25 * (rho + _conjugated(g, rho) + _conjugated(gp, rho) + _conjugated(g @ gp, rho))
        operand = dense_operator_diagram(rho, 2)
        first = trace_channel(operand, partial_trace(j))
        second = trace_channel(operand, list(reversed(partial_trace(j))))
        np.testing.assert_allclose(operator_matrix_of(first, 2), expected, atol=1e-9)
        np.testing.assert_allclose(operator_matrix_of(second, 2), expected, atol=1e-9)

    def test_maximally_mixed_is_fixed(self) -> None:
        rho = np.eye(4, dtype=complex) / 4
        got = trace_channel(dense_operator_diagram(rho, 2), partial_trace(1))
        np.testing.assert_allclose(operator_matrix_of(got, 2), rho, atol=1e-12)


class TestPurification:
    @pytest.mark.parametrize("primed", [True, False])
    @pytest.mark.parametrize("j", [0, 1])
    def test_isometry(self, j: int, primed: bool) -> None:
        outs, _ = mode_names(3)
        _, ins = mode_names(2)
        v = operator_of(purification_isometry(j, 2, primed), outs, ins)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("primed", [True, False])
    @pytest.mark.parametrize("j", [0, 1])
    def test_reduced_state_is_the_trace(self, rng: np.random.Generator, j: int, primed: bool) -> None:
        psi = _random_even_state(rng, 2)
        outs, _ = mode_names(3)
        purified = operator_of(purify(dense_operator_diagram(psi, 2, ket=True), j, 2, primed), outs, [])[:, 0]
        rho = np.outer(psi, psi.conj())
        g = majorana_matrix(gamma_prime(j) if primed else gamma(j), 2)
        expected = 0.5 * (rho + _conjugated(g, rho))
        np.testing.assert_allclose(partial_trace_top(np.outer(purified, purified.conj())), expected,
                                   atol=1e-9)
