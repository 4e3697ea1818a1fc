"""Unit tests for lattices, bosonization networks and their operator images."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.bosonization import images
from src.bosonization.images import (
    bilinear_image,
    check_constraints,
    check_dense,
    generator_images,
    image_of_bilinear,
    image_table,
    parity_image,
    plaquette_loops,
    simulate_hamiltonian_map,
)
from src.bosonization.lattice import Lattice, default_frame
from src.bosonization.network import (
    boson_matrix,
    bosonize,
    bosonize_1d,
    bosonize_2d,
    even_projector,
    half_number_signs,
)
from src.core.errors import RangeError, UnsupportedError
from src.fermionops.operators import kitaev_term
from src.fermionops.oracle import jw_matrix
from src.fermionops.strings import (
    HybridString,
    gamma,
    gamma_prime,
    majorana_string,
    parity,
    pauli_string,
)


def _half(lattice: Lattice, v: int, axis: int, step: int) -> int:
    """Index of the edge between ``v`` and ``v + step * ê_axis``."""
    base = v if step > 0 else lattice.shift(v, axis, -1)
    return lattice.edge_at(base, axis).index


def _dense_images_hold(lattice: Lattice) -> None:
    d = boson_matrix(lattice)
    proj = d @ d.conj().T
    n, m = lattice.n_vertices, lattice.n_edges
    for label, fermionic, image in generator_images(lattice):
        lhs = d @ jw_matrix(fermionic, n) @ d.conj().T
        rhs = proj @ jw_matrix(image, 0, m) @ proj
        assert_allclose(lhs, rhs, atol=1e-9, err_msg=label)


@pytest.fixture
def chain3() -> Lattice:
    return Lattice((3,), periodic=False)


@pytest.fixture
def torus2() -> Lattice:
    return Lattice((2, 2))


class TestLattice:

    def test_default_frames(self) -> None:
        assert default_frame(1) == ((0, -1),)
        assert default_frame(2) == ((1, -1), (0, 1))
        assert default_frame(3) == ((2, -1), (1, -1), (0, 1))

    def test_counts(self) -> None:
        assert Lattice((4,), periodic=False).n_edges == 3
        assert Lattice((4,)).n_edges == 4
        assert Lattice((3, 3)).n_edges == 18
        assert Lattice((3, 2), periodic=False).n_edges == 7
        assert Lattice((2, 2, 2, 2)).n_edges == 64

    def test_cycle_space(self, torus2: Lattice) -> None:
        assert torus2.n_cycles == 5
        assert Lattice((5,), periodic=False).n_cycles == 0

    def test_chain_orientation(self, chain3: Lattice) -> None:
        # wires run from the higher site into the lower one
        assert [(e.tail, e.head) for e in chain3.edges] == [(1, 0), (2, 1)]

    def test_slot_order_square(self) -> None:
        lattice = Lattice((3, 3))
        v = lattice.index((1, 1))
        expected = [_half(lattice, v, 1, -1), _half(lattice, v, 0, 1),
                    _half(lattice, v, 1, 1), _half(lattice, v, 0, -1)]
        assert [s.edge for s in lattice.slots(v)] == expected
        assert [s.label for s in lattice.slots(v)] == ["+x1", "+x2", "-x1", "-x2"]

    def test_open_boundary_drops_slots(self, chain3: Lattice) -> None:
        assert [s.label for s in chain3.slots(0)] == ["-x1"]
        assert [s.label for s in chain3.slots(1)] == ["+x1", "-x1"]
        assert [s.label for s in chain3.slots(2)] == ["+x1"]

    def test_swapped_slots(self) -> None:
        lattice = Lattice((3,), periodic=False, swapped={0})
        assert [s.label for s in lattice.slots(1)] == ["-x1", "+x1"]

    def test_periodic_extent_one_refused(self) -> None:
        with pytest.raises(UnsupportedError):
            Lattice((1, 3))

    def test_bad_frame_refused(self) -> None:
        with pytest.raises(UnsupportedError):
            Lattice((3, 3), frame=((0, 1), (0, -1)))

    def test_plaquettes(self) -> None:
        assert len(Lattice((3, 3)).plaquettes()) == 9
        assert len(Lattice((3, 3), periodic=False).plaquettes()) == 4
        assert len(Lattice((2, 2, 2)).plaquettes()) == 24


class TestNetworks:

    @pytest.mark.parametrize("n, periodic", [(3, False), (4, False), (2, True), (4, True)])
    def test_chain_matches_general(self, n: int, periodic: bool) -> None:
        assert bosonize_1d(n, periodic=periodic) == bosonize(Lattice((n,), periodic=periodic))

    def test_swapped_chain_matches_general(self) -> None:
        general = bosonize(Lattice((4,), periodic=False, swapped={0}))
        assert bosonize_1d(4, swapped=True) == general

    @pytest.mark.parametrize("lx, ly, periodic", [(2, 2, True), (3, 2, True), (3, 2, False)])
    def test_square_matches_general(self, lx: int, ly: int, periodic: bool) -> None:
        assert bosonize_2d(lx, ly, periodic=periodic) == bosonize(Lattice((lx, ly), periodic=periodic))

    def test_node_inventory(self, torus2: Lattice) -> None:
        d = bosonize(torus2)
        assert d.node_count() == 4 + 8 + 1
        assert len(d.boundary) == 12
        assert d.nodes["v0"].arity == 5

    def test_short_chain_refused(self) -> None:
        with pytest.raises(RangeError):
            bosonize_1d(1, periodic=True)


class TestChainDense:

    @pytest.mark.parametrize("n, periodic", [(3, False), (4, False), (3, True), (4, True)])
    def test_isometry_on_even_states(self, n: int, periodic: bool) -> None:
        d = boson_matrix(Lattice((n,), periodic=periodic))
        assert_allclose(d.conj().T @ d, even_projector(n), atol=1e-9)

    @pytest.mark.parametrize("n, periodic", [(3, False), (4, False), (3, True), (4, True)])
    def test_images_by_conjugation(self, n: int, periodic: bool) -> None:
        _dense_images_hold(Lattice((n,), periodic=periodic))

    def test_open_chain_is_unitary_onto_qubits(self) -> None:
        d = boson_matrix(Lattice((4,), periodic=False))
        assert_allclose(d @ d.conj().T, np.eye(8), atol=1e-9)

    def test_drawn_chain_images(self, chain3: Lattice) -> None:
        # γ_2 γ_1 ↦ -i Y on edge 1 (between sites 1 and 2), Z on edge 0
        assert image_of_bilinear(chain3, 1, 0, -1) == pauli_string({1: "Y", 0: "Z"}, coeff=-1j)
        assert parity_image(chain3, 1) == pauli_string({0: "Z", 1: "Z"})

    def test_boundary_drops_z(self, chain3: Lattice) -> None:
        assert image_of_bilinear(chain3, 0, 0, -1) == pauli_string({0: "Y"}, coeff=-1j)

    def test_sign_argument_covers_both_neighbours(self, chain3: Lattice) -> None:
        assert image_of_bilinear(chain3, 1, 0, -1) == image_of_bilinear(chain3, 2, 0, 1)

    def test_missing_neighbour(self, chain3: Lattice) -> None:
        with pytest.raises(RangeError):
            image_of_bilinear(chain3, 2, 0, -1)

    @pytest.mark.parametrize("periodic", [False, True])
    def test_swapped_slots_add_z_layer(self, periodic: bool) -> None:
        n = 4
        plain = boson_matrix(Lattice((n,), periodic=periodic))
        lattice = Lattice((n,), periodic=periodic, swapped={0})
        swapped = boson_matrix(lattice)
        z_layer = jw_matrix(pauli_string({e: "Z" for e in range(lattice.n_edges)}), 0, lattice.n_edges)
        assert_allclose(swapped, z_layer @ plain @ half_number_signs(n), atol=1e-9)

    def test_swapped_images_still_hold(self) -> None:
        _dense_images_hold(Lattice((4,), periodic=False, swapped={0}))


class TestSquareDense:

    def test_isometry_on_even_states(self, torus2: Lattice) -> None:
        d = boson_matrix(torus2)
        assert_allclose(d.conj().T @ d, even_projector(4), atol=1e-9)

    def test_images_by_conjugation(self, torus2: Lattice) -> None:
        _dense_images_hold(torus2)

    def test_open_square_images(self) -> None:
        _dense_images_hold(Lattice((3, 2), periodic=False))

    def test_dense_report(self, torus2: Lattice) -> None:
        report = check_dense(torus2)
        assert report.passed, report.failures
        assert report.checked == 1 + len(generator_images(torus2))

    def test_dense_report_on_open_chain(self, chain3: Lattice) -> None:
        assert check_dense(chain3, tol=1e-9).passed

    def test_plaquette_loops_fix_the_image(self, torus2: Lattice) -> None:
        d = boson_matrix(torus2)
        loops = plaquette_loops(torus2)
        assert len(loops) == 4
        for loop in loops:
            assert_allclose(jw_matrix(loop.string, 0, torus2.n_edges) @ d, d, atol=1e-9)

    def test_dedicated_network_evaluates_the_same(self, torus2: Lattice) -> None:
        assert_allclose(boson_matrix(torus2, bosonize_2d(2, 2)), boson_matrix(torus2), atol=1e-12)


class TestDrawnImages:

    def test_square_horizontal_pair(self) -> None:
        lattice = Lattice((3, 3))
        v = lattice.index((1, 1))
        left = lattice.shift(v, 0, -1)
        expected = pauli_string({
            _half(lattice, v, 0, -1): "Y",
            _half(lattice, left, 1, -1): "Z",
            _half(lattice, v, 1, 1): "Z",
            _half(lattice, v, 0, 1): "Z",
            _half(lattice, v, 1, -1): "Z",
        }, coeff=-1j)
        assert image_of_bilinear(lattice, v, 1, -1) == expected

    def test_square_vertical_pair(self) -> None:
        lattice = Lattice((3, 3))
        v = lattice.index((1, 1))
        below = lattice.shift(v, 1, -1)
        expected = pauli_string({
            _half(lattice, v, 1, -1): "Y",
            _half(lattice, below, 1, -1): "Z",
            _half(lattice, below, 0, 1): "Z",
        }, coeff=-1j)
        # γ_v γ_{v-ŷ}
        assert image_of_bilinear(lattice, v, 0, 1) == expected

    def test_cubic_x_pair(self) -> None:
        lattice = Lattice((3, 3, 3))
        v = lattice.index((1, 1, 1))
        v1 = lattice.shift(v, 0, -1)
        zs = [_half(lattice, v1, 2, -1), _half(lattice, v1, 1, -1),
              _half(lattice, v, 2, -1), _half(lattice, v, 1, -1), _half(lattice, v, 0, 1),
              _half(lattice, v, 2, 1), _half(lattice, v, 1, 1)]
        expected = pauli_string({_half(lattice, v, 0, -1): "Y", **{e: "Z" for e in zs}}, coeff=-1j)
        image = image_of_bilinear(lattice, v, 2, -1)
        assert image == expected
        assert sum(1 for _, letter in image.paulis if letter == "Z") == 7

    def test_cubic_y_pair(self) -> None:
        lattice = Lattice((3, 3, 3))
        v = lattice.index((1, 1, 1))
        v2 = lattice.shift(v, 1, -1)
        zs = [_half(lattice, v, 2, -1), _half(lattice, v2, 2, -1), _half(lattice, v2, 1, -1),
              _half(lattice, v2, 0, 1), _half(lattice, v2, 2, 1)]
        expected = pauli_string({_half(lattice, v, 1, -1): "Y", **{e: "Z" for e in zs}}, coeff=-1j)
        assert image_of_bilinear(lattice, v, 1, 1) == expected

    def test_cubic_z_pair(self) -> None:
        lattice = Lattice((3, 3, 3))
        v = lattice.index((1, 1, 1))
        v3 = lattice.shift(v, 2, -1)
        zs = [_half(lattice, v3, 2, -1), _half(lattice, v3, 1, -1), _half(lattice, v3, 0, 1)]
        expected = pauli_string({_half(lattice, v, 2, -1): "Y", **{e: "Z" for e in zs}}, coeff=-1j)
        assert image_of_bilinear(lattice, v, 0, 1) == expected

    def test_reversed_pair_flips_sign(self, torus2: Lattice) -> None:
        e = torus2.edges[0]
        assert bilinear_image(torus2, e.head, e.tail, edge=0) == -bilinear_image(torus2, e.tail, e.head, edge=0)

    def test_non_neighbours(self) -> None:
        with pytest.raises(UnsupportedError):
            bilinear_image(Lattice((3, 3)), 0, 4)

    def test_image_table(self, chain3: Lattice) -> None:
        table = image_table(chain3)
        assert table.entries["g2g1@e1"] == {"0": "Z", "1": "Y", "phase": "-i"}
        assert table.entries["P0"] == {"0": "Z", "phase": "+"}


class TestConstraints:

    @pytest.mark.parametrize("extents", [(5,), (3, 3), (2, 2), (2, 2, 2), (2, 2, 2, 2)])
    def test_symbolic_constraints_hold(self, extents: tuple[int, ...]) -> None:
        report = check_constraints(Lattice(extents))
        assert report.passed, report.failures[:3]
        assert report.checked > 0

    def test_open_lattice(self) -> None:
        assert check_constraints(Lattice((3, 4), periodic=False)).passed

    def test_threads_do_not_change_the_result(self) -> None:
        lattice = Lattice((2, 2, 2))
        one = check_constraints(lattice, threads=1)
        four = check_constraints(lattice, threads=4)
        assert (one.checked, one.failures) == (four.checked, four.failures)

    def test_loops_carry_real_unit_signs(self) -> None:
        for loop in plaquette_loops(Lattice((3, 3))):
            assert loop.sign in (1, -1)
            assert not loop.string.majoranas

    def test_broken_images_are_caught(self, monkeypatch: pytest.MonkeyPatch) -> None:
        def bare(lattice, a, b, edge=None):
            e = edge if edge is not None else lattice.edges_between(a, b)[0].index
            return pauli_string({e: "Y"}, coeff=-1j)

        monkeypatch.setattr(images, "bilinear_image", bare)
        report = check_constraints(Lattice((3, 3)))
        assert not report.passed


class TestHamiltonianMap:

    def test_kitaev_chain(self) -> None:
        n = 4
        lattice = Lattice((n,), periodic=False)
        terms = [kitaev_term(j, n) for j in range(n - 1)]
        mapped = simulate_hamiltonian_map(lattice, terms, penalty=False)
        assert sorted(mapped, key=lambda s: s.paulis) == [
            pauli_string({j: "X"}, coeff=-1) for j in range(n - 1)]

    def test_kitaev_chain_dense(self) -> None:
        n = 4
        lattice = Lattice((n,), periodic=False)
        terms = [kitaev_term(j, n) for j in range(n - 1)] + [parity(j).scaled(0.3) for j in range(n)]
        mapped = simulate_hamiltonian_map(lattice, terms, penalty=False)
        d = boson_matrix(lattice)
        lhs = d @ jw_matrix(terms, n) @ d.conj().T
        assert_allclose(lhs, jw_matrix(mapped, 0, n - 1), atol=1e-9)

    def test_parity_is_a_star(self) -> None:
        lattice = Lattice((3, 3))
        v = lattice.index((1, 1))
        [image] = simulate_hamiltonian_map(lattice, [parity(v)], penalty=False)
        assert image == pauli_string({e.index: "Z" for e in lattice.incident(v)})

    def test_primed_bilinear(self) -> None:
        lattice = Lattice((3,), periodic=False)
        term = majorana_string(gamma_prime(1), gamma_prime(2))
        [image] = simulate_hamiltonian_map(lattice, [term], penalty=False)
        d = boson_matrix(lattice)
        assert_allclose(d @ jw_matrix(term, 3) @ d.conj().T, jw_matrix(image, 0, 2), atol=1e-9)

    def test_empty_hamiltonian_gives_penalties(self) -> None:
        mapped = simulate_hamiltonian_map(Lattice((3, 3)), [])
        identity = [t for t in mapped if not t.paulis]
        assert len(identity) == 1 and identity[0].coeff == pytest.approx(-4.5)
        assert len(mapped) == 1 + 9

    def test_empty_chain_has_no_penalty(self) -> None:
        assert simulate_hamiltonian_map(Lattice((4,)), []) == []

    @pytest.mark.parametrize("term", [
        majorana_string(gamma(0), gamma(2)),
        majorana_string(gamma(0)),
        HybridString.of(1.0, {0: "X"}),
    ])
    def test_unsupported_shapes(self, term: HybridString) -> None:
        with pytest.raises(UnsupportedError):
            simulate_hamiltonian_map(Lattice((3,), periodic=False), [term])
