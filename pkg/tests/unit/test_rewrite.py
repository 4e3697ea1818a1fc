"""Unit tests for rule application and diagram simplification."""

from __future__ import annotations

import math

import pytest

from src.calculus.diagram import Diagram, DiagramBuilder, evaluate, single, then
from src.calculus.generators import (
    F_IN,
    F_OUT,
    O_IN,
    O_OUT,
    Q_IN,
    Q_OUT,
    Kind,
    hadamard,
    parity_dot,
    qubit_x,
    qubit_z,
    w_tensor,
    x_spider,
    z_spider,
)
from src.calculus.rewrite import MatchSite, RewriteStats, apply_rule, find_sites, simplify
from src.calculus.rules import get_rule
from src.core.errors import EmbeddingError
from src.core.graded import approx_equal


def _chain(*specs) -> Diagram:
    d = single(specs[0], ["i0", "o0"])
    for spec in specs[1:]:
        d = then(d, single(spec, ["i0", "o0"]))
    return d


def _assert_preserved(before: Diagram, after: Diagram, scalar: complex) -> None:
    assert approx_equal(evaluate(before), evaluate(after), scalar=scalar)


# ---------------------------------------------------------------------------
# Matching and application
# ---------------------------------------------------------------------------

class TestApplyRule:

    def test_parity_pair_collapses_to_a_wire(self) -> None:
        host = _chain(z_spider(F_IN, F_OUT, z=0.5), parity_dot(), parity_dot())
        sites = find_sites(host, "parity-squared")
        assert len(sites) == 1
        rewritten, s = apply_rule(host, sites[0])
        assert s == 1
        assert sorted(spec.kind.value for spec in rewritten.nodes.values()) == ["Identity", "ZSpider"]
        _assert_preserved(host, rewritten, s)

    def test_scalar_comes_back(self) -> None:
        host = single(x_spider(O_OUT, O_IN), ["b", "a"])
        sites = find_sites(host, "odd-dot-sign")
        assert len(sites) == 1
        rewritten, s = apply_rule(host, sites[0])
        assert s == -1
        _assert_preserved(host, rewritten, s)

    def test_rule_legs_land_on_one_spider(self) -> None:
        b = DiagramBuilder()
        b.add("z", z_spider(F_IN, F_OUT, F_IN, F_OUT, z=0.3j))
        b.add("p1", parity_dot())
        b.add("p2", parity_dot())
        b.connect(("z", 1), ("p1", 0)).connect(("p1", 1), ("p2", 0)).connect(("p2", 1), ("z", 2))
        b.expose(("z", 0), "a").expose(("z", 3), "b")
        host = b.build()
        sites = find_sites(host, "parity-squared")
        rewritten, s = apply_rule(host, sites[0])
        _assert_preserved(host, rewritten, s)

    def test_open_rule_legs_joined_to_each_other(self) -> None:
        b = DiagramBuilder()
        b.add("p1", parity_dot())
        b.add("p2", parity_dot())
        b.connect(("p1", 1), ("p2", 0)).connect(("p2", 1), ("p1", 0))
        host = b.build()
        sites = find_sites(host, "parity-squared")
        assert sites
        rewritten, s = apply_rule(host, sites[0])
        assert [spec.kind for spec in rewritten.nodes.values()] == [Kind.IDENTITY]
        _assert_preserved(host, rewritten, s)

    def test_no_site_without_the_pattern(self) -> None:
        assert find_sites(_chain(parity_dot(), z_spider(F_IN, F_OUT, z=-2.0)), "parity-squared") == []

    def test_site_must_cover_the_rule(self) -> None:
        host = _chain(parity_dot(), parity_dot())
        with pytest.raises(EmbeddingError):
            apply_rule(host, MatchSite("parity-squared", {}, {"p1": "n0"}))

    def test_site_must_match_kinds(self) -> None:
        host = _chain(parity_dot(), z_spider(F_IN, F_OUT, z=2.0))
        node_ids = list(host.nodes)
        with pytest.raises(EmbeddingError):
            apply_rule(host, MatchSite("parity-squared", {}, {"p1": node_ids[0], "p2": node_ids[1]}))

    def test_edge_on_the_wrong_port(self) -> None:
        b = DiagramBuilder()
        b.add("A", w_tensor(2))
        b.add("B", w_tensor(2))
        b.connect(("A", 2), ("B", 0))
        for port, name in [(("A", 0), "y"), (("A", 1), "x"), (("B", 1), "w1"), (("B", 2), "w2")]:
            b.expose(port, name)
        host = b.build()
        assert find_sites(host, "w-associative", {"branch": 1}) == []
        assert len(find_sites(host, "w-associative", {"branch": 2})) == 1


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------

class TestSimplify:

    def test_parity_pair_disappears(self) -> None:
        host = _chain(z_spider(F_IN, F_OUT, z=0.5), parity_dot(), parity_dot())
        stats = RewriteStats()
        result, s = simplify(host, stats)
        assert result.node_count() == 1
        assert stats.total >= 1
        _assert_preserved(host, result, s)

    def test_z_spiders_fuse(self) -> None:
        host = _chain(z_spider(F_IN, F_OUT, z=2.0), z_spider(F_IN, F_OUT, z=0.25j))
        result, s = simplify(host)
        assert result.node_count() == 1
        _assert_preserved(host, result, s)

    def test_dot_absorbed_into_z(self) -> None:
        host = _chain(parity_dot(), z_spider(F_IN, F_OUT, z=3.0))
        result, s = simplify(host)
        (spec,) = result.nodes.values()
        assert spec.kind is Kind.Z_SPIDER
        _assert_preserved(host, result, s)

    def test_hadamards_cancel(self) -> None:
        host = _chain(hadamard(), hadamard(), hadamard())
        result, s = simplify(host)
        assert result.node_count() == 1
        _assert_preserved(host, result, s)

    def test_full_turn_qubit_phases_are_wires(self) -> None:
        host = _chain(qubit_z(Q_IN, Q_OUT, alpha=2 * math.pi), hadamard(),
                      qubit_x(Q_IN, Q_OUT, alpha=-4 * math.pi))
        result, s = simplify(host)
        assert [spec.kind for spec in result.nodes.values()] == [Kind.HADAMARD]
        _assert_preserved(host, result, s)

    @pytest.mark.parametrize("alpha, reduced", [(3 * math.pi, math.pi), (-math.pi, math.pi),
                                                (2.5 * math.pi, 0.5 * math.pi)])
    def test_qubit_phases_reduced(self, alpha: float, reduced: float) -> None:
        host = _chain(qubit_z(Q_IN, Q_OUT, alpha=alpha), hadamard())
        result, s = simplify(host)
        (phase,) = [spec for spec in result.nodes.values() if spec.kind is Kind.QUBIT_Z]
        assert complex(phase.param).real == pytest.approx(reduced, abs=1e-12)
        _assert_preserved(host, result, s)

    def test_x_spiders_fuse(self) -> None:
        b = DiagramBuilder()
        b.add("A", x_spider(F_IN, F_OUT, F_OUT))
        b.add("B", x_spider(F_IN, F_IN, F_OUT))
        b.connect(("B", 2), ("A", 0))
        b.expose(("B", 0), "a").expose(("B", 1), "b").expose(("A", 1), "c").expose(("A", 2), "d")
        host = b.build()
        result, s = simplify(host)
        assert sum(1 for spec in result.nodes.values() if spec.kind is Kind.X_SPIDER) == 1
        _assert_preserved(host, result, s)

    def test_closed_odd_ring_becomes_a_scalar(self) -> None:
        inst = get_rule("odd-ring").instantiate(legs="oi", nodes=2)
        result, s = simplify(inst.lhs)
        assert result.node_count() == 0
        assert s == pytest.approx(evaluate(inst.lhs).scalar)

    def test_network_keeps_its_value(self) -> None:
        b = DiagramBuilder()
        b.add("z", z_spider(F_IN, F_OUT, F_IN, F_OUT, z=0.4 - 0.2j))
        b.add("x", x_spider(F_IN, F_OUT, F_OUT))
        b.add("w", w_tensor(2))
        b.add("p", parity_dot())
        b.connect(("z", 1), ("x", 0)).connect(("x", 1), ("w", 0))
        b.connect(("w", 1), ("p", 0)).connect(("p", 1), ("z", 2))
        b.expose(("z", 0), "a").expose(("z", 3), "b").expose(("x", 2), "c").expose(("w", 2), "d")
        host = b.build()
        result, s = simplify(host)
        assert result.node_count() < host.node_count()
        _assert_preserved(host, result, s)

    def test_stats_render(self) -> None:
        stats = RewriteStats()
        stats.count("wire", 2)
        stats.count("dot")
        assert stats.total == 3
        assert str(stats).splitlines()[-1].split() == ["3", "TOTAL"]
