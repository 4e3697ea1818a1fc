"""Whole-engine checks: the full rule sweep and contraction-order independence."""

from __future__ import annotations

import numpy as np
import pytest

from evaluation.runner import run_sweep
from src.calculus.diagram import Diagram, evaluate, juxtapose, single, then
from src.calculus.generators import F_IN, F_OUT, parity_dot, x_spider, z_spider
from src.config import get_settings
from src.core.graded import approx_equal

pytestmark = pytest.mark.integration


def _wire_gadget(rng: np.random.Generator, k: int) -> Diagram:
    names = [f"i{k}", f"o{k}"]
    pick = rng.integers(3)
    if pick == 0:
        z = complex(rng.normal(), rng.normal())
        return single(z_spider(F_IN, F_OUT, z=z), names)
    if pick == 1:
        return single(x_spider(F_IN, F_OUT), names)
    return single(parity_dot(), names)


def _layer(rng: np.random.Generator) -> Diagram:
    if rng.random() < 0.5:
        spec = z_spider(F_IN, F_IN, F_OUT, F_OUT, z=complex(rng.normal(), rng.normal()))
    else:
        spec = x_spider(F_IN, F_IN, F_OUT, F_OUT)
    return single(spec, ["i0", "i1", "o0", "o1"])


def random_diagram(rng: np.random.Generator) -> Diagram:
    """Two fermionic wires, alternating entangling layers and per-wire gadgets."""
    target = int(rng.integers(3, 7))
    d = _layer(rng)
    while d.node_count() < target:
        if rng.random() < 0.5:
            step = _layer(rng)
        else:
            step = juxtapose(_wire_gadget(rng, 0), _wire_gadget(rng, 1))
        d = then(d, step)
    return d


class TestAcceptance:

    def test_full_rule_sweep(self) -> None:
        report = run_sweep()
        assert report.records
        assert report.passed, report.summary()

    def test_contraction_order_independence(self) -> None:
        rng = np.random.default_rng(50)
        tol = get_settings().order_tolerance
        for _ in range(50):
            d = random_diagram(rng)
            reference = evaluate(d)
            for _ in range(3):
                shuffled = evaluate(d, order="random", rng=rng)
                assert approx_equal(reference, shuffled, tol=tol)
