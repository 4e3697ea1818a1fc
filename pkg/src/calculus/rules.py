"""Rule catalog — every rewrite rule as a parametric pair of diagrams.

A rule instance holds ``lhs``, ``rhs`` and a scalar ``s`` with
``evaluate(lhs) == s * evaluate(rhs)``. Both sides expose the same boundary
names with the same wires and directions. Leg lists are written out
explicitly, so each instance pins down the tick and every arrow.

Rule metadata (equation group, undrawn orientations) lives in
``catalog/rules.yaml``; the builders and parameter spaces live here.
"""

from __future__ import annotations

import cmath
import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from src.calculus.diagram import (
    Diagram,
    DiagramBuilder,
    dagger_diagram,
    evaluate,
    single,
)
from src.calculus.generators import (
    F_IN,
    F_OUT,
    O_IN,
    O_OUT,
    Q_IN,
    Q_OUT,
    Direction,
    GeneratorSpec,
    Leg,
    Wire,
    hadamard,
    identity,
    parity_dot,
    qubit_x,
    qubit_z,
    w_dual,
    w_tensor,
    x_spider,
    z_spider,
)
from src.config import Settings, get_settings
from src.core.errors import CapacityError, InputError, PoleError
from src.core.graded import approx_equal
from src.core.models import VerificationRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuleInstance:
    lhs: Diagram
    rhs: Diagram
    scalar: complex = 1.0


@dataclass(frozen=True)
class RewriteRule:
    name: str
    build: Callable[..., RuleInstance]
    space: Callable[[Settings], list[dict[str, Any]]]
    group: str = ""
    undrawn: tuple[dict[str, Any], ...] = ()

    def instantiate(self, **params: Any) -> RuleInstance:
        return self.build(**params)

    def cells(self, settings: Settings | None = None) -> list[dict[str, Any]]:
        return self.space(settings or get_settings())

    def is_drawn(self, params: dict[str, Any]) -> bool:
        return not any(all(params.get(k) == v for k, v in cell.items()) for cell in self.undrawn)


_BUILDERS: dict[str, tuple[Callable[..., RuleInstance], Callable[[Settings], list[dict]]]] = {}


def _rule(name: str, space: Callable[[Settings], list[dict]] | None = None):
    def register(fn: Callable[..., RuleInstance]) -> Callable[..., RuleInstance]:
        _BUILDERS[name] = (fn, space or (lambda s: [{}]))
        return fn
    return register


# ── Parameter helpers ──

def _grid(**axes: Any) -> Callable[[Settings], list[dict]]:
    """Cartesian product of axes; an axis may be a callable of the settings."""
    def space(settings: Settings) -> list[dict]:
        resolved = {k: (v(settings) if callable(v) else v) for k, v in axes.items()}
        keys = list(resolved)
        return [dict(zip(keys, combo)) for combo in itertools.product(*resolved.values())]
    return space


def _phases(settings: Settings) -> list[float]:
    return list(settings.phase_samples)


def _dirs(n: int) -> list[str]:
    return ["".join(p) for p in itertools.product("io", repeat=n)]


def _with_dirs(base: Callable[[Settings], list[dict]],
               count: Callable[[dict], int]) -> Callable[[Settings], list[dict]]:
    """Extend every cell with each direction string of the length it needs."""
    def space(settings: Settings) -> list[dict]:
        cells = []
        for cell in base(settings):
            for dirs in _dirs(count(cell)):
                cells.append({**cell, "dirs": dirs})
        return cells
    return space


def _leg(wire: str, d: str) -> Leg:
    direction = Direction.IN if d == "i" else Direction.OUT
    return Leg({"F": Wire.FERMION, "Q": Wire.QUBIT, "O": Wire.ODD}[wire], direction)


def _through(b: DiagramBuilder, port: tuple[str, int], leg: Leg, node_id: str,
             spec: GeneratorSpec, name: str) -> None:
    """Insert a node with legs ``[In, Out, ...]`` on an open leg and expose its far side."""
    b.add(node_id, spec)
    if leg.direction is Direction.OUT:
        b.connect(port, (node_id, 0))
        b.expose((node_id, 1), name)
    else:
        b.expose((node_id, 0), name)
        b.connect((node_id, 1), port)


def _spider(spec: GeneratorSpec, names: list[str | None], node_id: str = "x",
            b: DiagramBuilder | None = None) -> DiagramBuilder:
    """Add a node and expose the legs that have a name."""
    b = b or DiagramBuilder()
    b.add(node_id, spec)
    for pos, name in enumerate(names):
        if name is not None:
            b.expose((node_id, pos), name)
    return b


def _amp(alpha: float) -> complex:
    return cmath.exp(1j * alpha)


# ── Identity group ──

@_rule("identity-wire", _grid(wire=["F", "O"]))
def identity_wire(wire: str = "F") -> RuleInstance:
    w = {"F": Wire.FERMION, "O": Wire.ODD}[wire]
    lhs = single(x_spider(Leg(w, Direction.IN), Leg(w, Direction.OUT)), ["a", "b"])
    rhs = single(identity(w), ["a", "b"])
    return RuleInstance(lhs, rhs)


@_rule("x-two-leg-parity")
def x_two_leg_parity() -> RuleInstance:
    lhs = single(x_spider(F_OUT, F_IN), ["b", "a"])
    return RuleInstance(lhs, single(parity_dot(), ["a", "b"]))


@_rule("odd-dot-sign")
def odd_dot_sign() -> RuleInstance:
    lhs = single(x_spider(O_OUT, O_IN), ["b", "a"])
    return RuleInstance(lhs, single(identity(Wire.ODD), ["a", "b"]), -1.0)


@_rule("z-two-leg-identity", _grid(wire=["F", "Q"]))
def z_two_leg_identity(wire: str = "F") -> RuleInstance:
    lhs = single(z_spider(_leg(wire, "i"), _leg(wire, "o")), ["a", "b"])
    w = Wire.FERMION if wire == "F" else Wire.QUBIT
    return RuleInstance(lhs, single(identity(w), ["a", "b"]))


@_rule("odd-ring", _grid(legs=["io", "oi"], nodes=[1, 2, 3]))
def odd_ring(legs: str = "io", nodes: int = 1) -> RuleInstance:
    """Closed odd wire through ``nodes`` two-leg X-spiders."""
    b = DiagramBuilder()
    spec = x_spider(O_IN, O_OUT) if legs == "io" else x_spider(O_OUT, O_IN)
    out_leg, in_leg = (1, 0) if legs == "io" else (0, 1)
    for k in range(nodes):
        b.add(f"r{k}", spec)
    for k in range(nodes):
        b.connect((f"r{k}", out_leg), (f"r{(k + 1) % nodes}", in_leg))
    sign = 1 if legs == "io" else -1
    return RuleInstance(b.build(), Diagram(), -float(sign ** nodes))


# ── Fermion parity ──

@_rule("parity-as-z")
def parity_as_z() -> RuleInstance:
    return RuleInstance(single(parity_dot(), ["a", "b"]),
                        single(z_spider(F_IN, F_OUT, z=-1.0), ["a", "b"]))


@_rule("parity-squared")
def parity_squared() -> RuleInstance:
    b = DiagramBuilder()
    b.add("p1", parity_dot())
    b.add("p2", parity_dot())
    b.expose(("p1", 0), "a").connect(("p1", 1), ("p2", 0)).expose(("p2", 1), "b")
    return RuleInstance(b.build(), single(identity(), ["a", "b"]))


@_rule("parity-into-z", _with_dirs(_grid(n=[2, 4], k=[0, 1], alpha=_phases), lambda c: c["n"]))
def parity_into_z(n: int = 2, k: int = 0, dirs: str = "io", alpha: float = 0.0) -> RuleInstance:
    legs = [_leg("F", d) for d in dirs]
    names = [f"l{j}" for j in range(n)]
    b = _spider(z_spider(*legs, z=_amp(alpha)), [nm if j != k else None for j, nm in enumerate(names)])
    _through(b, ("x", k), legs[k], "p", parity_dot(), names[k])
    rhs = single(z_spider(*legs, z=-_amp(alpha)), names, node_id="x")
    return RuleInstance(b.build(), rhs)


# ── Tick rotation ──

@_rule("tick-rotation-x", _with_dirs(_grid(n=[2, 3, 4], odd=[False, True]), lambda c: c["n"]))
def tick_rotation_x(n: int = 2, dirs: str = "io", odd: bool = False) -> RuleInstance:
    """Tick moved past the first leg: a parity dot appears on that leg."""
    wires = ["F"] * n
    if odd:
        wires[-1] = "O"
    legs = [_leg(w, d) for w, d in zip(wires, dirs)]
    names = [f"l{j + 1}" for j in range(n)]
    lhs = single(x_spider(*(legs[1:] + legs[:1])), names[1:] + names[:1], node_id="x")
    b = _spider(x_spider(*legs), [None] + names[1:])
    _through(b, ("x", 0), legs[0], "p", parity_dot(), names[0])
    return RuleInstance(lhs, b.build())


_Z_SHAPES = {"ff": "FF", "ffff": "FFFF", "ffq": "FFQ", "qff": "QFF"}


def _z_rotation_space(settings: Settings) -> list[dict]:
    cells = []
    for shape, form, alpha in itertools.product(_Z_SHAPES, ["phase", "dot"], settings.phase_samples):
        if shape == "qff" and form == "dot":
            continue
        for dirs in _dirs(len(_Z_SHAPES[shape])):
            cells.append({"shape": shape, "form": form, "alpha": alpha, "dirs": dirs})
    return cells


@_rule("tick-rotation-z", _z_rotation_space)
def tick_rotation_z(shape: str = "ff", dirs: str = "io", alpha: float = 0.0,
                    form: str = "phase") -> RuleInstance:
    """Tick moved past a fermion leg adds a π phase, or equivalently a parity dot."""
    wires = _Z_SHAPES[shape]
    legs = [_leg(w, d) for w, d in zip(wires, dirs)]
    names = [f"l{j + 1}" for j in range(len(legs))]
    z = _amp(alpha)
    lhs = single(z_spider(*(legs[1:] + legs[:1]), z=z), names[1:] + names[:1], node_id="x")
    if wires[0] == "Q":
        return RuleInstance(lhs, single(z_spider(*legs, z=z), names, node_id="x"))
    if form == "phase":
        return RuleInstance(lhs, single(z_spider(*legs, z=-z), names, node_id="x"))
    b = _spider(z_spider(*legs, z=z), [None] + names[1:])
    _through(b, ("x", 0), legs[0], "p", parity_dot(), names[0])
    return RuleInstance(lhs, b.build())


# ── Self-contraction ──

_X_LOOP_SCALARS = {("F", "clean"): 2.0, ("F", "twisted"): 0.0,
                   ("O", "clean"): 1.0, ("O", "twisted"): -1.0}


@_rule("x-self-loop", _with_dirs(
    _grid(wire=["F", "O"], flow=["clean", "twisted"], before=[0, 1], after=[0, 1, 2]),
    lambda c: c["before"] + c["after"]))
def x_self_loop(wire: str = "F", flow: str = "clean", before: int = 0, after: int = 0,
                dirs: str = "") -> RuleInstance:
    """Two neighbouring legs of one X-spider joined by a wire."""
    others = [_leg("F", d) for d in dirs]
    p, q = ("o", "i") if flow == "clean" else ("i", "o")
    legs = others[:before] + [_leg(wire, p), _leg(wire, q)] + others[before:]
    names = [f"u{j}" for j in range(before)] + [None, None] + [f"w{j}" for j in range(after)]
    b = _spider(x_spider(*legs), names)
    if flow == "clean":
        b.connect(("x", before), ("x", before + 1))
    else:
        b.connect(("x", before + 1), ("x", before))
    kept = [nm for nm in names if nm is not None]
    rhs = single(x_spider(*others), kept, node_id="x")
    return RuleInstance(b.build(), rhs, _X_LOOP_SCALARS[(wire, flow)])


_Z_LOOP_OTHERS = {"": "", "ff": "FF", "q": "Q", "ffq": "FFQ"}


@_rule("z-self-loop", _with_dirs(
    _grid(wire=["F", "Q"], flow=["clean", "twisted"], others=list(_Z_LOOP_OTHERS), alpha=_phases),
    lambda c: len(c["others"])))
def z_self_loop(wire: str = "F", flow: str = "clean", others: str = "", dirs: str = "",
                alpha: float = 0.0) -> RuleInstance:
    rest = [_leg(w, d) for w, d in zip(_Z_LOOP_OTHERS[others], dirs)]
    p, q = ("o", "i") if flow == "clean" else ("i", "o")
    legs = [_leg(wire, p), _leg(wire, q)] + rest
    names = [None, None] + [f"w{j}" for j in range(len(rest))]
    z = _amp(alpha)
    b = _spider(z_spider(*legs, z=z), names)
    if flow == "clean":
        b.connect(("x", 0), ("x", 1))
    else:
        b.connect(("x", 1), ("x", 0))
    z_after = -z if (flow == "twisted" and wire == "F") else z
    rhs = single(z_spider(*rest, z=z_after), names[2:], node_id="x")
    return RuleInstance(b.build(), rhs)


# ── Z-fusion ──

# in-side spider legs after the contracted first leg, out-side legs before the contracted last leg
_Z_FUSION_SHAPES = {"ff": ("F", "F", "F"), "ffq": ("F", "FQ", "QF"), "qq": ("Q", "Q", "FF")}


@_rule("z-fusion", _with_dirs(
    _grid(shape=list(_Z_FUSION_SHAPES), alpha=_phases, beta=[0.0, 0.7]),
    lambda c: len(_Z_FUSION_SHAPES[c["shape"]][1]) + len(_Z_FUSION_SHAPES[c["shape"]][2])))
def z_fusion(shape: str = "ff", dirs: str = "oo", alpha: float = 0.0,
             beta: float = 0.0) -> RuleInstance:
    """Z-spiders joined from the last leg of one to the first leg of the other."""
    wire, a_wires, b_wires = _Z_FUSION_SHAPES[shape]
    a_free = [_leg(w, d) for w, d in zip(a_wires, dirs)]
    b_free = [_leg(w, d) for w, d in zip(b_wires, dirs[len(a_wires):])]
    a_names = [f"a{j}" for j in range(len(a_free))]
    b_names = [f"b{j}" for j in range(len(b_free))]
    b = _spider(z_spider(_leg(wire, "i"), *a_free, z=_amp(alpha)), [None] + a_names, "A")
    _spider(z_spider(*b_free, _leg(wire, "o"), z=_amp(beta)), b_names + [None], "B", b)
    b.connect(("B", len(b_free)), ("A", 0))
    rhs = single(z_spider(*(b_free + a_free), z=_amp(alpha + beta)), b_names + a_names, "x")
    return RuleInstance(b.build(), rhs)


# ── X-fusion ──

@_rule("x-fusion", _with_dirs(
    _grid(m=[2, 3], n=[2, 3], flow=["clean", "reversed"]),
    lambda c: c["m"] + c["n"] - 2))
def x_fusion(m: int = 2, n: int = 2, flow: str = "clean", dirs: str = "oi") -> RuleInstance:
    """Spider A (first leg contracted) fused with spider B (last leg contracted).

    With the wire running from B into A no sign appears; run the other way
    it leaves a parity dot on every free leg of A.
    """
    a_free = [_leg("F", d) for d in dirs[: m - 1]]
    b_free = [_leg("F", d) for d in dirs[m - 1:]]
    a_names = [f"a{j + 2}" for j in range(m - 1)]
    b_names = [f"b{j + 1}" for j in range(n - 1)]
    clean = flow == "clean"
    b = _spider(x_spider(F_IN if clean else F_OUT, *a_free), [None] + a_names, "A")
    _spider(x_spider(*b_free, F_OUT if clean else F_IN), b_names + [None], "B", b)
    if clean:
        b.connect(("B", n - 1), ("A", 0))
    else:
        b.connect(("A", 0), ("B", n - 1))
    if clean:
        rhs = single(x_spider(*(b_free + a_free)), b_names + a_names, "x")
        return RuleInstance(b.build(), rhs)
    r = _spider(x_spider(*(b_free + a_free)), b_names + [None] * len(a_free))
    for j, (leg, name) in enumerate(zip(a_free, a_names)):
        _through(r, ("x", n - 1 + j), leg, f"p{j}", parity_dot(), name)
    return RuleInstance(b.build(), r.build())


@_rule("x-fusion-odd-pair", _with_dirs(
    _grid(before=[0, 1], gap=[0, 1], after=[0, 1], odd_dirs=_dirs(2)),
    lambda c: c["before"] + c["gap"] + c["after"]))
def x_fusion_odd_pair(before: int = 1, gap: int = 0, after: int = 1, dirs: str = "io",
                      odd_dirs: str = "io") -> RuleInstance:
    """Two odd legs split off as a separate two-leg X-spider.

    Fermion legs sitting between the odd pair pick up a parity dot.
    """
    f = [_leg("F", d) for d in dirs]
    u, g, w = f[:before], f[before:before + gap], f[before + gap:]
    oa, ob = _leg("O", odd_dirs[0]), _leg("O", odd_dirs[1])
    un = [f"u{j}" for j in range(before)]
    gn = [f"m{j}" for j in range(gap)]
    wn = [f"w{j}" for j in range(after)]
    lhs = single(x_spider(*(u + [oa] + g + [ob] + w)), un + ["oa"] + gn + ["ob"] + wn, "x")
    r = _spider(x_spider(*(u + g + w)), un + [None] * gap + wn)
    for j, (leg, name) in enumerate(zip(g, gn)):
        _through(r, ("x", before + j), leg, f"p{j}", parity_dot(), name)
    _spider(x_spider(oa, ob), ["oa", "ob"], "y", r)
    return RuleInstance(lhs, r.build())


# (A's odd direction, B's legs, B's contracted leg) -> scalar
_ABSORB = {
    ("o", "io", 0): 1.0, ("o", "oi", 1): -1.0, ("o", "ii", 0): 1.0, ("o", "ii", 1): -1.0,
    ("i", "io", 1): 1.0, ("i", "oi", 0): -1.0, ("i", "oo", 0): -1.0, ("i", "oo", 1): 1.0,
}


def _absorb_space(settings: Settings) -> list[dict]:
    cells = []
    for (odir, blegs, at), k in itertools.product(_ABSORB, [1, 2, 3]):
        for dirs in _dirs(k):
            cells.append({"k": k, "dirs": dirs, "odir": odir, "blegs": blegs, "at": at})
    return cells


@_rule("x-fusion-odd-absorb", _absorb_space)
def x_fusion_odd_absorb(k: int = 1, dirs: str = "o", odir: str = "o", blegs: str = "io",
                        at: int = 0) -> RuleInstance:
    """A two-leg odd X-spider absorbed into the odd leg of a neighbour."""
    f = [_leg("F", d) for d in dirs]
    names = [f"f{j}" for j in range(k)]
    b = _spider(x_spider(*f, _leg("O", odir)), names + [None], "A")
    _spider(x_spider(*(_leg("O", d) for d in blegs)),
            [None if j == at else "o" for j in range(2)], "B", b)
    if odir == "o":
        b.connect(("A", k), ("B", at))
    else:
        b.connect(("B", at), ("A", k))
    free = blegs[1 - at]
    rhs = single(x_spider(*f, _leg("O", free)), names + ["o"], "x")
    return RuleInstance(b.build(), rhs, _ABSORB[(odir, blegs, at)])


# ── π commutation ──

@_rule("pi-commutation", _grid(m=[1, 2], beta=_phases))
def pi_commutation(m: int = 1, beta: float = 0.0) -> RuleInstance:
    """Majorana flips on all 2m legs of a Z state, their odd legs tied to one X-spider."""
    k = 2 * m
    b = DiagramBuilder()
    b.add("z", z_spider(*([F_OUT] * k), z=_amp(beta)))
    b.add("q", x_spider(*([O_IN] * k)))
    for j in range(k):
        b.add(f"m{j}", x_spider(F_IN, F_OUT, O_OUT))
        b.connect(("z", j), (f"m{j}", 0))
        b.expose((f"m{j}", 1), f"o{j}")
        b.connect((f"m{j}", 2), ("q", j))
    sign = (-1) ** m
    rhs = single(z_spider(*([F_OUT] * k), z=sign * _amp(-beta)), [f"o{j}" for j in range(k)])
    return RuleInstance(b.build(), rhs, sign * _amp(beta))


# ── Parity surround ──

@_rule("parity-surround", _with_dirs(_grid(nf=[1, 2, 3], no=[0, 1, 2]), lambda c: c["nf"]))
def parity_surround(nf: int = 2, no: int = 0, dirs: str = "io") -> RuleInstance:
    """Dotting every fermion leg of an X-spider gives (-1)^(#odd legs)."""
    f = [_leg("F", d) for d in dirs]
    o = [O_OUT if j % 2 == 0 else O_IN for j in range(no)]
    fn = [f"f{j}" for j in range(nf)]
    on = [f"o{j}" for j in range(no)]
    b = _spider(x_spider(*(f + o)), [None] * nf + on)
    for j, (leg, name) in enumerate(zip(f, fn)):
        _through(b, ("x", j), leg, f"p{j}", parity_dot(), name)
    rhs = single(x_spider(*(f + o)), fn + on, "x")
    return RuleInstance(b.build(), rhs, float((-1) ** no))


# ── FQ triangle ──

@_rule("fq-triangle", _with_dirs(_grid(others=[0, 1, 2]), lambda c: c["others"] + 2))
def fq_triangle(others: int = 0, dirs: str = "io") -> RuleInstance:
    """Swapping two neighbouring legs equals a Hadamard-linked pair of parity copies."""
    f = [_leg("F", d) for d in dirs]
    c, a, bl = f[:others], f[others], f[others + 1]
    cn = [f"c{j}" for j in range(others)]
    lhs = single(x_spider(*(c + [bl, a])), cn + ["b", "a"], "x")
    r = _spider(x_spider(*(c + [a, bl])), cn + [None, None])
    _through(r, ("x", others), a, "za", z_spider(F_IN, F_OUT, Q_OUT), "a")
    _through(r, ("x", others + 1), bl, "zb", z_spider(F_IN, F_OUT, Q_IN), "b")
    r.add("h", hadamard())
    r.connect(("za", 2), ("h", 0)).connect(("h", 1), ("zb", 2))
    return RuleInstance(lhs, r.build(), math.sqrt(2))


# ── Hopf ──

@_rule("hopf", _with_dirs(
    _grid(u=[0, 1, 2], v=[0, 2], flip=[False, True], alpha=_phases),
    lambda c: c["u"] + c["v"]))
def hopf(u: int = 1, v: int = 0, flip: bool = False, dirs: str = "o",
         alpha: float = 0.0) -> RuleInstance:
    """An X-spider and a Z-spider sharing two nested wires come apart."""
    ul = [_leg("F", d) for d in dirs[:u]]
    vl = [_leg("F", d) for d in dirs[u:]]
    un = [f"u{j}" for j in range(u)]
    vn = [f"v{j}" for j in range(v)]
    xo, zi = (F_IN, F_OUT) if flip else (F_OUT, F_IN)
    z = _amp(alpha)
    b = _spider(x_spider(*ul, xo, xo), un + [None, None], "A")
    _spider(z_spider(zi, zi, *vl, z=z), [None, None] + vn, "B", b)
    # p = A's leg u meets B's leg 1, q = A's leg u+1 meets B's leg 0
    if flip:
        b.connect(("B", 1), ("A", u)).connect(("B", 0), ("A", u + 1))
    else:
        b.connect(("A", u), ("B", 1)).connect(("A", u + 1), ("B", 0))
    r = _spider(x_spider(*ul), un, "x")
    _spider(z_spider(*vl, z=z), vn, "y", r)
    return RuleInstance(b.build(), r.build())


# ── Bialgebra ──

@_rule("bialgebra", _grid(layout=["drawn", "flipped"]))
def bialgebra(layout: str = "drawn") -> RuleInstance:
    """Fermionic XOR followed by a parity copy, versus copies followed by XORs.

    The two crossing wires pair a fermion mode with a qubit, so no
    reordering sign appears.
    """
    b = DiagramBuilder()
    b.add("x", x_spider(F_IN, F_IN, F_OUT))
    b.add("z", z_spider(F_IN, F_OUT, Q_OUT))
    b.connect(("x", 2), ("z", 0))
    b.expose(("x", 0), "a").expose(("x", 1), "b").expose(("z", 1), "c").expose(("z", 2), "q")
    r = DiagramBuilder()
    r.add("za", z_spider(F_IN, F_OUT, Q_OUT))
    r.add("zb", z_spider(F_IN, F_OUT, Q_OUT))
    r.add("x", x_spider(F_IN, F_IN, F_OUT))
    r.add("qx", qubit_x(Q_IN, Q_IN, Q_OUT))
    r.connect(("za", 1), ("x", 0)).connect(("zb", 1), ("x", 1))
    r.connect(("za", 2), ("qx", 0)).connect(("zb", 2), ("qx", 1))
    r.expose(("za", 0), "a").expose(("zb", 0), "b").expose(("x", 2), "c").expose(("qx", 2), "q")
    lhs, rhs = b.build(), r.build()
    if layout == "flipped":
        lhs, rhs = dagger_diagram(lhs), dagger_diagram(rhs)
    return RuleInstance(lhs, rhs, math.sqrt(2))


# ── Qubit ZX ──

def _qubit_fusion(kind: Callable[..., GeneratorSpec], m: int, n: int, dirs: str,
                  alpha: float, beta: float) -> RuleInstance:
    a_free = [_leg("Q", d) for d in dirs[: m - 1]]
    b_free = [_leg("Q", d) for d in dirs[m - 1:]]
    a_names = [f"a{j}" for j in range(m - 1)]
    b_names = [f"b{j}" for j in range(n - 1)]
    b = _spider(kind(Q_IN, *a_free, alpha=alpha), [None] + a_names, "A")
    _spider(kind(*b_free, Q_OUT, alpha=beta), b_names + [None], "B", b)
    b.connect(("B", n - 1), ("A", 0))
    rhs = single(kind(*(b_free + a_free), alpha=alpha + beta), b_names + a_names, "x")
    return RuleInstance(b.build(), rhs)


_QUBIT_FUSION_SPACE = _with_dirs(
    _grid(m=[2, 3], n=[2, 3], alpha=_phases, beta=[0.0, 0.7]), lambda c: c["m"] + c["n"] - 2)


@_rule("qubit-z-fusion", _QUBIT_FUSION_SPACE)
def qubit_z_fusion(m: int = 2, n: int = 2, dirs: str = "io", alpha: float = 0.0,
                   beta: float = 0.0) -> RuleInstance:
    return _qubit_fusion(qubit_z, m, n, dirs, alpha, beta)


@_rule("qubit-x-fusion", _QUBIT_FUSION_SPACE)
def qubit_x_fusion(m: int = 2, n: int = 2, dirs: str = "io", alpha: float = 0.0,
                   beta: float = 0.0) -> RuleInstance:
    return _qubit_fusion(qubit_x, m, n, dirs, alpha, beta)


@_rule("hadamard-pair")
def hadamard_pair() -> RuleInstance:
    b = DiagramBuilder()
    b.add("h1", hadamard())
    b.add("h2", hadamard())
    b.expose(("h1", 0), "a").connect(("h1", 1), ("h2", 0)).expose(("h2", 1), "b")
    return RuleInstance(b.build(), single(identity(Wire.QUBIT), ["a", "b"]))


@_rule("color-change", _with_dirs(_grid(k=[1, 2, 3], alpha=_phases), lambda c: c["k"]))
def color_change(k: int = 2, dirs: str = "io", alpha: float = 0.0) -> RuleInstance:
    legs = [_leg("Q", d) for d in dirs]
    names = [f"l{j}" for j in range(k)]
    b = _spider(qubit_z(*legs, alpha=alpha), [None] * k)
    for j, (leg, name) in enumerate(zip(legs, names)):
        _through(b, ("x", j), leg, f"h{j}", hadamard(), name)
    return RuleInstance(b.build(), single(qubit_x(*legs, alpha=alpha), names, "x"))


@_rule("qubit-pi-commutation", _grid(k=[1, 2], alpha=_phases))
def qubit_pi_commutation(k: int = 1, alpha: float = 0.0) -> RuleInstance:
    """X(π) pushed through Z(α) flips the phase and copies onto every output."""
    b = DiagramBuilder()
    b.add("n", qubit_x(Q_IN, Q_OUT, alpha=math.pi))
    b.add("z", qubit_z(Q_IN, *([Q_OUT] * k), alpha=alpha))
    b.expose(("n", 0), "i").connect(("n", 1), ("z", 0))
    for j in range(k):
        b.expose(("z", j + 1), f"o{j}")
    r = DiagramBuilder()
    r.add("z", qubit_z(Q_IN, *([Q_OUT] * k), alpha=-alpha))
    r.expose(("z", 0), "i")
    for j in range(k):
        _through(r, ("z", j + 1), Q_OUT, f"n{j}", qubit_x(Q_IN, Q_OUT, alpha=math.pi), f"o{j}")
    return RuleInstance(b.build(), r.build(), _amp(alpha))


# ── W tensors ──

@_rule("w-unit")
def w_unit() -> RuleInstance:
    return RuleInstance(single(w_tensor(1), ["y", "x"]), single(identity(), ["y", "x"]))


@_rule("w-commutative")
def w_commutative() -> RuleInstance:
    return RuleInstance(single(w_tensor(2), ["y", "x1", "x2"]),
                        single(w_tensor(2), ["y", "x2", "x1"]))


@_rule("w-exclusion", _grid(n=[2, 3]))
def w_exclusion(n: int = 2) -> RuleInstance:
    """Two outputs of one W tensor never both carry a fermion."""
    b = _spider(w_tensor(n), ["y", None, None] + [f"x{j}" for j in range(2, n)], "w")
    for j in (1, 2):
        b.add(f"e{j}", x_spider(O_IN, F_IN))
        b.connect(("w", j), (f"e{j}", 1))
        b.expose((f"e{j}", 0), f"d{j}")
    lhs = b.build()
    return RuleInstance(lhs, lhs, 0.0)


@_rule("w-associative", _grid(branch=[1, 2]))
def w_associative(branch: int = 1) -> RuleInstance:
    b = _spider(w_tensor(2), ["y"] + [None if j == branch else "x" for j in (1, 2)], "A")
    _spider(w_tensor(2), [None, "w1", "w2"], "B", b)
    b.connect(("A", branch), ("B", 0))
    return RuleInstance(b.build(), single(w_tensor(3), ["y", "x", "w1", "w2"]))


@_rule("w-vacuum", _grid(n=[1, 2, 3]))
def w_vacuum(n: int = 2) -> RuleInstance:
    b = _spider(w_tensor(n), [None] + [f"x{j}" for j in range(n)], "w")
    b.add("v", x_spider(F_OUT))
    b.connect(("v", 0), ("w", 0))
    r = DiagramBuilder()
    for j in range(n):
        _spider(x_spider(F_OUT), [f"x{j}"], f"v{j}", r)
    return RuleInstance(b.build(), r.build())


@_rule("w-phase-commute", _grid(n=[1, 2, 3], alpha=_phases))
def w_phase_commute(n: int = 2, alpha: float = 0.0) -> RuleInstance:
    """The same phase on every W output equals that phase on the input."""
    z = _amp(alpha)
    b = _spider(w_tensor(n), ["y"] + [None] * n, "w")
    for j in range(n):
        _through(b, ("w", j + 1), F_OUT, f"z{j}", z_spider(F_IN, F_OUT, z=z), f"x{j}")
    r = _spider(w_tensor(n), [None] + [f"x{j}" for j in range(n)], "w")
    _through(r, ("w", 0), F_IN, "z", z_spider(F_IN, F_OUT, z=z), "y")
    return RuleInstance(b.build(), r.build())


def _w_loop(z: complex) -> DiagramBuilder:
    """W, a Z(z) on one branch, then the dual W merging both branches."""
    b = DiagramBuilder()
    b.add("w", w_tensor(2))
    b.add("zn", z_spider(F_IN, F_OUT, z=z))
    b.add("wd", w_dual(2))
    b.connect(("w", 1), ("zn", 0)).connect(("zn", 1), ("wd", 1)).connect(("w", 2), ("wd", 2))
    b.expose(("w", 0), "a")
    return b


@_rule("w-loop-phase", _grid(alpha=_phases))
def w_loop_phase(alpha: float = 0.0) -> RuleInstance:
    z = _amp(alpha)
    lhs = _w_loop(z).expose(("wd", 0), "b").build()
    return RuleInstance(lhs, single(z_spider(F_IN, F_OUT, z=1 + z), ["a", "b"]))


@_rule("w-loop-normalized", _grid(alpha=_phases))
def w_loop_normalized(alpha: float = 0.0) -> RuleInstance:
    """The loop followed by ``Z(1/(1+z))`` is a plain wire; ``z = -1`` is a pole."""
    z = _amp(alpha)
    if abs(1 + z) < get_settings().phase_snap:
        raise PoleError(f"1/(1+z) is singular at z = {z:.6g}")
    b = _w_loop(z)
    _through(b, ("wd", 0), F_OUT, "n", z_spider(F_IN, F_OUT, z=1 / (1 + z)), "b")
    return RuleInstance(b.build(), single(identity(), ["a", "b"]))


# ── Catalog ──

def _catalog_path() -> Path:
    return get_settings().catalog_dir / "rules.yaml"


@lru_cache()
def load_checklist(path: str | None = None) -> dict[str, Any]:
    """Equation groups and rule metadata from the YAML checklist."""
    target = Path(path) if path else _catalog_path()
    with open(target, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if "groups" not in data or "rules" not in data:
        raise InputError(f"{target} needs 'groups' and 'rules' sections")
    return data


@lru_cache()
def catalog() -> tuple[RewriteRule, ...]:
    """Every rule, in checklist order, with its group and undrawn cells attached."""
    meta = load_checklist()["rules"]
    rules = []
    for name, info in meta.items():
        if name not in _BUILDERS:
            raise InputError(f"checklist names rule {name!r} with no builder")
        build, space = _BUILDERS[name]
        info = info or {}
        rules.append(RewriteRule(
            name=name, build=build, space=space, group=info.get("group", ""),
            undrawn=tuple(info.get("undrawn", []) or ()),
        ))
    missing = set(_BUILDERS) - set(meta)
    if missing:
        raise InputError(f"rules missing from the checklist: {sorted(missing)}")
    return tuple(rules)


def get_rule(name: str) -> RewriteRule:
    for rule in catalog():
        if rule.name == name:
            return rule
    raise InputError(f"unknown rule {name!r}")


# ── Verification ──

def _clean_params(params: dict[str, Any]) -> dict[str, Any]:
    return {k: (float(v) if isinstance(v, float) else v) for k, v in params.items()}


def verify_rule(rule: RewriteRule, params: dict[str, Any] | None = None,
                tol: float | None = None, rng: np.random.Generator | None = None) -> VerificationRecord:
    """Evaluate both sides of one cell and compare ``lhs`` with ``scalar * rhs``."""
    params = dict(params or {})
    record = VerificationRecord(rule=rule.name, group=rule.group, params=_clean_params(params))
    if not rule.is_drawn(params):
        logger.warning("Skipping %s %s: orientation not drawn", rule.name, params)
        record.skipped, record.reason = True, "orientation not drawn"
        return record
    start = time.perf_counter()
    try:
        inst = rule.instantiate(**params)
        order = "random" if rng is not None else "greedy"
        lhs = evaluate(inst.lhs, order=order, rng=rng)
        rhs = evaluate(inst.rhs)
    except PoleError as exc:
        logger.warning("Skipping %s %s: %s", rule.name, params, exc)
        record.skipped, record.reason = True, f"pole: {exc}"
        return record
    except CapacityError as exc:
        logger.warning("Skipping %s %s: %s", rule.name, params, exc)
        record.skipped, record.reason = True, f"capacity: {exc}"
        return record
    report = approx_equal(lhs, rhs, scalar=inst.scalar, tol=tol)
    record.max_dev = report.max_dev
    record.passed = report.equal
    record.elapsed_ms = (time.perf_counter() - start) * 1000
    if not report.equal:
        record.reason = f"max deviation {report.max_dev:.3g} at {report.worst_index}"
        logger.debug("Rule %s failed at %s: %s", rule.name, params, record.reason)
    return record


@dataclass
class SweepPlan:
    """Which cells a sweep visits."""
    max_fermion_legs: int = 4
    max_qubit_legs: int = 4
    phases: list[float] = field(default_factory=list)
    seed: int = 0
    rules: list[str] | None = None


def _within_limits(rule: RewriteRule, params: dict[str, Any], plan: SweepPlan) -> bool:
    """Drop cells whose leg counts exceed the sweep's per-side limit."""
    limit = plan.max_qubit_legs if rule.group == "qubit-zx" else plan.max_fermion_legs
    counts = [v for k, v in params.items() if isinstance(v, int) and not isinstance(v, bool)
              and k not in ("at", "branch")]
    return all(c <= limit for c in counts) and len(params.get("dirs", "")) <= 2 * limit


def sweep_verify(max_fermion_legs: int | None = None, max_qubit_legs: int | None = None,
                 phases: list[float] | None = None, seed: int | None = None,
                 rules: list[str] | None = None, threads: int | None = None,
                 tol: float | None = None) -> list[VerificationRecord]:
    """Verify every cell of every selected rule; records come back sorted."""
    settings = get_settings()
    plan = SweepPlan(
        max_fermion_legs=max_fermion_legs or settings.max_arity,
        max_qubit_legs=max_qubit_legs or settings.max_arity,
        phases=list(phases) if phases is not None else list(settings.phase_samples),
        seed=settings.seed if seed is None else seed,
        rules=rules,
    )
    swept = settings.model_copy(update={"phase_samples": plan.phases})
    jobs: list[tuple[RewriteRule, dict[str, Any]]] = []
    for rule in catalog():
        if plan.rules and rule.name not in plan.rules:
            continue
        for params in rule.cells(swept):
            if _within_limits(rule, params, plan):
                jobs.append((rule, params))
    logger.info("Sweeping %d cells over %d rules", len(jobs), len({r.name for r, _ in jobs}))

    def run(job: tuple[int, tuple[RewriteRule, dict[str, Any]]]) -> VerificationRecord:
        index, (rule, params) = job
        rng = np.random.default_rng(plan.seed + index)
        return verify_rule(rule, params, tol=tol, rng=rng)

    workers = max(1, threads or settings.threads)
    if workers == 1:
        records = [run(job) for job in enumerate(jobs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, enumerate(jobs)))
    records.sort(key=lambda r: (r.rule, repr(sorted(r.params.items()))))
    failed = sum(1 for r in records if not r.passed and not r.skipped)
    logger.info("Sweep done: %d cells, %d failed, %d skipped",
                len(records), failed, sum(1 for r in records if r.skipped))
    return records
