"""Rewriter — apply catalog rules at match sites and simplify diagrams.

``apply_rule`` replaces the image of a rule's left side by its right side
and hands back the rule scalar, so ``evaluate(old) == s * evaluate(new)``.
``simplify`` runs a fixed set of local passes to a fixpoint, multiplying
their scalars together.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Union

import networkx as nx
from networkx.algorithms import isomorphism

from src.calculus.diagram import BoundaryLeg, Diagram, Port, evaluate
from src.calculus.generators import (
    Direction,
    GeneratorSpec,
    Kind,
    Leg,
    Wire,
    identity,
    parity_dot,
)
from src.calculus.rules import get_rule
from src.config import get_settings
from src.core.errors import CapacityError, EmbeddingError

logger = logging.getLogger(__name__)


@dataclass
class MatchSite:
    """Where a rule's left side sits in a host: ``node_map`` sends lhs node ids to host ids."""
    rule: str
    params: dict[str, Any] = field(default_factory=dict)
    node_map: dict[str, str] = field(default_factory=dict)


class RewriteStats:
    """Count of rewrites per pass."""

    def __init__(self) -> None:
        self.num_rewrites: Counter[str] = Counter()

    def count(self, name: str, n: int = 1) -> None:
        self.num_rewrites[name] += n

    @property
    def total(self) -> int:
        return sum(self.num_rewrites.values())

    def __str__(self) -> str:
        lines = [f"{n:>6} {name}" for name, n in sorted(self.num_rewrites.items())]
        lines.append(f"{self.total:>6} TOTAL")
        return "\n".join(lines)


# ── Mutable working copy ──

# the far side of a port: another port, or a boundary slot index
_End = Union[Port, int]


class _Work:
    def __init__(self, d: Diagram) -> None:
        self.nodes: dict[str, GeneratorSpec] = dict(d.nodes)
        self.edges: list[tuple[Port, Port]] = list(d.edges)
        self.slots: list[BoundaryLeg | None] = list(d.boundary)
        self.names: list[str] = [b.name for b in d.boundary]

    def freeze(self) -> Diagram:
        if any(s is None for s in self.slots):
            raise EmbeddingError("a boundary leg was left unattached")
        return Diagram(dict(self.nodes), tuple(self.edges), tuple(self.slots))

    def fresh(self, base: str) -> str:
        node_id = base
        while node_id in self.nodes:
            node_id += "'"
        return node_id

    def end_of(self, port: Port) -> _End:
        for p, q in self.edges:
            if p == port:
                return q
            if q == port:
                return p
        for k, slot in enumerate(self.slots):
            if slot is not None and slot.port == port:
                return k
        raise EmbeddingError(f"port {port} is neither connected nor on the boundary")

    def detach(self, port: Port) -> _End:
        end = self.end_of(port)
        if isinstance(end, int):
            self.slots[end] = None
        else:
            self.edges = [e for e in self.edges if port not in e]
        return end

    def attach(self, end: _End, port: Port) -> None:
        if isinstance(end, int):
            self.slots[end] = BoundaryLeg(port, self.names[end])
        else:
            self.edges.append((end, port))

    def join(self, a: _End, b: _End) -> bool:
        """Connect two loose ends; two boundary slots cannot be joined without a node."""
        if isinstance(a, int) and isinstance(b, int):
            return False
        if isinstance(a, int):
            a, b = b, a
        self.attach(b, a)
        return True

    def remove(self, node_id: str) -> None:
        del self.nodes[node_id]
        self.edges = [(p, q) for p, q in self.edges if node_id not in (p.node, q.node)]
        self.slots = [None if s is not None and s.port.node == node_id else s for s in self.slots]

    def reshape(self, node_id: str, spec: GeneratorSpec, order: list[int]) -> None:
        """Replace a node by ``spec`` whose leg ``k`` is the old leg ``order[k]``."""
        new_pos = {old: k for k, old in enumerate(order)}

        def move(port: Port) -> Port:
            return Port(node_id, new_pos[port.leg]) if port.node == node_id else port

        self.nodes[node_id] = spec
        self.edges = [(move(p), move(q)) for p, q in self.edges]
        self.slots = [None if s is None else BoundaryLeg(move(s.port), s.name) for s in self.slots]

    def insert(self, port: Port, spec: GeneratorSpec, base: str) -> str:
        """Put a two-leg ``[In, Out]`` node on the wire leaving ``port``."""
        node_id = self.fresh(base)
        end = self.detach(port)
        self.nodes[node_id] = spec
        if self.nodes[port.node].legs[port.leg].direction is Direction.OUT:
            self.edges.append((port, Port(node_id, 0)))
            self.attach(end, Port(node_id, 1))
        else:
            self.attach(end, Port(node_id, 0))
            self.edges.append((Port(node_id, 1), port))
        return node_id

    def neighbours(self, node_id: str) -> list[tuple[Port, Port]]:
        """(own port, other port) for every edge at ``node_id``."""
        found = []
        for p, q in self.edges:
            if p.node == node_id:
                found.append((p, q))
            if q.node == node_id:
                found.append((q, p))
        return found


# ── Phases ──

def _snap(z: complex) -> complex:
    eps = get_settings().phase_snap
    for target in (1.0, -1.0, 0.0):
        if abs(z - target) < eps:
            return complex(target)
    return complex(z)


def _reduce_phase(alpha: complex | None) -> complex:
    """Qubit phase in (-π, π], snapped onto 0 and π."""
    eps = get_settings().phase_snap
    a = math.remainder(complex(alpha or 0).real, 2 * math.pi)
    if abs(a) < eps:
        return 0j
    if abs(abs(a) - math.pi) < eps:
        return complex(math.pi)
    return complex(a)


def _close(a: complex | None, b: complex | None) -> bool:
    if a is None or b is None:
        return a is b
    return abs(complex(a) - complex(b)) <= get_settings().tolerance


def _z_param(spec: GeneratorSpec) -> complex:
    return 1.0 if spec.param is None else complex(spec.param)


def _permute_z(spec: GeneratorSpec, order: list[int]) -> GeneratorSpec:
    """Reorder Z legs; each inverted fermion pair flips the amplitude."""
    fermions = [k for k in order if spec.legs[k].wire is Wire.FERMION]
    inversions = sum(1 for i in range(len(fermions)) for j in range(i + 1, len(fermions))
                     if fermions[i] > fermions[j])
    z = _z_param(spec) * (-1) ** inversions
    return GeneratorSpec(Kind.Z_SPIDER, tuple(spec.legs[k] for k in order), _snap(z))


# ── Embedding ──

def _same_spec(a: GeneratorSpec, b: GeneratorSpec) -> bool:
    if a.kind is not b.kind or a.legs != b.legs:
        return False
    if a.kind is Kind.RAW:
        return a.tensor is b.tensor
    return _close(a.param, b.param)


def _check_embedding(host: Diagram, lhs: Diagram, node_map: dict[str, str]) -> None:
    if set(node_map) != set(lhs.nodes):
        raise EmbeddingError(f"site maps {sorted(node_map)}, rule has {sorted(lhs.nodes)}")
    if len(set(node_map.values())) != len(node_map):
        raise EmbeddingError("site map is not injective")
    for l_id, h_id in node_map.items():
        if h_id not in host.nodes:
            raise EmbeddingError(f"host has no node {h_id!r}")
        if not _same_spec(lhs.nodes[l_id], host.nodes[h_id]):
            raise EmbeddingError(
                f"{l_id!r} is {lhs.nodes[l_id].label()}, host {h_id!r} is {host.nodes[h_id].label()}")

    def image(port: Port) -> Port:
        return Port(node_map[port.node], port.leg)

    remaining = Counter(frozenset((p, q)) for p, q in host.edges)
    for p, q in lhs.edges:
        key = frozenset((image(p), image(q)))
        if remaining[key] <= 0:
            raise EmbeddingError(f"host lacks the edge {image(p)} - {image(q)}")
        remaining[key] -= 1
    inner = set(node_map.values())
    open_ports = {image(b.port) for b in lhs.boundary}
    for key, n in remaining.items():
        if n <= 0:
            continue
        for port in key:
            if port.node in inner and port not in open_ports:
                raise EmbeddingError(f"host port {port} carries an edge the rule does not have")
    for b in host.boundary:
        if b.port.node in inner and b.port not in open_ports:
            raise EmbeddingError(f"host boundary leg {b.name!r} sits on an inner rule port")


def apply_rule(host: Diagram, site: MatchSite) -> tuple[Diagram, complex]:
    """Replace the image of the rule's left side by its right side."""
    rule = get_rule(site.rule)
    inst = rule.instantiate(**site.params)
    _check_embedding(host, inst.lhs, site.node_map)
    work = _Work(host)

    def image(port: Port) -> Port:
        return Port(site.node_map[port.node], port.leg)

    name_of_image = {image(b.port): b.name for b in inst.lhs.boundary}
    ends: dict[str, _End | str] = {}
    for b in inst.lhs.boundary:
        end = work.end_of(image(b.port))
        ends[b.name] = name_of_image.get(end, end) if isinstance(end, Port) else end
    for h_id in site.node_map.values():
        work.remove(h_id)

    ids = {r_id: work.fresh(r_id) for r_id in inst.rhs.nodes}
    for r_id, spec in inst.rhs.nodes.items():
        work.nodes[ids[r_id]] = spec

    def placed(port: Port) -> Port:
        return Port(ids[port.node], port.leg)

    for p, q in inst.rhs.edges:
        work.edges.append((placed(p), placed(q)))
    rhs_port = {b.name: placed(b.port) for b in inst.rhs.boundary}
    done: set[str] = set()
    for name, end in ends.items():
        if name in done:
            continue
        if isinstance(end, str):
            # two open legs of the rule joined to each other in the host
            work.edges.append((rhs_port[name], rhs_port[end]))
            done.update((name, end))
        else:
            work.attach(end, rhs_port[name])
            done.add(name)
    logger.debug("Applied %s at %s with scalar %s", site.rule, site.node_map, inst.scalar)
    return work.freeze(), complex(inst.scalar)


def find_sites(host: Diagram, rule_name: str,
               params: dict[str, Any] | None = None) -> list[MatchSite]:
    """Every valid embedding of the rule's left side, over one cell or the whole space."""
    rule = get_rule(rule_name)
    cells = [params] if params is not None else rule.cells()
    host_graph = host.graph()
    sites: list[MatchSite] = []
    seen: set[tuple] = set()
    for cell in cells:
        if not rule.is_drawn(cell):
            continue
        lhs = rule.instantiate(**cell).lhs
        if not lhs.nodes:
            continue
        matcher = isomorphism.MultiGraphMatcher(
            host_graph, lhs.graph(),
            node_match=lambda a, b: _same_spec(a["spec"], b["spec"]),
        )
        for mapping in matcher.subgraph_monomorphisms_iter():
            node_map = {l_id: h_id for h_id, l_id in mapping.items()}
            key = (repr(sorted(cell.items())), tuple(sorted(node_map.items())))
            if key in seen:
                continue
            try:
                _check_embedding(host, lhs, node_map)
            except EmbeddingError:
                continue
            seen.add(key)
            sites.append(MatchSite(rule_name, dict(cell), node_map))
    logger.debug("Found %d sites for %s", len(sites), rule_name)
    return sites


# ── Simplification passes ──

def _is_plain_wire(spec: GeneratorSpec) -> bool:
    """Two-leg node equal to the identity with legs ``[In, Out]``."""
    legs = spec.legs
    if len(legs) != 2 or legs[0].direction is not Direction.IN \
            or legs[1].direction is not Direction.OUT or legs[0].wire is not legs[1].wire:
        return False
    if spec.kind in (Kind.IDENTITY, Kind.X_SPIDER):
        return True
    if spec.kind is Kind.Z_SPIDER:
        return _close(_z_param(spec), 1.0)
    if spec.kind in (Kind.QUBIT_Z, Kind.QUBIT_X):
        return _reduce_phase(spec.param) == 0
    return False


def _normalize_two_leg(work: _Work, scalar: complex) -> tuple[bool, complex]:
    """Bring two-leg spiders with legs ``[Out, In]`` to ``[In, Out]`` form."""
    for node_id, spec in list(work.nodes.items()):
        legs = spec.legs
        if len(legs) != 2 or legs[0].wire is not legs[1].wire:
            continue
        if (legs[0].direction, legs[1].direction) != (Direction.OUT, Direction.IN):
            continue
        wire = legs[0].wire
        if spec.kind is Kind.X_SPIDER and wire is Wire.FERMION:
            work.reshape(node_id, parity_dot(), [1, 0])
            return True, scalar
        if spec.kind is Kind.X_SPIDER and wire is Wire.ODD:
            work.reshape(node_id, identity(Wire.ODD), [1, 0])
            return True, -scalar
        if spec.kind is Kind.Z_SPIDER:
            work.reshape(node_id, _permute_z(spec, [1, 0]), [1, 0])
            return True, scalar
        if spec.kind in (Kind.QUBIT_Z, Kind.QUBIT_X):
            work.reshape(node_id, GeneratorSpec(spec.kind, (legs[1], legs[0]), spec.param), [1, 0])
            return True, scalar
    return False, scalar


def _splice_wires(work: _Work, stats: RewriteStats) -> bool:
    for node_id, spec in list(work.nodes.items()):
        if not _is_plain_wire(spec):
            continue
        a, b = work.end_of(Port(node_id, 0)), work.end_of(Port(node_id, 1))
        if isinstance(a, Port) and a.node == node_id:
            continue
        if isinstance(a, int) and isinstance(b, int):
            continue
        work.remove(node_id)
        work.join(a, b)
        stats.count("wire")
        return True
    return False


def _cancel_pairs(work: _Work, stats: RewriteStats) -> bool:
    """Two parity dots or two Hadamards in a row cancel."""
    for node_id, spec in list(work.nodes.items()):
        if spec.kind not in (Kind.PARITY, Kind.HADAMARD):
            continue
        nxt = work.end_of(Port(node_id, 1))
        if not isinstance(nxt, Port) or nxt.node == node_id or nxt.leg != 0:
            continue
        if work.nodes[nxt.node].kind is not spec.kind:
            continue
        a = work.end_of(Port(node_id, 0))
        b = work.end_of(Port(nxt.node, 1))
        if isinstance(a, int) and isinstance(b, int):
            continue
        if a == Port(nxt.node, 1):
            continue
        work.remove(node_id)
        work.remove(nxt.node)
        work.join(a, b)
        stats.count("pair")
        return True
    return False


def _absorb_dots(work: _Work, stats: RewriteStats) -> bool:
    """A parity dot next to a Z-spider flips the Z amplitude."""
    for node_id, spec in list(work.nodes.items()):
        if spec.kind is not Kind.PARITY:
            continue
        for leg in (0, 1):
            end = work.end_of(Port(node_id, leg))
            if not isinstance(end, Port) or end.node == node_id:
                continue
            target = work.nodes[end.node]
            if target.kind is not Kind.Z_SPIDER:
                continue
            other = work.end_of(Port(node_id, 1 - leg))
            work.remove(node_id)
            work.attach(other, end)
            work.nodes[end.node] = GeneratorSpec(
                Kind.Z_SPIDER, target.legs, _snap(-_z_param(target)))
            stats.count("dot")
            return True
    return False


def _rotation(n: int, first: int) -> list[int]:
    return [(first + k) % n for k in range(n)]


def _fuse_z(work: _Work, stats: RewriteStats) -> bool:
    for p, q in list(work.edges):
        if p.node == q.node:
            continue
        sp, sq = work.nodes[p.node], work.nodes[q.node]
        if sp.kind is not Kind.Z_SPIDER or sq.kind is not Kind.Z_SPIDER:
            continue
        a_port, b_port = (p, q) if sp.legs[p.leg].direction is Direction.IN else (q, p)
        a_id, b_id = a_port.node, b_port.node
        a_order = _rotation(work.nodes[a_id].arity, a_port.leg)
        b_order = _rotation(work.nodes[b_id].arity, b_port.leg + 1)
        work.reshape(a_id, _permute_z(work.nodes[a_id], a_order), a_order)
        work.reshape(b_id, _permute_z(work.nodes[b_id], b_order), b_order)
        _fuse(work, a_id, b_id, Kind.Z_SPIDER,
              _snap(_z_param(work.nodes[a_id]) * _z_param(work.nodes[b_id])))
        stats.count("z-fusion")
        return True
    return False


def _fuse_x(work: _Work, stats: RewriteStats) -> bool:
    """Fuse X-spiders over a fermion wire, rotating ticks into place with parity dots."""
    for p, q in list(work.edges):
        if p.node == q.node:
            continue
        sp, sq = work.nodes[p.node], work.nodes[q.node]
        if sp.kind is not Kind.X_SPIDER or sq.kind is not Kind.X_SPIDER:
            continue
        if sp.legs[p.leg].wire is not Wire.FERMION:
            continue
        a_port, b_port = (p, q) if sp.legs[p.leg].direction is Direction.IN else (q, p)
        a, b = work.nodes[a_port.node], work.nodes[b_port.node]
        a_moved = list(range(a_port.leg))
        b_moved = list(range(b_port.leg + 1, b.arity))
        if any(a.legs[k].wire is not Wire.FERMION for k in a_moved) or \
                any(b.legs[k].wire is not Wire.FERMION for k in b_moved):
            continue
        a_order = _rotation(a.arity, a_port.leg)
        b_order = _rotation(b.arity, b_port.leg + 1)
        work.reshape(a_port.node, GeneratorSpec(Kind.X_SPIDER, tuple(a.legs[k] for k in a_order)), a_order)
        work.reshape(b_port.node, GeneratorSpec(Kind.X_SPIDER, tuple(b.legs[k] for k in b_order)), b_order)
        for k in a_moved:
            work.insert(Port(a_port.node, a_order.index(k)), parity_dot(), "dot")
        for k in b_moved:
            work.insert(Port(b_port.node, b_order.index(k)), parity_dot(), "dot")
        _fuse(work, a_port.node, b_port.node, Kind.X_SPIDER, None)
        stats.count("x-fusion")
        return True
    return False


def _fuse(work: _Work, a_id: str, b_id: str, kind: Kind, param: complex | None) -> None:
    """Fuse ``a`` (joined at its first leg) with ``b`` (joined at its last leg) into ``a``."""
    a, b = work.nodes[a_id], work.nodes[b_id]
    joined = (Port(b_id, b.arity - 1), Port(a_id, 0))
    if joined not in work.edges:
        joined = (joined[1], joined[0])
    work.edges.remove(joined)
    legs = b.legs[:-1] + a.legs[1:]
    offset = b.arity - 1

    def move(port: Port) -> Port:
        if port.node == b_id:
            return Port(a_id, port.leg)
        if port.node == a_id:
            return Port(a_id, offset + port.leg - 1)
        return port

    del work.nodes[b_id]
    work.nodes[a_id] = GeneratorSpec(kind, legs, param)
    work.edges = [(move(p), move(q)) for p, q in work.edges]
    work.slots = [None if s is None else BoundaryLeg(move(s.port), s.name) for s in work.slots]


_X_LOOP = {(Wire.FERMION, True): 2.0, (Wire.FERMION, False): 0.0,
           (Wire.ODD, True): 1.0, (Wire.ODD, False): -1.0}


def _self_loops(work: _Work, stats: RewriteStats) -> complex | None:
    """Remove a wire from a spider to itself; returns the scalar, or None if nothing fired."""
    for p, q in list(work.edges):
        if p.node != q.node:
            continue
        node_id, spec = p.node, work.nodes[p.node]
        out_port, in_port = (p, q) if spec.legs[p.leg].direction is Direction.OUT else (q, p)
        i, j = out_port.leg, in_port.leg
        wire = spec.legs[i].wire
        keep = [k for k in range(spec.arity) if k not in (i, j)]
        if spec.kind is Kind.X_SPIDER and abs(i - j) == 1 and wire in (Wire.FERMION, Wire.ODD):
            scalar = _X_LOOP[(wire, j == i + 1)]
            new_spec = GeneratorSpec(Kind.X_SPIDER, tuple(spec.legs[k] for k in keep))
        elif spec.kind is Kind.Z_SPIDER:
            # legs [out, in, rest...] make a clean loop
            moved = _permute_z(spec, [i, j] + keep)
            scalar = 1.0
            new_spec = GeneratorSpec(Kind.Z_SPIDER, moved.legs[2:], moved.param)
        else:
            continue
        work.edges.remove((p, q))
        work.reshape(node_id, new_spec, keep)
        stats.count("self-loop")
        return scalar
    return None


def _drop_closed(work: _Work, stats: RewriteStats) -> complex | None:
    """Evaluate a component with no boundary legs into a scalar."""
    graph = nx.MultiGraph()
    graph.add_nodes_from(work.nodes)
    graph.add_edges_from((p.node, q.node) for p, q in work.edges)
    open_nodes = {s.port.node for s in work.slots if s is not None}
    for component in nx.connected_components(graph):
        if component & open_nodes:
            continue
        sub = Diagram(
            {n: work.nodes[n] for n in component},
            tuple(e for e in work.edges if e[0].node in component),
            (),
        )
        try:
            value = complex(evaluate(sub).data.reshape(()))
        except CapacityError:
            continue
        for node_id in component:
            work.remove(node_id)
        stats.count("scalar")
        return value
    return None


def simplify(host: Diagram, stats: RewriteStats | None = None) -> tuple[Diagram, complex]:
    """Run the local passes to a fixpoint; ``evaluate(host) == s * evaluate(result)``.

    Every pass removes a node, a wire or a parity dot, except the two-leg
    normalization, which changes a node kind at most once.
    """
    stats = stats if stats is not None else RewriteStats()
    work = _Work(host)
    for node_id, spec in work.nodes.items():
        if spec.kind in (Kind.QUBIT_Z, Kind.QUBIT_X):
            work.nodes[node_id] = GeneratorSpec(spec.kind, spec.legs, _reduce_phase(spec.param))
    scalar: complex = 1.0
    while True:
        changed, scalar = _normalize_two_leg(work, scalar)
        if changed:
            continue
        if _splice_wires(work, stats) or _cancel_pairs(work, stats) or _absorb_dots(work, stats):
            continue
        loop = _self_loops(work, stats)
        if loop is not None:
            scalar *= loop
            if loop == 0:
                break
            continue
        if _fuse_z(work, stats) or _fuse_x(work, stats):
            continue
        value = _drop_closed(work, stats)
        if value is not None:
            scalar *= value
            continue
        break
    logger.debug("Simplified %d -> %d nodes after %d rewrites", len(host.nodes), len(work.nodes), stats.total)
    return work.freeze(), _snap(scalar)
