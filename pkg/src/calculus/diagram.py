"""Diagrams — open tensor networks over generator nodes.

A diagram is a list of nodes, a list of contracted port pairs and an ordered
boundary of open ports, each with an external name. Nothing geometric is
stored: two drawings with the same edge list are the same diagram.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from src.calculus.generators import (
    GeneratorSpec,
    Kind,
    Leg,
    Wire,
    dagger_spec,
    make_tensor,
)
from src.config import get_settings
from src.core.errors import CapacityError, DirectionError, InputError, SignatureError, WireTypeError
from src.core.graded import (
    Direction,
    GradedTensor,
    IndexSpec,
    contract,
    contract_between,
    operator_matrix,
    permute,
    rename,
    scalar_tensor,
    tensor_product,
)
from src.core.models import (
    ComplexValue,
    DiagramDocument,
    LegDocument,
    NodeDocument,
    RawTensorDocument,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Port:
    node: str
    leg: int

    def __str__(self) -> str:
        return f"{self.node}:{self.leg}"


@dataclass(frozen=True)
class BoundaryLeg:
    port: Port
    name: str


@dataclass(frozen=True)
class DiagramIssue:
    kind: str
    message: str


@dataclass(frozen=True)
class Diagram:
    """Immutable open diagram; build one with :class:`DiagramBuilder`."""
    nodes: dict[str, GeneratorSpec] = field(default_factory=dict)
    edges: tuple[tuple[Port, Port], ...] = ()
    boundary: tuple[BoundaryLeg, ...] = ()

    def leg(self, port: Port) -> Leg:
        return self.nodes[port.node].legs[port.leg]

    @property
    def boundary_names(self) -> list[str]:
        return [b.name for b in self.boundary]

    def boundary_leg(self, name: str) -> BoundaryLeg:
        for b in self.boundary:
            if b.name == name:
                return b
        raise SignatureError(f"no boundary leg named {name!r}")

    def signature(self) -> dict[str, Leg]:
        return {b.name: self.leg(b.port) for b in self.boundary}

    def node_count(self) -> int:
        return len(self.nodes)

    def open_odd_legs(self) -> list[str]:
        return [b.name for b in self.boundary if self.leg(b.port).wire is Wire.ODD]

    def graph(self) -> nx.MultiGraph:
        """Adjacency view; edge data ``ports`` holds the two joined ports."""
        g = nx.MultiGraph()
        for node_id, spec in self.nodes.items():
            g.add_node(node_id, spec=spec)
        for p, q in self.edges:
            g.add_edge(p.node, q.node, ports=(p, q))
        return g


class DiagramBuilder:
    """Incremental construction of a :class:`Diagram`."""

    def __init__(self) -> None:
        self._nodes: dict[str, GeneratorSpec] = {}
        self._edges: list[tuple[Port, Port]] = []
        self._boundary: list[BoundaryLeg] = []

    def add(self, node_id: str, spec: GeneratorSpec) -> str:
        if node_id in self._nodes:
            raise SignatureError(f"node id {node_id!r} already used")
        self._nodes[node_id] = spec
        return node_id

    def connect(self, a: tuple[str, int], b: tuple[str, int]) -> "DiagramBuilder":
        self._edges.append((Port(*a), Port(*b)))
        return self

    def expose(self, port: tuple[str, int], name: str | None = None) -> "DiagramBuilder":
        name = name if name is not None else f"b{len(self._boundary)}"
        self._boundary.append(BoundaryLeg(Port(*port), name))
        return self

    def build(self) -> Diagram:
        return Diagram(dict(self._nodes), tuple(self._edges), tuple(self._boundary))


def single(spec: GeneratorSpec, names: Sequence[str] | None = None,
           node_id: str = "n0") -> Diagram:
    """One-node diagram with every leg on the boundary."""
    builder = DiagramBuilder()
    builder.add(node_id, spec)
    for pos in range(spec.arity):
        builder.expose((node_id, pos), None if names is None else names[pos])
    return builder.build()


# ── Validation ──

def validate(d: Diagram) -> list[DiagramIssue]:
    """Problems with ``d``; an empty list means the diagram is well formed."""
    issues: list[DiagramIssue] = []
    uses: dict[Port, int] = {}

    def check_port(port: Port, where: str) -> bool:
        spec = d.nodes.get(port.node)
        if spec is None:
            issues.append(DiagramIssue("unknown-node", f"{where} refers to unknown node {port.node!r}"))
            return False
        if not 0 <= port.leg < spec.arity:
            issues.append(DiagramIssue("bad-leg", f"{where} refers to missing leg {port}"))
            return False
        uses[port] = uses.get(port, 0) + 1
        return True

    for p, q in d.edges:
        if not (check_port(p, "edge") & check_port(q, "edge")):
            continue
        lp, lq = d.leg(p), d.leg(q)
        if lp.wire is not lq.wire:
            issues.append(DiagramIssue(
                "wire-mismatch", f"edge {p}-{q} joins {lp.wire.name} to {lq.wire.name}"))
        if lp.direction is lq.direction:
            issues.append(DiagramIssue(
                "direction", f"edge {p}-{q} joins two {lp.direction.value} legs"))
    names: set[str] = set()
    for b in d.boundary:
        check_port(b.port, "boundary")
        if b.name in names:
            issues.append(DiagramIssue("duplicate-name", f"boundary name {b.name!r} repeats"))
        names.add(b.name)
    for port, count in uses.items():
        if count > 1:
            issues.append(DiagramIssue("duplicate-port", f"port {port} is used {count} times"))
    for node_id, spec in d.nodes.items():
        for leg in range(spec.arity):
            if Port(node_id, leg) not in uses:
                issues.append(DiagramIssue("dangling", f"port {node_id}:{leg} is neither contracted nor open"))
    return issues


def _require_valid(d: Diagram) -> None:
    issues = validate(d)
    if issues:
        raise SignatureError("invalid diagram: " + "; ".join(i.message for i in issues))


# ── Evaluation ──

def _oriented(d: Diagram, p: Port, q: Port) -> tuple[Port, Port]:
    return (p, q) if d.leg(p).direction is Direction.OUT else (q, p)


def evaluate(d: Diagram, order: str = "greedy", rng: np.random.Generator | None = None,
             max_legs: int | None = None) -> GradedTensor:
    """Contract every edge and return the tensor on the boundary names, in boundary order.

    ``order="greedy"`` always contracts the edge whose result has the fewest
    legs; ``order="random"`` contracts edges in a random order.
    """
    _require_valid(d)
    limit = get_settings().max_legs if max_legs is None else max_legs
    if len(d.boundary) > limit:
        raise CapacityError(f"{len(d.boundary)} open legs exceed the limit of {limit}")
    if order not in ("greedy", "random"):
        raise InputError(f"unknown contraction order {order!r}")
    if order == "random" and rng is None:
        rng = np.random.default_rng(get_settings().seed)

    parts: dict[str, GradedTensor] = {}
    owner: dict[str, str] = {}
    for node_id, spec in d.nodes.items():
        tensor = make_tensor(spec)
        parts[node_id] = rename(tensor, {pos: (node_id, pos) for pos in range(spec.arity)})
        owner[node_id] = node_id

    pending = [_oriented(d, p, q) for p, q in d.edges]
    steps = 0
    while pending:
        if order == "greedy":
            pick = min(range(len(pending)), key=lambda k: _edge_cost(pending[k], parts, owner))
        else:
            pick = int(rng.integers(len(pending)))
        out_port, in_port = pending[pick]
        ca, cb = owner[out_port.node], owner[in_port.node]
        if ca == cb:
            parts[ca] = contract(parts[ca], _pid(out_port), _pid(in_port))
            pending.pop(pick)
        else:
            if order == "greedy":
                chosen = [e for e in pending if {owner[e[0].node], owner[e[1].node]} == {ca, cb}]
            else:
                chosen = [pending[pick]]
            pairs = []
            for e_out, e_in in chosen:
                first, second = (e_out, e_in) if owner[e_out.node] == ca else (e_in, e_out)
                pairs.append((_pid(first), _pid(second)))
            parts[ca] = contract_between(parts[ca], parts[cb], pairs)
            del parts[cb]
            for node_id, comp in owner.items():
                if comp == cb:
                    owner[node_id] = ca
            pending = [e for e in pending if e not in chosen]
        steps += 1
    logger.debug("Evaluated %d nodes in %d contraction steps (%s)", len(d.nodes), steps, order)

    result = scalar_tensor(1.0)
    for comp in sorted(parts):
        result = tensor_product(result, parts[comp])
    ids = [_pid(b.port) for b in d.boundary]
    result = permute(result, ids)
    return rename(result, {_pid(b.port): b.name for b in d.boundary})


def _pid(port: Port) -> tuple[str, int]:
    return (port.node, port.leg)


def _edge_cost(edge: tuple[Port, Port], parts: dict[str, GradedTensor],
               owner: dict[str, str]) -> int:
    ca, cb = owner[edge[0].node], owner[edge[1].node]
    if ca == cb:
        return parts[ca].arity - 2
    return parts[ca].arity + parts[cb].arity - 2


def operator_of(d: Diagram, out_names: Sequence[str], in_names: Sequence[str]) -> np.ndarray:
    """Evaluate ``d`` straight to a matrix in the canonical operator layout."""
    return operator_matrix(evaluate(d), list(out_names), list(in_names))


# ── Structural operations ──

def relabel(d: Diagram, mapping: dict[str, str]) -> Diagram:
    """Rename node ids; boundary names are untouched."""
    new_ids = [mapping.get(n, n) for n in d.nodes]
    if len(set(new_ids)) != len(new_ids):
        raise SignatureError("relabelling merges node ids")

    def move(port: Port) -> Port:
        return Port(mapping.get(port.node, port.node), port.leg)

    return Diagram(
        {mapping.get(n, n): spec for n, spec in d.nodes.items()},
        tuple((move(p), move(q)) for p, q in d.edges),
        tuple(BoundaryLeg(move(b.port), b.name) for b in d.boundary),
    )


def rename_boundary(d: Diagram, mapping: dict[str, str]) -> Diagram:
    return Diagram(
        dict(d.nodes), d.edges,
        tuple(BoundaryLeg(b.port, mapping.get(b.name, b.name)) for b in d.boundary),
    )


def _fresh_ids(taken: Iterable[str], wanted: Iterable[str]) -> dict[str, str]:
    taken = set(taken)
    mapping = {}
    for node_id in wanted:
        new_id = node_id
        while new_id in taken:
            new_id += "'"
        taken.add(new_id)
        if new_id != node_id:
            mapping[node_id] = new_id
    return mapping


def juxtapose(a: Diagram, b: Diagram) -> Diagram:
    """Side-by-side union; node ids of ``b`` are primed where they clash."""
    b = relabel(b, _fresh_ids(a.nodes, b.nodes))
    merged = Diagram({**a.nodes, **b.nodes}, a.edges + b.edges, a.boundary + b.boundary)
    names = merged.boundary_names
    if len(set(names)) != len(names):
        raise SignatureError(f"boundary names clash in juxtaposition: {names}")
    return merged


def compose(a: Diagram, b: Diagram, pairing: Sequence[tuple[str, str]]) -> Diagram:
    """Glue Out boundary legs of ``a`` to In boundary legs of ``b``.

    The result's boundary is the unpaired legs of ``a`` then those of ``b``.
    """
    b = relabel(b, _fresh_ids(a.nodes, b.nodes))
    a_used = {x for x, _ in pairing}
    b_used = {y for _, y in pairing}
    if len(a_used) != len(pairing) or len(b_used) != len(pairing):
        raise SignatureError("a boundary leg is paired twice")
    edges = list(a.edges + b.edges)
    for x, y in pairing:
        pa, pb = a.boundary_leg(x).port, b.boundary_leg(y).port
        la, lb = a.leg(pa), b.leg(pb)
        if la.direction is not Direction.OUT or lb.direction is not Direction.IN:
            raise DirectionError(f"pairing {x!r} -> {y!r} must join an Out leg to an In leg")
        if la.wire is not lb.wire:
            raise WireTypeError(f"pairing {x!r} -> {y!r} joins {la.wire.name} to {lb.wire.name}")
        edges.append((pa, pb))
    boundary = tuple(bl for bl in a.boundary if bl.name not in a_used) + \
        tuple(bl for bl in b.boundary if bl.name not in b_used)
    names = [bl.name for bl in boundary]
    if len(set(names)) != len(names):
        raise SignatureError(f"boundary names clash after composition: {names}")
    return Diagram({**a.nodes, **b.nodes}, tuple(edges), boundary)


def then(first: Diagram, second: Diagram) -> Diagram:
    """Operator composition ``second ∘ first`` for legs named ``o<k>`` / ``i<k>``.

    Every Out leg ``o<k>`` of ``first`` meets the In leg ``i<k>`` of ``second``.
    """
    outs = {n[1:] for n in first.boundary_names if n.startswith("o")}
    ins = {n[1:] for n in second.boundary_names if n.startswith("i")}
    shared = sorted(outs & ins)
    middle = {f"o{k}": f"_m{k}" for k in shared}
    first = rename_boundary(first, middle)
    second = rename_boundary(second, {f"i{k}": f"_m{k}'" for k in shared})
    return compose(first, second, [(f"_m{k}", f"_m{k}'") for k in shared])


def close(d: Diagram, out_name: str, in_name: str) -> Diagram:
    """Join two boundary legs of ``d`` into an internal edge."""
    pa, pb = d.boundary_leg(out_name).port, d.boundary_leg(in_name).port
    la, lb = d.leg(pa), d.leg(pb)
    if la.direction is not Direction.OUT or lb.direction is not Direction.IN:
        raise DirectionError(f"closing {out_name!r} -> {in_name!r} must join an Out leg to an In leg")
    if la.wire is not lb.wire:
        raise WireTypeError(f"closing {out_name!r} -> {in_name!r} joins {la.wire.name} to {lb.wire.name}")
    boundary = tuple(b for b in d.boundary if b.name not in (out_name, in_name))
    return Diagram(dict(d.nodes), d.edges + ((pa, pb),), boundary)


def dagger_diagram(d: Diagram) -> Diagram:
    """Node-wise Hermitian conjugate; the boundary order is reversed, names kept."""
    nodes: dict[str, GeneratorSpec] = {}
    remap: dict[str, list[int]] = {}
    for node_id, spec in d.nodes.items():
        nodes[node_id], remap[node_id] = dagger_spec(spec)

    def move(port: Port) -> Port:
        return Port(port.node, remap[port.node][port.leg])

    return Diagram(
        nodes,
        tuple((move(p), move(q)) for p, q in d.edges),
        tuple(BoundaryLeg(move(b.port), b.name) for b in reversed(d.boundary)),
    )


# ── Documents ──

def to_document(d: Diagram) -> DiagramDocument:
    nodes = []
    for node_id, spec in d.nodes.items():
        tensor = None
        if spec.kind is Kind.RAW:
            data = permute(spec.tensor, list(range(spec.arity))).data
            tensor = RawTensorDocument(entries=[ComplexValue.of(x) for x in data.ravel()])
        nodes.append(NodeDocument(
            id=node_id,
            kind=spec.kind.value,
            param=None if spec.param is None else ComplexValue.of(spec.param),
            legs=[LegDocument(wire=leg.wire.value, dir=leg.direction.value) for leg in spec.legs],
            tensor=tensor,
        ))
    return DiagramDocument(
        nodes=nodes,
        edges=[((p.node, p.leg), (q.node, q.leg)) for p, q in d.edges],
        boundary=[(b.port.node, b.port.leg, b.name) for b in d.boundary],
    )


def from_document(doc: DiagramDocument) -> Diagram:
    builder = DiagramBuilder()
    for node in doc.nodes:
        try:
            kind = Kind(node.kind)
        except ValueError as exc:
            raise InputError(f"node {node.id!r}: unknown kind {node.kind!r}") from exc
        legs = tuple(Leg(Wire(leg.wire), Direction(leg.dir)) for leg in node.legs)
        tensor = None
        if kind is Kind.RAW:
            if node.tensor is None:
                raise InputError(f"raw node {node.id!r} has no tensor entries")
            order = [IndexSpec(pos, leg.direction, leg.wire.dim) for pos, leg in enumerate(legs)]
            shape = tuple(s.dim.total for s in order)
            values = np.array([x.to_complex() for x in node.tensor.entries], dtype=np.complex128)
            if values.size != int(np.prod(shape)):
                raise InputError(f"raw node {node.id!r}: {values.size} entries for shape {shape}")
            tensor = GradedTensor(order, values.reshape(shape))
        param = None if node.param is None else node.param.to_complex()
        builder.add(node.id, GeneratorSpec(kind, legs, param, tensor))
    for p, q in doc.edges:
        builder.connect(p, q)
    for entry in doc.boundary:
        builder.expose((entry[0], entry[1]), entry[2] if len(entry) > 2 else None)
    return builder.build()


def to_json(d: Diagram) -> str:
    return to_document(d).model_dump_json(indent=2)


def from_json(text: str) -> Diagram:
    return from_document(DiagramDocument.model_validate_json(text))
