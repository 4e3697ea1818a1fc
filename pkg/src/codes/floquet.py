"""Floquet circuit read off the Majorana code along the ``x + y`` direction.

Qubits and fermion modes alternate along the rows of an ``Lx x Ly`` torus:
qubit ``(x, y)`` sits at doubled coordinates ``[2x, 2y+1]`` and the mode to
its right at ``[2x+1, 2y+1]``, so an even first coordinate marks a qubit.

One period has six rounds. Round 1 measures ``XX`` on vertical qubit pairs
starting at even rows and ``PP`` on vertical mode pairs starting at odd rows.
Rounds 2 and 3 apply controlled ``i γ γ'`` gates, each from a qubit onto the
mode on its left (``γ``) and the mode on its right (``γ'``): controls in odd
columns first, then even columns. Rounds 4 to 6 repeat this one row up.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

from src.codes.gadgets import pair_operator
from src.core.errors import UnsupportedError
from src.core.models import ScheduleEntry
from src.fermionops.strings import HybridString, parity, pauli_string

logger = logging.getLogger(__name__)

PERIOD = 6
MEASURE_XX = "measure-XX"
MEASURE_PP = "measure-PP"
CONTROLLED = "unitary-Cgg'"


def qubit_site(x: int, y: int) -> list[int]:
    return [2 * x, 2 * y + 1]


def mode_site(x: int, y: int) -> list[int]:
    return [2 * x + 1, 2 * y + 1]


def is_qubit(site: list[int]) -> bool:
    return site[0] % 2 == 0


@dataclass
class FloquetSchedule:
    extents: tuple[int, int]
    entries: list[ScheduleEntry] = field(default_factory=list)

    @property
    def n_rounds(self) -> int:
        return max((e.round for e in self.entries), default=0)

    def round(self, r: int) -> list[ScheduleEntry]:
        return [e for e in self.entries if e.round == r]

    def index(self, site: list[int]) -> int:
        """Qubit site or mode number of a doubled coordinate."""
        lx = self.extents[0]
        return site[0] // 2 + lx * (site[1] // 2)

    def to_json(self) -> str:
        return json.dumps([e.model_dump() for e in self.entries], sort_keys=True)


def _check_extents(extents: tuple[int, int]) -> tuple[int, int]:
    extents = tuple(int(n) for n in extents)
    if len(extents) != 2:
        raise UnsupportedError(f"the circuit lives on a square lattice, got extents {extents}")
    lx, ly = extents
    if lx < 2 or ly < 2 or lx % 2 or ly % 2:
        raise UnsupportedError(f"the circuit tiles only even extents of at least 2, got {lx}x{ly}")
    return lx, ly


def floquet_schedule(extents: tuple[int, int], periods: int = 1) -> FloquetSchedule:
    lx, ly = _check_extents(extents)
    schedule = FloquetSchedule((lx, ly))
    for r in range(1, PERIOD * periods + 1):
        step = (r - 1) % 3
        shift = ((r - 1) // 3) % 2
        if step == 0:
            for x in range(lx):
                for y in range(shift, ly, 2):
                    schedule.entries.append(ScheduleEntry(
                        round=r, op=MEASURE_XX,
                        sites=[qubit_site(x, y), qubit_site(x, (y + 1) % ly)]))
            for x in range(lx):
                for y in range(1 - shift, ly, 2):
                    schedule.entries.append(ScheduleEntry(
                        round=r, op=MEASURE_PP,
                        sites=[mode_site(x, y), mode_site(x, (y + 1) % ly)]))
        else:
            for x in range(step % 2, lx, 2):
                for y in range(ly):
                    schedule.entries.append(ScheduleEntry(
                        round=r, op=CONTROLLED,
                        sites=[mode_site((x - 1) % lx, y), qubit_site(x, y), mode_site(x, y)]))
    logger.debug("Floquet schedule %dx%d: %d rounds, %d operations",
                 lx, ly, schedule.n_rounds, len(schedule.entries))
    return schedule


def check_schedule(schedule: FloquetSchedule) -> list[str]:
    """Supports within a round are disjoint and every mode is touched once per round.

    Every qubit is measured once in a measurement round and controls exactly
    one gate across the two gate rounds that follow.
    """
    lx, ly = schedule.extents
    failures = []
    n_sites = lx * ly
    controls: Counter = Counter()
    for r in range(1, schedule.n_rounds + 1):
        entries = schedule.round(r)
        touched = Counter(tuple(site) for e in entries for site in e.sites)
        clashes = sorted(site for site, n in touched.items() if n > 1)
        if clashes:
            failures.append(f"round {r}: sites {clashes} are used twice")
        modes = sum(1 for site in touched if not is_qubit(list(site)))
        if modes != n_sites:
            failures.append(f"round {r}: {modes} of {n_sites} modes take part")
        qubits = [site for site in touched if is_qubit(list(site))]
        if (r - 1) % 3 == 0:
            if len(qubits) != n_sites:
                failures.append(f"round {r}: {len(qubits)} of {n_sites} qubits are measured")
            controls.clear()
        else:
            controls.update(qubits)
            if (r - 1) % 3 == 2 and (len(controls) != n_sites or max(controls.values()) != 1):
                failures.append(f"rounds {r - 1}-{r}: qubits do not each control one gate")
    return failures


# ── Stabilizer flow ──

def observable(schedule: FloquetSchedule, entry: ScheduleEntry) -> HybridString:
    """Measured observable of a measurement entry."""
    a, b = (schedule.index(site) for site in entry.sites)
    if entry.op == MEASURE_XX:
        return pauli_string({a: "X", b: "X"})
    if entry.op == MEASURE_PP:
        return parity(a) * parity(b)
    raise UnsupportedError(f"{entry.op} is not a measurement")


def conjugate(s: HybridString, control: int, left: int, right: int) -> HybridString:
    """``U s U†`` for ``U = (1+Z)/2 + (1-Z)/2 · W`` with ``W = i γ_left γ'_right``.

    A Pauli part anticommuting with ``Z`` picks up ``W``; a Majorana part
    anticommuting with ``W`` picks up ``Z``.
    """
    w = pair_operator(left, right)
    qubits = HybridString(s.coeff, s.paulis, _checked=True)
    fermions = HybridString(1.0, (), s.majoranas, _checked=True)
    if s.pauli_map.get(control) in ("X", "Y"):
        qubits = qubits * w
    if not fermions.commutes(w):
        fermions = pauli_string({control: "Z"}) * fermions
    return qubits * fermions


def apply_round(schedule: FloquetSchedule, s: HybridString, entries: list[ScheduleEntry]) -> HybridString:
    for entry in entries:
        if entry.op != CONTROLLED:
            raise UnsupportedError(f"{entry.op} is not a unitary")
        left, control, right = entry.sites
        s = conjugate(s, schedule.index(control), schedule.index(left), schedule.index(right))
    return s


@dataclass(frozen=True)
class FlowStep:
    round: int
    measured: int
    kept: int
    dropped: int
    size: int


@dataclass
class FlowReport:
    extents: tuple[int, int]
    steps: list[FlowStep] = field(default_factory=list)
    group: list[HybridString] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _signs(strings: list[HybridString]) -> list[list[int]]:
    return [[a.commutation_sign(b) for b in strings] for a in strings]


def stabilizer_flow(schedule: FloquetSchedule) -> FlowReport:
    """Carry the measured observables forward through the circuit.

    Gate rounds conjugate every tracked stabilizer and must keep all their
    commutation relations. A measurement round drops tracked stabilizers that
    anticommute with a new outcome, then adds the new outcomes; products of
    dropped stabilizers that would survive are not rebuilt.
    """
    report = FlowReport(schedule.extents)
    group: list[HybridString] = []
    for r in range(1, schedule.n_rounds + 1):
        entries = schedule.round(r)
        if entries and entries[0].op == CONTROLLED:
            before = _signs(group)
            group = [apply_round(schedule, s, entries) for s in group]
            if _signs(group) != before:
                report.failures.append(f"round {r} changed commutation relations")
            report.steps.append(FlowStep(r, 0, len(group), 0, len(group)))
            continue
        measured = [observable(schedule, e) for e in entries]
        for i, m in enumerate(measured):
            if any(not m.commutes(other) for other in measured[i + 1:]):
                report.failures.append(f"round {r}: measured {m} clashes within the round")
        kept = [s for s in group
                if all(s.commutes(m) for m in measured)
                and not any(s.same_operator(m) for m in measured)]
        dropped = sum(1 for s in group if not all(s.commutes(m) for m in measured))
        group = kept + measured
        report.steps.append(FlowStep(r, len(measured), len(kept), dropped, len(group)))
        logger.debug("Round %d: %d measured, %d kept, %d dropped", r, len(measured), len(kept), dropped)
    report.group = group
    logger.info("Stabilizer flow over %d rounds: %d stabilizers tracked, %d failures",
                schedule.n_rounds, len(group), len(report.failures))
    return report
