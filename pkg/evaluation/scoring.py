"""Sweep scoring: per-rule tallies over the verification records of a run.

A cell counts as
  - passed   when both sides agree within the tolerance,
  - skipped  when it was never evaluated (undrawn orientation, pole, capacity),
  - failed   otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from src.core.models import VerificationRecord


@dataclass
class RuleScore:
    """Tally for a single rule."""
    rule: str
    group: str
    cells: int = 0
    passed: int = 0
    skipped: int = 0
    max_dev: float = 0.0

    @property
    def failed(self) -> int:
        return self.cells - self.passed - self.skipped


@dataclass
class SweepReport:
    """Complete result of one rule sweep."""
    seed: int
    tolerance: float
    records: list[VerificationRecord] = field(default_factory=list)

    @property
    def failures(self) -> list[VerificationRecord]:
        return [r for r in self.records if not r.passed and not r.skipped]

    @property
    def passed(self) -> bool:
        return not self.failures

    def by_rule(self) -> list[RuleScore]:
        scores: dict[str, RuleScore] = {}
        for r in self.records:
            score = scores.setdefault(r.rule, RuleScore(r.rule, r.group))
            score.cells += 1
            score.passed += int(r.passed)
            score.skipped += int(r.skipped)
            if r.max_dev is not None:
                score.max_dev = max(score.max_dev, r.max_dev)
        return [scores[name] for name in sorted(scores)]

    def summary(self) -> str:
        """Pretty-print the sweep result."""
        skipped = sum(1 for r in self.records if r.skipped)
        lines = [
            f"=== Rule sweep (seed {self.seed}, tol {self.tolerance:g}) ===",
            f"Cells: {len(self.records)}  failed: {len(self.failures)}  skipped: {skipped}",
            f"Result: {'PASS' if self.passed else 'FAIL'}",
            "",
        ]
        for s in self.by_rule():
            lines.append(f"  [{s.passed}/{s.cells}] {s.rule} ({s.group}): "
                         f"max dev {s.max_dev:.2e}, {s.skipped} skipped")
        return "\n".join(lines)
