"""Sweep Runner — batch verification of the rule catalog.

Usage:
    python -m evaluation.runner
    python -m evaluation.runner --max-arity 3 --rule z-fusion --seed 7
    python -m evaluation.runner --junit evaluation/results/sweep.xml
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from evaluation.scoring import SweepReport
from src.config import get_settings
from src.core.errors import InputError
from src.core.models import VerificationRecord

logger = logging.getLogger(__name__)

SWEEP_FILE = "sweep.jsonl"


def run_sweep(max_arity: int | None = None, rules: list[str] | None = None,
              seed: int | None = None, threads: int | None = None,
              tol: float | None = None) -> SweepReport:
    """Verify every selected rule cell and collect the records."""
    from src.calculus.rules import sweep_verify

    settings = get_settings()
    seed = settings.seed if seed is None else seed
    tol = settings.tolerance if tol is None else tol
    records = sweep_verify(max_fermion_legs=max_arity, max_qubit_legs=max_arity,
                           seed=seed, rules=rules, threads=threads, tol=tol)
    return SweepReport(seed=seed, tolerance=tol, records=records)


# ── Writers ──

def _record_line(record: VerificationRecord) -> str:
    # wall-clock time would make two runs differ
    data = record.model_dump(by_alias=True, exclude={"elapsed_ms"})
    return json.dumps(data, sort_keys=True, default=str)


def to_jsonl(report: SweepReport) -> str:
    """A header line with seed and tolerance, then one record per line."""
    lines = [json.dumps({"seed": report.seed, "tolerance": report.tolerance}, sort_keys=True)]
    lines += [_record_line(r) for r in report.records]
    return "\n".join(lines) + "\n"


def write_jsonl(report: SweepReport, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_jsonl(report), encoding="utf-8")
    logger.info("Wrote %d records to %s", len(report.records), path)
    return path


def read_jsonl(path: Path) -> SweepReport:
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise InputError(f"{path} holds no sweep")
    header = json.loads(lines[0])
    if "seed" not in header or "tolerance" not in header:
        raise InputError(f"{path} does not start with a sweep header")
    records = [VerificationRecord.model_validate_json(line) for line in lines[1:]]
    return SweepReport(seed=int(header["seed"]), tolerance=float(header["tolerance"]),
                       records=records)


def to_junit(report: SweepReport) -> str:
    """One testcase per cell, grouped in a single testsuite."""
    suite = ET.Element("testsuite", {
        "name": "ferrozx.rules",
        "tests": str(len(report.records)),
        "failures": str(len(report.failures)),
        "skipped": str(sum(1 for r in report.records if r.skipped)),
    })
    props = ET.SubElement(suite, "properties")
    ET.SubElement(props, "property", {"name": "seed", "value": str(report.seed)})
    ET.SubElement(props, "property", {"name": "tolerance", "value": repr(report.tolerance)})
    for r in report.records:
        params = json.dumps(r.params, sort_keys=True, default=str)
        case = ET.SubElement(suite, "testcase", {
            "classname": f"rules.{r.group or 'ungrouped'}",
            "name": f"{r.rule}{params}",
        })
        if r.skipped:
            ET.SubElement(case, "skipped", {"message": r.reason})
        elif not r.passed:
            ET.SubElement(case, "failure", {"message": r.reason or "deviation above tolerance"})
    ET.indent(suite)
    return ET.tostring(suite, encoding="unicode") + "\n"


def write_junit(report: SweepReport, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('<?xml version="1.0" encoding="utf-8"?>\n' + to_junit(report), encoding="utf-8")
    logger.info("Wrote JUnit report for %d cells to %s", len(report.records), path)
    return path


def _print_summary(report: SweepReport) -> None:
    """Print batch sweep summary."""
    print("\n" + "=" * 60)
    print("  SWEEP SUMMARY")
    print("=" * 60)
    print(f"  Seed: {report.seed}   Tolerance: {report.tolerance:g}")
    print(f"  Cells verified: {len(report.records)}")
    for s in report.by_rule():
        icon = "✅" if s.failed == 0 else "❌"
        print(f"  {icon} {s.rule}: {s.passed}/{s.cells} passed, {s.skipped} skipped")
    print()


def main() -> None:
    parser = argparse.ArgumentParser(description="Rule catalog sweep runner")
    parser.add_argument("--max-arity", type=int, help="Largest leg count per side")
    parser.add_argument("--rule", action="append", help="Restrict to this rule (repeatable)")
    parser.add_argument("--seed", type=int, help="Seed for random contraction orders")
    parser.add_argument("--junit", help="Also write a JUnit XML report here")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s | %(name)-30s | %(levelname)-7s | %(message)s",
        datefmt="%H:%M:%S",
    )

    report = run_sweep(args.max_arity, args.rule, args.seed)
    _print_summary(report)

    out_path = write_jsonl(report, get_settings().results_dir / SWEEP_FILE)
    print(f"[OK] Results saved to {out_path}")
    if args.junit:
        print(f"[OK] JUnit report saved to {write_junit(report, Path(args.junit))}")
    sys.exit(0 if report.passed else 1)


if __name__ == "__main__":
    main()
