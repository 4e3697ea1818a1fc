"""CLI Runner — evaluate diagrams and run the engine's checks from the command line.

Usage:
    # Evaluate a diagram document and print its nonzero entries:
    python -m src.runner eval data/samples/parity_pair.json

    # Verify the rule catalog and write a JSONL report:
    python -m src.runner verify-rules --max-arity 4 --seed 0

    # Gaussian algebra on matrix documents:
    python -m src.runner gaussian contract data/samples/gaussian4.json --pairs 2:3

    # Bosonization and the Majorana code:
    python -m src.runner bosonize --dim 2 --size 2,2 --check symbolic --images
    python -m src.runner code --check-gates --schedule 4x4

Exit codes: 0 when every requested check passes, 1 when one fails, 2 on bad
input or usage. A well-formed request the engine cannot carry out (a singular
Schur block, a construction at its pole, a tensor over the leg limit) counts
as a failed check and exits 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

# Ensure project root on sys.path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.config import get_settings
from src.core.errors import CapacityError, FerrozxError, InputError, PoleError, SingularityError
from src.core.models import ComplexValue, DiagramDocument, MatrixDocument

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class RunConfig(BaseModel):
    """Settings of one invocation: environment defaults plus command-line overrides."""
    seed: int = 0
    tolerance: float = 1e-9
    max_legs: int = 22
    threads: int = 1
    output: Path | None = None

    @classmethod
    def resolve(cls, args: argparse.Namespace) -> "RunConfig":
        settings = get_settings()
        picked = {
            "seed": getattr(args, "seed", None),
            "tolerance": getattr(args, "tol", None),
            "max_legs": getattr(args, "max_legs", None),
            "threads": getattr(args, "threads", None),
        }
        values: dict[str, Any] = {
            "seed": settings.seed,
            "tolerance": settings.tolerance,
            "max_legs": settings.max_legs,
            "threads": settings.threads,
        }
        values.update({k: v for k, v in picked.items() if v is not None})
        values["output"] = getattr(args, "output", None)
        return cls(**values)


def _setup_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(name)-30s | %(levelname)-7s | %(message)s",
        datefmt="%H:%M:%S",
    )
    # Quiet noisy libraries
    logging.getLogger("sympy").setLevel(logging.WARNING)


# ── Input ──

def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.exists():
        raise InputError(f"file not found: {p}")
    text = p.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _load_diagram(path: str):
    from src.calculus.diagram import from_document

    return from_document(DiagramDocument.model_validate(_read_json(path)))


def _load_matrix(path: str):
    data = _read_json(path)
    doc = MatrixDocument(rows=data) if isinstance(data, list) else MatrixDocument.model_validate(data)
    try:
        return doc.to_array()
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _parse_pair(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a pair like 2:3, got {text!r}") from exc


def _parse_sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace("x", ",").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected sizes like 4 or 2,2, got {text!r}") from exc


# ── Output ──

def _emit(config: RunConfig, payload: dict[str, Any]) -> None:
    """Print or save a JSON document stamped with the seed and tolerance."""
    document = {**payload, "seed": config.seed, "tolerance": config.tolerance}
    text = json.dumps(document, indent=2, sort_keys=True, default=str)
    if config.output:
        config.output.parent.mkdir(parents=True, exist_ok=True)
        config.output.write_text(text + "\n", encoding="utf-8")
        print(f"[OK] Saved to {config.output}")
    else:
        print(text)


def _complex(z: complex) -> dict[str, float]:
    return ComplexValue.of(z).model_dump()


def _rows(matrix) -> list[list[dict[str, float]]]:
    return MatrixDocument.of(matrix).model_dump()["rows"]


# ── Subcommands ──

def run_eval(args: argparse.Namespace, config: RunConfig) -> int:
    import numpy as np

    from src.calculus.diagram import evaluate

    diagram = _load_diagram(args.diagram)
    rng = np.random.default_rng(config.seed) if args.order == "random" else None
    tensor = evaluate(diagram, order=args.order, rng=rng, max_legs=config.max_legs)
    entries = [
        {"index": [int(k) for k in idx], **_complex(tensor.data[tuple(idx)])}
        for idx in np.argwhere(np.abs(tensor.data) > 0)
    ]
    _emit(config, {
        "boundary": [str(i) for i in tensor.ids],
        "entries": entries,
        "order": args.order,
    })
    return EXIT_OK


def run_verify_rules(args: argparse.Namespace, config: RunConfig) -> int:
    from evaluation.runner import SWEEP_FILE, run_sweep, write_jsonl
    from src.calculus.rules import get_rule

    for name in args.rule or []:
        get_rule(name)
    report = run_sweep(max_arity=args.max_arity, rules=args.rule, seed=config.seed,
                       threads=config.threads, tol=config.tolerance)
    print(report.summary())
    path = write_jsonl(report, config.output or get_settings().results_dir / SWEEP_FILE)
    print(f"[OK] Sweep saved to {path}")
    return EXIT_OK if report.passed else EXIT_FAILED


def run_gaussian(args: argparse.Namespace, config: RunConfig) -> int:
    from src.gaussian.pfaffian import pfaffian, pfaffian_matchings
    from src.gaussian.tensors import contract_check, contract_gaussian, pnc_matrix, pnc_multiply_check

    if args.action == "pfaffian":
        if len(args.matrices) != 1:
            raise InputError("pfaffian takes exactly one matrix")
        a = _load_matrix(args.matrices[0])
        value = pfaffian(a)
        payload: dict[str, Any] = {"n": int(a.shape[0]), "pfaffian": _complex(value)}
        passed = True
        if a.shape[0] <= 10:
            oracle = pfaffian_matchings(a)
            dev = abs(value - oracle) / max(1.0, abs(oracle))
            payload.update(matchings=_complex(oracle), max_dev=dev)
            passed = dev <= max(config.tolerance, 1e-8)
        _emit(config, payload)
        return EXIT_OK if passed else EXIT_FAILED

    if args.action == "contract":
        if len(args.matrices) != 1:
            raise InputError("contract takes exactly one matrix")
        a = _load_matrix(args.matrices[0])
        pairs = args.pairs or []
        reduced, scalar = contract_gaussian(a, pairs)
        payload = {"pairs": [list(p) for p in pairs], "matrix": _rows(reduced), "scalar": _complex(scalar)}
        passed = True
        if args.check:
            report = contract_check(a, pairs)
            payload["max_dev"] = report.max_dev
            passed = report.equal
        _emit(config, payload)
        return EXIT_OK if passed else EXIT_FAILED

    # pnc
    if len(args.matrices) not in (1, 2):
        raise InputError("pnc takes one matrix, or two to check the product law")
    first = _load_matrix(args.matrices[0])
    payload = {"operator": _rows(pnc_matrix(first))}
    passed = True
    if len(args.matrices) == 2:
        second = _load_matrix(args.matrices[1])
        report = pnc_multiply_check(first, second)
        payload.update(product=_rows(first @ second), max_dev=report.max_dev)
        passed = report.max_dev <= config.tolerance
    _emit(config, payload)
    return EXIT_OK if passed else EXIT_FAILED


def run_bosonize(args: argparse.Namespace, config: RunConfig) -> int:
    from src.bosonization.images import check_constraints, check_dense, image_table
    from src.bosonization.lattice import Lattice

    sizes = args.size
    if len(sizes) == 1:
        sizes = sizes * args.dim
    if len(sizes) != args.dim:
        raise InputError(f"--size gives {len(sizes)} extents for dimension {args.dim}")
    lattice = Lattice(tuple(sizes), periodic=not args.open)
    payload: dict[str, Any] = {
        "lattice": lattice.describe(),
        "vertices": lattice.n_vertices,
        "edges": lattice.n_edges,
    }
    passed = True
    if args.check == "dense":
        report = check_dense(lattice, tol=config.tolerance)
    elif args.check == "symbolic":
        report = check_constraints(lattice, threads=config.threads)
    else:
        report = None
    if report is not None:
        payload["check"] = {"kind": args.check, "checked": report.checked,
                            "failures": report.failures}
        passed = report.passed
    if args.images:
        payload["images"] = image_table(lattice).entries
    _emit(config, payload)
    return EXIT_OK if passed else EXIT_FAILED


def run_code(args: argparse.Namespace, config: RunConfig) -> int:
    from src.codes.floquet import check_schedule, floquet_schedule, stabilizer_flow
    from src.codes.gadgets import gate_identities
    from src.codes.majorana import check_code, stabilizers

    if not (args.check_gates or args.schedule or args.stabilizers):
        raise InputError("code needs --check-gates, --schedule or --stabilizers")
    payload: dict[str, Any] = {}
    passed = True
    if args.check_gates:
        checks = gate_identities(tol=config.tolerance)
        payload["gates"] = [{"name": c.name, "max_dev": c.max_dev, "pass": c.passed} for c in checks]
        passed &= all(c.passed for c in checks)
    if args.stabilizers:
        report = check_code(stabilizers(tuple(args.stabilizers)), threads=config.threads)
        payload["stabilizers"] = {"checked": report.checked, "failures": report.failures}
        passed &= report.passed
    if args.schedule:
        schedule = floquet_schedule(tuple(args.schedule), periods=args.periods)
        failures = check_schedule(schedule)
        payload["schedule"] = json.loads(schedule.to_json())
        payload["coverage_failures"] = failures
        passed &= not failures
        if args.flow:
            flow = stabilizer_flow(schedule)
            payload["flow"] = {
                "steps": [asdict(step) for step in flow.steps],
                "failures": flow.failures,
            }
            passed &= flow.passed
    _emit(config, payload)
    return EXIT_OK if passed else EXIT_FAILED


def run_report(args: argparse.Namespace, config: RunConfig) -> int:
    from evaluation.runner import SWEEP_FILE, read_jsonl, write_jsonl, write_junit

    source = Path(args.source) if args.source else get_settings().results_dir / SWEEP_FILE
    if not source.exists():
        raise InputError(f"no sweep at {source}; run verify-rules first")
    report = read_jsonl(source)
    if args.junit:
        print(f"[OK] JUnit report saved to {write_junit(report, Path(args.junit))}")
    if args.jsonl:
        print(f"[OK] JSONL report saved to {write_jsonl(report, Path(args.jsonl))}")
    return EXIT_OK


# ── Parser ──

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ferrozx",
        description="Fermionic ZX calculus engine",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m src.runner eval data/samples/parity_pair.json
  python -m src.runner verify-rules --max-arity 4 --seed 0
  python -m src.runner gaussian contract data/samples/gaussian4.json --pairs 2:3
  python -m src.runner gaussian pnc data/samples/pnc_a.json data/samples/pnc_b.json
  python -m src.runner bosonize --dim 2 --size 2,2 --check dense
  python -m src.runner code --check-gates --schedule 4x4 --flow
  python -m src.runner report --junit evaluation/results/sweep.xml
        """,
    )
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable debug logging",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="Tolerance for numeric checks")
    common.add_argument("--threads", type=int, help="Worker cap for independent checks")
    common.add_argument("--output", type=Path, help="Save the result document to this path")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="Evaluate a diagram document")
    p.add_argument("diagram", help="Path to a diagram JSON file")
    p.add_argument("--order", choices=["greedy", "random"], default="greedy",
                   help="Contraction order")
    p.add_argument("--seed", type=int, help="Seed for a random contraction order")
    p.add_argument("--max-legs", type=int, help="Largest boundary evaluated densely")
    p.set_defaults(handler=run_eval)

    p = sub.add_parser("verify-rules", parents=[common], help="Verify the rule catalog")
    p.add_argument("--rule", action="append", help="Restrict to this rule (repeatable)")
    p.add_argument("--max-arity", type=int, help="Largest leg count per side")
    p.add_argument("--seed", type=int, help="Seed for random contraction orders")
    p.set_defaults(handler=run_verify_rules)

    p = sub.add_parser("gaussian", parents=[common], help="Pfaffians, contraction and PNC operators")
    p.add_argument("action", choices=["pfaffian", "contract", "pnc"])
    p.add_argument("matrices", nargs="+", help="Matrix JSON file(s)")
    p.add_argument("--pairs", type=_parse_pair, action="append",
                   help="Index pair to contract, like 2:3 (repeatable)")
    p.add_argument("--check", action="store_true",
                   help="Cross-check a contraction against dense contraction")
    p.set_defaults(handler=run_gaussian)

    p = sub.add_parser("bosonize", parents=[common], help="Bosonization network on a cubic lattice")
    p.add_argument("--dim", type=int, required=True, help="Lattice dimension")
    p.add_argument("--size", type=_parse_sizes, required=True, help="Extent, or extents like 2,2")
    p.add_argument("--open", action="store_true", help="Open instead of periodic boundaries")
    p.add_argument("--check", choices=["dense", "symbolic"], help="Verify the operator images")
    p.add_argument("--images", action="store_true", help="Print the image table")
    p.set_defaults(handler=run_bosonize)

    p = sub.add_parser("code", parents=[common], help="Majorana code and its Floquet circuit")
    p.add_argument("--check-gates", action="store_true", help="Check the three circuit gadgets")
    p.add_argument("--stabilizers", type=_parse_sizes, metavar="LxL",
                   help="Check stabilizer commutation on an LxL torus")
    p.add_argument("--schedule", type=_parse_sizes, metavar="LxL",
                   help="Emit and check the measurement schedule on an LxL torus")
    p.add_argument("--periods", type=int, default=1, help="Schedule periods")
    p.add_argument("--flow", action="store_true", help="Track stabilizers through the schedule")
    p.set_defaults(handler=run_code)

    p = sub.add_parser("report", help="Rewrite the last sweep as JUnit or JSONL")
    p.add_argument("--junit", help="Write JUnit XML here")
    p.add_argument("--jsonl", help="Write JSONL here")
    p.add_argument("--from", dest="source", help="Sweep file to read (default: last sweep)")
    p.set_defaults(handler=run_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    _setup_logging(args.verbose)

    if args.command == "report" and not (args.junit or args.jsonl):
        print("[ERROR] report needs --junit or --jsonl", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = RunConfig.resolve(args)
        logger.debug("Run config: %s", config.model_dump())
        code = args.handler(args, config)
    except (SingularityError, PoleError, CapacityError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        code = EXIT_FAILED
    except (FerrozxError, ValidationError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_USAGE

    print("[DONE]" if code == EXIT_OK else "[FAILED]")
    return code


if __name__ == "__main__":
    sys.exit(main())
