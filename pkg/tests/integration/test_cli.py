"""End-to-end tests of the command-line runner.

Each test calls ``main`` in-process and inspects exit codes, printed markers
and the saved JSON documents.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

import src.runner as runner
from src.config import get_settings
from src.runner import RunConfig, build_parser, main

pytestmark = pytest.mark.integration

SAMPLES = get_settings().samples_dir


def _sample(name: str) -> str:
    return str(SAMPLES / name)


def _run(argv: list[str], tmp_path: Path) -> tuple[int, dict]:
    out = tmp_path / "result.json"
    code = main([*argv, "--output", str(out)])
    return code, json.loads(out.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

class TestEval:

    def test_parity_pair_is_the_identity(self, tmp_path) -> None:
        code, doc = _run(["eval", _sample("parity_pair.json")], tmp_path)
        assert code == 0
        assert sorted(doc["boundary"]) == ["i0", "o0"]
        # boundary order [i0, o0] puts the odd-odd entry of the identity at -1
        values = {tuple(e["index"]): e["re"] for e in doc["entries"]}
        assert values == {(0, 0): pytest.approx(1), (1, 1): pytest.approx(-1)}
        assert doc["seed"] == 0

    def test_random_order_matches(self, tmp_path) -> None:
        _, greedy = _run(["eval", _sample("parity_pair.json")], tmp_path)
        code, shuffled = _run(["eval", _sample("parity_pair.json"), "--order", "random", "--seed", "11"],
                              tmp_path)
        assert code == 0
        assert shuffled["order"] == "random"
        assert shuffled["seed"] == 11
        assert shuffled["entries"] == greedy["entries"]

    def test_prints_to_stdout(self, capsys) -> None:
        assert main(["eval", _sample("parity_pair.json")]) == 0
        out = capsys.readouterr().out
        doc = json.loads(out[:out.rindex("[DONE]")])
        assert len(doc["entries"]) == 2

    def test_saved_marker(self, tmp_path, capsys) -> None:
        target = tmp_path / "nested" / "eval.json"
        assert main(["eval", _sample("parity_pair.json"), "--output", str(target)]) == 0
        assert f"[OK] Saved to {target}" in capsys.readouterr().out
        assert target.exists()


# ---------------------------------------------------------------------------
# gaussian
# ---------------------------------------------------------------------------

class TestGaussian:

    def test_pfaffian(self, tmp_path) -> None:
        code, doc = _run(["gaussian", "pfaffian", _sample("gaussian4.json")], tmp_path)
        assert code == 0
        assert doc["n"] == 4
        assert doc["pfaffian"]["re"] == pytest.approx(-0.09)
        assert doc["max_dev"] <= 1e-8

    def test_contract_worked_example(self, tmp_path) -> None:
        code, doc = _run(["gaussian", "contract", _sample("gaussian4.json"), "--pairs", "2:3", "--check"],
                         tmp_path)
        assert code == 0
        assert doc["pairs"] == [[2, 3]]
        assert doc["scalar"]["re"] == pytest.approx(1.5)
        assert doc["matrix"][1][0]["re"] == pytest.approx(0.26)
        assert doc["max_dev"] <= 1e-9

    def test_pnc_product_law(self, tmp_path) -> None:
        code, doc = _run(["gaussian", "pnc", _sample("pnc_a.json"), _sample("pnc_b.json")], tmp_path)
        assert code == 0
        assert doc["max_dev"] <= 1e-9
        assert "product" in doc

    def test_pfaffian_takes_one_matrix(self, capsys) -> None:
        code = main(["gaussian", "pfaffian", _sample("gaussian4.json"), _sample("gaussian4.json")])
        assert code == 2
        assert "exactly one matrix" in capsys.readouterr().err

    def test_bad_pair_is_a_usage_error(self) -> None:
        assert main(["gaussian", "contract", _sample("gaussian4.json"), "--pairs", "2-3"]) == 2


# ---------------------------------------------------------------------------
# bosonize and code
# ---------------------------------------------------------------------------

class TestBosonize:

    @pytest.mark.parametrize("check", ["dense", "symbolic"])
    def test_square_torus(self, check, tmp_path) -> None:
        code, doc = _run(["bosonize", "--dim", "2", "--size", "2,2", "--check", check], tmp_path)
        assert code == 0
        assert doc["vertices"] == 4
        assert doc["check"]["kind"] == check
        assert doc["check"]["failures"] == []

    def test_images(self, tmp_path) -> None:
        code, doc = _run(["bosonize", "--dim", "1", "--size", "3", "--open", "--images"], tmp_path)
        assert code == 0
        assert doc["images"]

    def test_size_must_match_dimension(self) -> None:
        assert main(["bosonize", "--dim", "2", "--size", "2,2,2"]) == 2


class TestCode:

    def test_gates(self, tmp_path) -> None:
        code, doc = _run(["code", "--check-gates"], tmp_path)
        assert code == 0
        assert len(doc["gates"]) == 4
        assert all(g["pass"] for g in doc["gates"])

    def test_stabilizers(self, tmp_path) -> None:
        code, doc = _run(["code", "--stabilizers", "4x4"], tmp_path)
        assert code == 0
        assert doc["stabilizers"]["failures"] == []

    def test_schedule_with_flow(self, tmp_path) -> None:
        code, doc = _run(["code", "--schedule", "4x4", "--flow"], tmp_path)
        assert code == 0
        assert doc["coverage_failures"] == []
        assert doc["flow"]["failures"] == []

    def test_needs_a_request(self, capsys) -> None:
        assert main(["code"]) == 2
        assert "[ERROR]" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify-rules and report
# ---------------------------------------------------------------------------

class TestSweepAndReport:

    def test_sweep_is_byte_identical(self, tmp_path, capsys) -> None:
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        argv = ["verify-rules", "--rule", "parity-squared", "--rule", "parity-into-z", "--seed", "4"]
        assert main([*argv, "--output", str(first)]) == 0
        assert main([*argv, "--output", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()
        out = capsys.readouterr().out
        assert "=== Rule sweep (seed 4, tol 1e-09) ===" in out
        assert f"[OK] Sweep saved to {first}" in out

    def test_failed_check_exits_one(self, tmp_path, capsys) -> None:
        code = main(["verify-rules", "--rule", "z-fusion", "--tol=-1", "--output", str(tmp_path / "s.jsonl")])
        assert code == 1
        assert capsys.readouterr().out.rstrip().endswith("[FAILED]")

    def test_report_from_a_sweep(self, tmp_path) -> None:
        sweep = tmp_path / "sweep.jsonl"
        assert main(["verify-rules", "--rule", "parity-squared", "--output", str(sweep)]) == 0
        junit, copy = tmp_path / "sweep.xml", tmp_path / "copy.jsonl"
        assert main(["report", "--from", str(sweep), "--junit", str(junit), "--jsonl", str(copy)]) == 0
        assert copy.read_bytes() == sweep.read_bytes()
        suite = ET.parse(junit).getroot()
        assert suite.get("failures") == "0"
        assert all(c.get("classname") == "rules.parity" for c in suite.findall("testcase"))

    def test_report_needs_a_format(self, capsys) -> None:
        assert main(["report"]) == 2
        assert "--junit or --jsonl" in capsys.readouterr().err

    def test_report_needs_a_sweep(self, tmp_path) -> None:
        assert main(["report", "--from", str(tmp_path / "missing.jsonl"), "--jsonl", str(tmp_path / "x")]) == 2

    def test_unknown_rule(self, tmp_path) -> None:
        assert main(["verify-rules", "--rule", "no-such-rule", "--output", str(tmp_path / "s.jsonl")]) == 2


# ---------------------------------------------------------------------------
# Bad input
# ---------------------------------------------------------------------------

class TestBadInput:

    def test_malformed_json_names_the_position(self, tmp_path, capsys) -> None:
        bad = tmp_path / "bad.json"
        bad.write_text('{"nodes": [\n  {"id": }\n]}\n', encoding="utf-8")
        assert main(["eval", str(bad)]) == 2
        assert f"{bad}:2:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys) -> None:
        assert main(["eval", str(tmp_path / "nowhere.json")]) == 2
        assert "file not found" in capsys.readouterr().err

    def test_invalid_document(self, tmp_path) -> None:
        doc = tmp_path / "wire.json"
        doc.write_text(json.dumps({
            "nodes": [{"id": "n", "kind": "ZSpider", "legs": [{"wire": "X", "dir": "in"}]}],
        }), encoding="utf-8")
        assert main(["eval", str(doc)]) == 2

    def test_help(self) -> None:
        assert main(["--help"]) == 0

    def test_unknown_command(self) -> None:
        assert main(["transmogrify"]) == 2


# ---------------------------------------------------------------------------
# Shared flags and environment
# ---------------------------------------------------------------------------

class TestFlags:

    def test_max_legs_refuses_a_wide_boundary(self, tmp_path, capsys) -> None:
        code = main(["eval", _sample("parity_pair.json"), "--max-legs", "1",
                     "--output", str(tmp_path / "e.json")])
        assert code == 1
        captured = capsys.readouterr()
        assert "exceed the limit of 1" in captured.err
        assert captured.out.rstrip().endswith("[FAILED]")
        assert not (tmp_path / "e.json").exists()

    def test_max_legs_at_the_boundary_size(self, tmp_path) -> None:
        code, doc = _run(["eval", _sample("parity_pair.json"), "--max-legs", "2"], tmp_path)
        assert code == 0
        assert len(doc["entries"]) == 2

    def test_threads_do_not_change_the_sweep(self, tmp_path) -> None:
        serial, pooled = tmp_path / "serial.jsonl", tmp_path / "pooled.jsonl"
        argv = ["verify-rules", "--rule", "z-fusion", "--seed", "2"]
        assert main([*argv, "--threads", "1", "--output", str(serial)]) == 0
        assert main([*argv, "--threads", "3", "--output", str(pooled)]) == 0
        assert serial.read_bytes() == pooled.read_bytes()

    def test_max_arity_limits_the_cells(self, tmp_path) -> None:
        def cells(arity: str) -> list[dict]:
            target = tmp_path / f"arity{arity}.jsonl"
            assert main(["verify-rules", "--rule", "qubit-z-fusion", "--max-arity", arity,
                         "--output", str(target)]) == 0
            return [json.loads(line)["params"] for line in target.read_text().splitlines()[1:]]

        small, large = cells("2"), cells("3")
        assert small and all(p["m"] <= 2 and p["n"] <= 2 for p in small)
        assert len(large) > len(small)
        assert any(p["m"] == 3 for p in large)

    def test_periods_repeat_the_schedule(self, tmp_path) -> None:
        _, one = _run(["code", "--schedule", "4x4"], tmp_path)
        _, two = _run(["code", "--schedule", "4x4", "--periods", "2"], tmp_path)
        assert max(e["round"] for e in one["schedule"]) == 6
        assert max(e["round"] for e in two["schedule"]) == 12
        assert len(two["schedule"]) == 2 * len(one["schedule"])

    @pytest.mark.parametrize("argv, verbose", [
        (["-v", "eval"], True),
        (["--verbose", "eval"], True),
        (["eval"], False),
    ])
    def test_verbose_switches_debug_logging(self, monkeypatch, argv, verbose) -> None:
        seen: list[bool] = []
        monkeypatch.setattr(runner, "_setup_logging", lambda flag=False: seen.append(flag))
        assert main([*argv, _sample("parity_pair.json")]) == 0
        assert seen == [verbose]

    def test_threads_from_the_environment(self, monkeypatch) -> None:
        monkeypatch.setenv("FERROZX_THREADS", "3")
        get_settings.cache_clear()
        try:
            parser = build_parser()
            assert RunConfig.resolve(parser.parse_args(["eval", "x.json"])).threads == 3
            override = parser.parse_args(["eval", "x.json", "--threads", "2"])
            assert RunConfig.resolve(override).threads == 2
        finally:
            get_settings.cache_clear()


class TestDomainFailures:

    def test_singular_contraction_exits_one(self, tmp_path, capsys) -> None:
        # a[0][1] = -1 cancels the symplectic shift on the pair 0:1
        matrix = tmp_path / "singular.json"
        matrix.write_text(json.dumps([
            [0.0, -1.0, 0.2, 0.3],
            [1.0, 0.0, 0.4, 0.5],
            [-0.2, -0.4, 0.0, 0.6],
            [-0.3, -0.5, -0.6, 0.0],
        ]), encoding="utf-8")
        assert main(["gaussian", "contract", str(matrix), "--pairs", "0:1"]) == 1
        captured = capsys.readouterr()
        assert "singular" in captured.err
        assert captured.out.rstrip().endswith("[FAILED]")

    def test_bad_document_still_exits_two(self, tmp_path) -> None:
        ragged = tmp_path / "ragged.json"
        ragged.write_text(json.dumps([[0.0, 1.0], [1.0]]), encoding="utf-8")
        assert main(["gaussian", "pfaffian", str(ragged)]) == 2
