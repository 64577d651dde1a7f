"""Config validation, report serialization, and the command-line matrix."""

import json
import re
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from phaseq.config import (
    COMMANDS,
    apply_defaults,
    load_config,
    parse_complex,
    validate,
)
from phaseq.errors import ConfigError
from phaseq.report import build_report, canonical_dumps, config_hash, to_jsonable

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = sorted((ROOT / "configs").glob("*.json"))


def _run_cli(*args, cwd=ROOT):
    return subprocess.run(
        [sys.executable, "-m", "phaseq", *args],
        capture_output=True, text=True, cwd=cwd,
    )


def _strip_clock(report):
    """Drop the one legitimately varying field before comparing reports."""
    if isinstance(report, dict):
        return {k: v for k, v in report.items() if k != "wall_clock_s"}
    return re.sub(r'"wall_clock_s": [0-9.eE+-]+', '"wall_clock_s": 0', report)


# ---------------------------------------------------------------------------
# complex parsing


def test_parse_complex_forms():
    assert parse_complex(2) == 2 + 0j
    assert parse_complex(-1.5) == -1.5 + 0j
    assert parse_complex("1+1i") == 1 + 1j
    assert parse_complex("0-2i") == -2j
    assert parse_complex(" 1.5 - 0.5 i ") == 1.5 - 0.5j
    assert parse_complex("i") == 1j
    assert parse_complex({"re": 1, "im": -2}) == 1 - 2j
    assert parse_complex({"re": 3}) == 3 + 0j
    assert parse_complex({}) == 0j


def test_parse_complex_rejections():
    for bad in (True, "abc", {"re": "x"}, {"re": 1, "extra": 2}, None, [1, 2], {"im": True}):
        with pytest.raises(ValueError, match="must be a complex number"):
            parse_complex(bad)


# ---------------------------------------------------------------------------
# validation


def test_shipped_configs_are_clean():
    assert len(CONFIGS) == 6
    commands = set()
    for path in CONFIGS:
        config = load_config(path)
        assert validate(config) == [], path.name
        commands.add(config["command"])
    assert commands == set(COMMANDS)


def test_validate_collects_every_problem():
    diags = validate({
        "command": "coherent-report",
        "radius": -1,
        "states": ["bogus", 1.0],
    })
    found = {(d["path"], d["message"]) for d in diags}
    assert ("dim", "required field missing") in found
    assert ("radius", "must be > 0") in found
    assert ("states[0]", "must be a complex number") in found
    assert not any(path == "states[1]" for path, _ in found)


def test_validate_command_field():
    assert validate({}) == [{"path": "command", "message": "required field missing"}]
    assert validate({"command": "noop"}) == [
        {"path": "command", "message": "unknown command 'noop'"}
    ]
    assert validate({"command": 3}) == [{"path": "command", "message": "must be a string"}]


def test_validate_structure_fragment():
    diags = validate({
        "command": "check-integrability",
        "modes": 2,
        "structure": {"kind": "rotated", "angle": "q1 +", "axis": [1, 9]},
    })
    by_path = {d["path"]: d["message"] for d in diags}
    assert "structure.angle" in by_path
    assert "structure.axis" in by_path
    assert by_path["structure.axis"].startswith("must be 'global_phase'")

    diags = validate({
        "command": "check-integrability",
        "modes": 1,
        "structure": {"kind": "twisted"},
    })
    assert diags == [{
        "path": "structure.kind",
        "message": "must be one of: standard, constant, rotated, explicit",
    }]


def test_validate_safety_bounds():
    diags = validate({
        "command": "coherent-report", "dim": 64, "radius": 6.0, "states": ["4.0"],
    })
    assert len(diags) == 1
    assert diags[0]["path"] == "states[0]"
    assert "truncation safety bound" in diags[0]["message"]

    diags = validate({
        "command": "foliate", "leaf_dim": 16, "complement_dim": 16,
        "radius": 4.0, "leaf_value": "3+3i",
    })
    assert [d["path"] for d in diags] == ["leaf_value"]


def test_validate_foliate_mode_split():
    diags = validate({
        "command": "foliate", "ambient_modes": 2, "leaf_modes": 2,
        "leaf_dim": 16, "complement_dim": 16, "radius": 4.0,
    })
    assert diags == [{
        "path": "leaf_modes", "message": "must be smaller than ambient_modes",
    }]


def test_apply_defaults_deep_merge():
    merged = apply_defaults({
        "command": "check-integrability",
        "modes": 1,
        "grid": {"count": 5},
        "tolerances": {"integrability": 0.3},
    })
    assert merged["grid"] == {"low": -1.0, "high": 1.0, "count": 5}
    assert merged["tolerances"]["integrability"] == 0.3
    assert merged["tolerances"]["structure"] == 1e-9
    assert merged["modes"] == 1


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config file"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError, match="must be a JSON object"):
        load_config(arr)


# ---------------------------------------------------------------------------
# report serialization


def test_to_jsonable_values():
    assert to_jsonable(1 - 2j) == {"re": 1.0, "im": -2.0}
    assert to_jsonable(np.float64(0.5)) == 0.5
    assert to_jsonable(np.int64(3)) == 3
    assert to_jsonable(np.bool_(True)) is True
    assert to_jsonable(np.complex128(2j)) == {"re": 0.0, "im": 2.0}
    assert to_jsonable(np.arange(4).reshape(2, 2)) == [[0, 1], [2, 3]]
    assert to_jsonable((1, (2, 3))) == [1, [2, 3]]
    assert to_jsonable(float("inf")) == "inf"
    assert to_jsonable(float("nan")) == "nan"

    @dataclass
    class Row:
        label: str
        value: complex

    assert to_jsonable(Row("x", 1j)) == {"label": "x", "value": {"re": 0.0, "im": 1.0}}
    with pytest.raises(TypeError, match="cannot serialize"):
        to_jsonable(object())


def test_canonical_dumps_shape():
    text = canonical_dumps({"b": 1, "a": [1e300, "s"]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"b": 1, "a": [1e300, "s"]}


def test_config_hash_is_order_insensitive():
    first = config_hash({"x": 1, "y": {"a": 2, "b": 3}})
    second = config_hash({"y": {"b": 3, "a": 2}, "x": 1})
    assert first == second
    assert re.fullmatch(r"[0-9a-f]{64}", first)
    assert config_hash({"x": 2, "y": {"a": 2, "b": 3}}) != first


def test_build_report_pass_logic():
    records = [
        {"name": "a", "status": "pass", "headline": "", "details": {}},
        {"name": "b", "status": "info", "headline": "", "details": {}},
    ]
    report = build_report("torus", {"command": "torus"}, records)
    assert report["passed"] is True
    records.append({"name": "c", "status": "fail", "headline": "", "details": {}})
    assert build_report("torus", {"command": "torus"}, records)["passed"] is False
    records[-1]["status"] = "error"
    assert build_report("torus", {"command": "torus"}, records)["passed"] is False


# ---------------------------------------------------------------------------
# command-line matrix


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_cli_shipped_config_passes(path, tmp_path):
    out = tmp_path / "report.json"
    proc = _run_cli("run", "--config", str(path), "--out", str(out), "--quiet")
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is True
    assert report["schema_version"] == 1
    assert isinstance(report["wall_clock_s"], float)
    assert report["config_sha256"] == config_hash(load_config(path))
    assert all(r["status"] in ("pass", "info") for r in report["records"])


def test_cli_named_subcommand_accepts_matching_config():
    path = ROOT / "configs" / "torus_moduli.json"
    proc = _run_cli("torus", "--config", str(path), "--quiet")
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "torus"


def test_cli_named_subcommand_rejects_mismatch():
    path = ROOT / "configs" / "torus_moduli.json"
    proc = _run_cli("foliate", "--config", str(path))
    assert proc.returncode == 2
    assert "config names command 'torus'" in proc.stderr


def test_cli_failing_check_exits_1(tmp_path):
    cfg = tmp_path / "shrunk.json"
    cfg.write_text(json.dumps({
        "command": "coherent-report", "dim": 64, "radius": 1.0,
    }), encoding="utf-8")
    out = tmp_path / "report.json"
    proc = _run_cli("run", "--config", str(cfg), "--out", str(out))
    assert proc.returncode == 1
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"] is False
    statuses = {r["name"]: r["status"] for r in report["records"]}
    assert statuses["canonical_commutator"] == "pass"
    assert statuses["resolution_of_unity"] == "fail"
    assert "CHECKS FAILED" in proc.stdout


def test_cli_runtime_error_becomes_record(tmp_path):
    # radius passes validation but trips the quadrature rim guard at runtime
    cfg = tmp_path / "rim.json"
    cfg.write_text(json.dumps({
        "command": "coherent-report", "dim": 64, "radius": 20.0,
    }), encoding="utf-8")
    out = tmp_path / "report.json"
    proc = _run_cli("run", "--config", str(cfg), "--out", str(out), "--quiet")
    assert proc.returncode == 1
    report = json.loads(out.read_text(encoding="utf-8"))
    statuses = {r["name"]: r["status"] for r in report["records"]}
    assert statuses["canonical_commutator"] == "pass"
    assert statuses["resolution_of_unity"] == "error"
    record = next(r for r in report["records"] if r["status"] == "error")
    assert record["headline"].startswith("error:")


def test_cli_bad_configs_exit_2(tmp_path):
    missing = tmp_path / "missing.json"
    proc = _run_cli("run", "--config", str(missing))
    assert proc.returncode == 2
    assert "cannot read config file" in proc.stderr

    broken = tmp_path / "broken.json"
    broken.write_text("{oops", encoding="utf-8")
    proc = _run_cli("run", "--config", str(broken))
    assert proc.returncode == 2
    assert "not valid JSON" in proc.stderr

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"command": "coherent-report"}), encoding="utf-8")
    proc = _run_cli("run", "--config", str(incomplete))
    assert proc.returncode == 2
    assert "error: dim: required field missing" in proc.stderr
    assert "error: radius: required field missing" in proc.stderr


def test_cli_validate_subcommand(tmp_path):
    path = ROOT / "configs" / "coherent_report.json"
    proc = _run_cli("validate", "--config", str(path))
    assert proc.returncode == 0
    assert proc.stdout.strip() == "config ok"
    proc = _run_cli("validate", "--config", str(path), "--quiet")
    assert proc.returncode == 0
    assert proc.stdout == ""

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"command": "coherent-report"}), encoding="utf-8")
    proc = _run_cli("validate", "--config", str(incomplete))
    assert proc.returncode == 2
    assert "dim: required field missing" in proc.stdout
    assert "radius: required field missing" in proc.stdout


def test_cli_report_on_stdout_without_out():
    path = ROOT / "configs" / "torus_moduli.json"
    proc = _run_cli("run", "--config", str(path))
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    assert report["command"] == "torus"
    assert "all checks passed" in proc.stderr

    quiet = _run_cli("run", "--config", str(path), "--quiet")
    assert quiet.stderr == ""
    assert _strip_clock(json.loads(quiet.stdout)) == _strip_clock(report)


def test_cli_reports_are_deterministic(tmp_path):
    path = ROOT / "configs" / "torus_moduli.json"
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert _run_cli("run", "--config", str(path), "--out", str(first), "--quiet").returncode == 0
    assert _run_cli("run", "--config", str(path), "--out", str(second), "--quiet").returncode == 0
    text_a = first.read_text(encoding="utf-8")
    text_b = second.read_text(encoding="utf-8")
    assert _strip_clock(text_a) == _strip_clock(text_b)
    assert '"wall_clock_s"' in text_a


def test_cli_version_and_usage():
    proc = _run_cli("--version")
    assert proc.returncode == 0
    assert proc.stdout.strip().startswith("phaseq ")
    proc = _run_cli("run")
    assert proc.returncode == 2
    assert "--config" in proc.stderr
