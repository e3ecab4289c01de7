import json
import subprocess
import sys

import pytest

from otto2q import cli


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run_main(tmp_path, command, cfg=None, *extra):
    argv = []
    if cfg is not None:
        argv += ["--config", write(tmp_path, cfg)]
    out = tmp_path / "out.csv"
    code = cli.main([*argv, "--out", str(out), *extra, command])
    return code, (out.read_text() if out.exists() else None)


REGIME_CFG = {"grid": {"p": {"min": 0.0, "max": 1.0, "steps": 5}, "t": {"min": 0.1, "max": 0.5, "steps": 5}}}


def test_regime_map_table_shape(tmp_path):
    code, text = run_main(tmp_path, "regime-map", REGIME_CFG)
    assert code == 0
    table = cli.ResultTable.from_csv(text)
    assert table.columns[:3] == ["p", "t", "regime"]
    assert len(table.rows) == 25
    assert text.endswith("\n") and "\r" not in text


def test_round_trip(tmp_path):
    _, text = run_main(tmp_path, "evolve", REGIME_CFG)
    table = cli.ResultTable.from_csv(text)
    assert table.to_csv() == text


def test_float_format_round_trips():
    x = 0.1 + 0.2
    assert float(cli.format_cell(x)) == x
    assert cli.format_cell(None) == "" and cli.format_cell(float("nan")) == ""
    assert cli.format_cell(True) == "true"


def test_determinism_across_workers(tmp_path):
    outputs = set()
    for workers in ("1", "4", "1"):
        code, text = run_main(tmp_path, "regime-map", REGIME_CFG, "--workers", workers)
        assert code == 0
        outputs.add(text)
    assert len(outputs) == 1


def test_unknown_quantity_rejected(tmp_path):
    code, _ = run_main(tmp_path, "evolve", {"outputs": ["foo"]})
    assert code == cli.EXIT_CONFIG


def test_json_error_reports_location(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"grid": {\n  "p": [1,]\n}}')
    assert cli.main(["--config", str(path), "evolve"]) == cli.EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("cfg", [
    {"params": {"omega_b": 2.0}},
    {"params": {"bogus": 1}},
    {"grid": {"p": {"min": 0, "max": 1, "steps": 0}}},
    {"grid": {"p": {"min": 0, "max": 2, "steps": 3}}},
    {"grid": {"r12": {"min": 0, "max": 1, "steps": 2}}},
    {"grid": {"t": {"min": 0.0, "max": 0.015, "steps": 2}}},
    {"options": {"operators": "other"}},
    {"surprise": 1},
])
def test_config_errors(tmp_path, cfg):
    code, _ = run_main(tmp_path, "evolve", cfg)
    assert code == cli.EXIT_CONFIG


def test_single_point_grid(tmp_path):
    code, text = run_main(tmp_path, "evolve", {"grid": {"p": {"min": 0.5, "max": 0.5, "steps": 1}}})
    assert code == 0
    assert len(cli.ResultTable.from_csv(text).rows) == 1


def test_coherence_series_for_three_p(tmp_path):
    cfg = {"grid": {"p": {"min": 0.2, "max": 0.8, "steps": 3}, "t": {"min": 0.0, "max": 0.1, "steps": 11}},
           "outputs": ["coherence"]}
    code, text = run_main(tmp_path, "evolve", cfg)
    table = cli.ResultTable.from_csv(text)
    assert code == 0 and sorted({r[0] for r in table.rows}) == pytest.approx([0.2, 0.5, 0.8])
    assert len(table.rows) == 33


def test_local_description_flag(tmp_path):
    code, text = run_main(tmp_path, "regime-map", REGIME_CFG, "--description", "local")
    assert code == 0
    _, text_global = run_main(tmp_path, "regime-map", REGIME_CFG)
    assert text != text_global


def test_spatial_zero_separation(tmp_path):
    cfg = {"grid": {"r12": {"min": 0.0, "max": 2.0, "steps": 3}}}
    code, text = run_main(tmp_path, "spatial", cfg)
    rows = cli.ResultTable.from_csv(text).rows
    assert code == 0 and rows[0][2] == 1.0


def test_bath_coherence_command(tmp_path):
    code, text = run_main(tmp_path, "bath-coherence", {"bath": {"cutoff": 10}})
    table = cli.ResultTable.from_csv(text)
    assert code == 0 and [r[0] for r in table.rows] == ["longitudinal", "transverse"]


def test_validate_command(tmp_path):
    code, text = run_main(tmp_path, "validate")
    assert code == 0
    assert all(row[-1] is True for row in cli.ResultTable.from_csv(text).rows)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "otto2q", "bath-coherence"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("coupling,")
