import json

import pytest
from fastapi.testclient import TestClient

from equivar.cli import main
from equivar.scenarios import builtin, save
from equivar.serialize import dumps
from equivar.service import create_app

from conftest import display_probe_cycle


def test_verify_passes_and_writes_the_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["verify", "--scenario", "thermostat_basic",
                 "--json", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] and doc["mode"] == "brute"
    assert "PASS" in capsys.readouterr().out


def test_verify_exit_code_tracks_the_verdict(capsys):
    assert main(["verify", "--scenario", "thermostat_scrambled"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_cli_and_service_emit_identical_bytes(tmp_path):
    out = tmp_path / "cli.json"
    main(["verify", "--scenario", "thermostat_basic", "--mode", "markov",
          "--json", str(out)])
    with TestClient(create_app()) as client:
        response = client.post("/api/verify", json={
            "scenario": "thermostat_basic", "mode": "markov",
        })
    assert out.read_bytes() == response.content


def test_verify_stdout_json_is_the_document_plus_newline(tmp_path, capsys):
    code = main(["verify", "--scenario", "thermostat_basic", "--json", "-"])
    assert code == 0
    captured = capsys.readouterr().out
    assert captured.endswith("}\n") and not captured.endswith("}\n\n")
    assert json.loads(captured)["passed"]


def test_verify_region_from_actions_file(tmp_path):
    actions = tmp_path / "region.json"
    actions.write_text(json.dumps({
        "actions": [{"do": {"wheel": "4"}}, {"do": {"wheel": "6"}}],
    }))
    out = tmp_path / "report.json"
    code = main(["verify", "--scenario", "thermostat_basic",
                 "--mode", "region", "--actions", str(actions),
                 "--json", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["checked"] == 2


def test_load_prints_structure_and_validates(tmp_path, capsys):
    path = tmp_path / "scenario.json"
    save(builtin("thermostat_basic"), path)
    assert main(["load", "--scenario", str(path)]) == 0
    text = capsys.readouterr().out
    assert "wheel" in text and "heat" in text
    assert "OK" in text


def test_load_rejects_malformed_files(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": "scenario/1", "name": 3}')
    assert main(["load", "--scenario", str(bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_train_then_check_nir(tmp_path, capsys):
    overlay = tmp_path / "small.json"
    overlay.write_text(json.dumps({
        "dataset": {"size": 600},
        "train": {"epochs": 120},
    }))
    model_path = tmp_path / "model.json"
    trace_path = tmp_path / "trace.csv"
    code = main(["train-nir", "--scenario", "braking",
                 "--config", str(overlay),
                 "--out", str(model_path), "--trace", str(trace_path)])
    assert code == 0
    meta = json.loads(model_path.read_text())["meta"]
    assert meta["config"]["dataset"]["size"] == 600
    assert meta["config"]["train"]["learning_rate"] == 0.05  # overlay merges
    header = trace_path.read_text().splitlines()[0]
    assert "task" in header
    capsys.readouterr()

    code = main(["check-nir", "--model", str(model_path),
                 "--scenario", "braking",
                 "--json", str(tmp_path / "check.json")])
    assert code == 0
    doc = json.loads((tmp_path / "check.json").read_text())
    assert doc["mode"] == "region" and doc["passed"]


def test_turing_script_round_trip(tmp_path, capsys):
    thermostat = builtin("thermostat_basic")
    from equivar.turing import make_oracle_script

    probes = display_probe_cycle(thermostat.machine.system, n=12)
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(
        make_oracle_script(thermostat, "comfort", probes, seed=21)))
    first = tmp_path / "transcript1.json"
    code = main(["turing", "--scenario", "thermostat_basic",
                 "--script", str(script_path), "--json", str(first)])
    assert code == 0
    text = capsys.readouterr().out
    assert "mean score 1.0000" in text and "interpretable" in text

    # replaying the exported transcript reproduces it byte for byte
    second = tmp_path / "transcript2.json"
    code = main(["turing", "--scenario", "thermostat_basic",
                 "--script", str(first), "--json", str(second)])
    assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_turing_flags_a_scrambled_reading(tmp_path, capsys):
    scrambled = builtin("thermostat_scrambled")
    from equivar.turing import make_oracle_script

    probes = display_probe_cycle(scrambled.machine.system, n=20)
    script_path = tmp_path / "script.json"
    script_path.write_text(json.dumps(
        make_oracle_script(scrambled, "comfort", probes, seed=21)))
    code = main(["turing", "--scenario", "thermostat_scrambled",
                 "--script", str(script_path)])
    assert code == 1
    assert "not interpretable" in capsys.readouterr().out


def test_turing_needs_a_mode(capsys):
    assert main(["turing", "--scenario", "thermostat_basic"]) == 2
    assert "need --script" in capsys.readouterr().err


def test_report_renders_markdown(tmp_path):
    report = tmp_path / "report.json"
    main(["verify", "--scenario", "thermostat_scrambled", "--json", str(report)])
    out = tmp_path / "report.md"
    code = main(["report", "--in", str(report), "--out", str(out),
                 "--title", "Scrambled reading"])
    assert code == 0
    text = out.read_text()
    assert text.startswith("# Scrambled reading")
    assert "do(wheel=6)" in text
    assert "**FAIL**" in text


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["verify", "--scenario", "builtin:missing"]) == 2
    assert main(["verify"]) == 2  # argparse: missing required option
    assert main(["frobnicate"]) == 2
    assert main(["verify", "--scenario", str(tmp_path / "gone.json")]) == 2
    capsys.readouterr()


def test_json_decode_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "actions.json"
    bad.write_text("{oops")
    code = main(["verify", "--scenario", "thermostat_basic",
                 "--mode", "region", "--actions", str(bad)])
    assert code == 2
    assert "error" in capsys.readouterr().err
