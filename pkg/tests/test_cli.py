"""The basecamp command: every subcommand against the demo tree."""

import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from basecamp.cli import main
from basecamp.sentinel import REPORT_SCHEMA

DEMO = Path(__file__).resolve().parent.parent / "demo"


def run_cli(capsys, argv):
    rc = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


@pytest.fixture()
def absorb_dfg(tmp_path, capsys):
    out = tmp_path / "absorb-dfg.json"
    rc, _, _ = run_cli(capsys, ["graph", DEMO / "absorb.cdr", "--out", out])
    assert rc == 0
    return out


# ------------------------------------------------------------ exit codes


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--help"])
    assert e.value.code == 0
    assert "compile" in capsys.readouterr().out


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_missing_file_is_a_diagnostic(capsys):
    rc, _, err = run_cli(capsys, ["compile", "no-such-kernel.ekl"])
    assert rc == 1
    assert err.startswith("basecamp compile:")


def test_bad_json_is_a_diagnostic(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{this is not json")
    rc, _, err = run_cli(
        capsys, ["plan", "--dfg", bad, "--platform", DEMO / "platform.json"])
    assert rc == 1
    assert "bad JSON input" in err


# --------------------------------------------------------------- compile


def test_compile_ir_stdout_deterministic(capsys):
    rc, out, _ = run_cli(capsys, ["compile", DEMO / "major_absorber.ekl"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["name"] == "major_absorber"
    assert set(doc) == {"name", "statements", "tensors"}
    rc2, out2, _ = run_cli(capsys, ["compile", DEMO / "major_absorber.ekl"])
    assert rc2 == 0 and out2 == out


def test_compile_c_matches_library_emission(tmp_path, capsys):
    from basecamp.ekl import analyze, parse_kernel
    from basecamp.numerics import parse_format
    from basecamp.olympus import KernelConfig
    from basecamp.olympus.hlsgen import emit_hls_c
    from basecamp.tensorir import lower

    out = tmp_path / "major_absorber.c"
    rc, _, _ = run_cli(capsys, [
        "compile", DEMO / "major_absorber.ekl", "--emit", "c",
        "--format", "fixed:8:8", "--replication", "2", "--packing", "4",
        "--double-buffer", "--tile", "512", "--out", out])
    assert rc == 0
    got = out.read_text()
    assert "#pragma olympus replicate R=2" in got

    fmt = parse_format("fixed:8:8")
    src = (DEMO / "major_absorber.ekl").read_text()
    ir = lower(analyze(parse_kernel(src), default_format=fmt),
               name="major_absorber")
    cfg = KernelConfig(node_id="major_absorber", replication=2, packing=4,
                       double_buffered=True, tile_elements=512,
                       buffer_bytes=512 * 2 * 2)
    assert got == emit_hls_c(ir, cfg)


# ----------------------------------------------------------------- graph


def test_graph_round_trips(absorb_dfg, capsys):
    from basecamp.coord import dfg_from_json

    doc = json.loads(absorb_dfg.read_text())
    g = dfg_from_json(doc)
    assert g.to_json_text() == absorb_dfg.read_text()
    rc, out, _ = run_cli(capsys, ["graph", DEMO / "absorb.cdr"])
    assert rc == 0 and out == absorb_dfg.read_text()


# ------------------------------------------------------------------ plan


def test_plan_absorb_frozen(absorb_dfg, capsys):
    rc, out, _ = run_cli(capsys, [
        "plan", "--dfg", absorb_dfg, "--platform", DEMO / "platform.json",
        "--kernels-dir", DEMO])
    assert rc == 0
    doc = json.loads(out)
    assert doc["objective"] == "latency"
    assert doc["makespan_us"] == pytest.approx(2.6284333333333336, rel=1e-12)
    (k,) = doc["kernels"]
    assert (k["replication"], k["packing"], k["double_buffered"],
            k["tile_elements"]) == (8, 8, True, 1024)
    rc2, out2, _ = run_cli(capsys, [
        "plan", "--dfg", absorb_dfg, "--platform", DEMO / "platform.json",
        "--kernels-dir", DEMO])
    assert out2 == out


def test_plan_mapmatch_frozen(tmp_path, capsys):
    dfg = tmp_path / "mapmatch-dfg.json"
    rc, _, _ = run_cli(capsys, ["graph", DEMO / "mapmatch.cdr", "--out", dfg])
    assert rc == 0
    rc, out, _ = run_cli(capsys, [
        "plan", "--dfg", dfg, "--platform", DEMO / "platform.json"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["makespan_us"] == pytest.approx(0.126, rel=1e-12)
    (k,) = doc["kernels"]
    assert (k["replication"], k["packing"], k["double_buffered"],
            k["tile_elements"]) == (8, 8, False, 1024)


# -------------------------------------------------------------- simulate


def test_simulate_demo_frozen(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    rc, out, _ = run_cli(capsys, [
        "simulate", "--cluster", DEMO / "cluster.json",
        "--tasks", DEMO / "tasks.json", "--trace", trace])
    assert rc == 0
    assert json.loads(out) == {
        "makespan": 970.0, "planned_makespan": 970.0,
        "events": 6, "reschedules": 0}
    lines = trace.read_text().splitlines()
    assert lines[-1] == '{"kind": "makespan", "time": 970.0}'
    first = trace.read_bytes()
    rc, _, _ = run_cli(capsys, [
        "simulate", "--cluster", DEMO / "cluster.json",
        "--tasks", DEMO / "tasks.json", "--trace", trace])
    assert rc == 0 and trace.read_bytes() == first


def test_simulate_accepts_architecture_plan(absorb_dfg, tmp_path, capsys):
    plan = tmp_path / "plan.json"
    rc, _, _ = run_cli(capsys, [
        "plan", "--dfg", absorb_dfg, "--platform", DEMO / "platform.json",
        "--kernels-dir", DEMO, "--out", plan])
    assert rc == 0
    rc, out, _ = run_cli(capsys, [
        "simulate", "--plan", plan, "--cluster", DEMO / "cluster.json",
        "--tasks", DEMO / "tasks.json"])
    assert rc == 0
    # requests still say cpu, so the schedule is unchanged; the patched
    # fpga duration only matters once a tuner switches the request
    assert json.loads(out)["makespan"] == 970.0


# ------------------------------------------------------------------ tune


def test_tune_demo_picks_fpga(absorb_dfg, tmp_path, capsys):
    plan = tmp_path / "plan.json"
    run_cli(capsys, ["plan", "--dfg", absorb_dfg,
                     "--platform", DEMO / "platform.json",
                     "--kernels-dir", DEMO, "--out", plan])
    rc, out, _ = run_cli(capsys, [
        "tune", "--plan", plan, "--cluster", DEMO / "cluster.json",
        "--tasks", DEMO / "tasks.json", "--rounds", "12"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["chosen"] == {"variant": "fpga"}
    rows = {r["config"]["variant"]: r for r in doc["state"]["results"]}
    assert rows["cpu"]["count"] == 1
    assert rows["cpu"]["ema"] == pytest.approx(970.0)
    assert rows["fpga"]["count"] == 11
    assert rows["fpga"]["ema"] == pytest.approx(364.1004333333333)


def test_tune_needs_a_dual_variant_task(capsys):
    rc, _, err = run_cli(capsys, [
        "tune", "--cluster", DEMO / "cluster.json",
        "--tasks", DEMO / "tasks.json"])
    assert rc == 1
    assert "no task offers both cpu and fpga variants" in err


# ---------------------------------------------------------------- detect


def test_detect_demo_frozen(capsys):
    rc, out, _ = run_cli(capsys, [
        "detect", "--data", DEMO / "telemetry.csv",
        "--labels", DEMO / "labels.csv", "--budget-trials", "40"])
    assert rc == 0
    doc = json.loads(out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert doc["anomalies"] == [30, 120, 210, 300, 380]
    assert doc["score"] == 1.0
    assert doc["model"]["kind"] == "moving-average-residual"


def test_detect_unlabeled_warns_but_works(capsys):
    rc, out, err = run_cli(capsys, ["detect", "--data", DEMO / "telemetry.csv"])
    assert rc == 0
    assert "no labels given" in err
    doc = json.loads(out)
    assert doc["score"] is None
    assert doc["model"] == dict(doc["model"], kind="rolling-zscore", w=64, k=3.0)
    assert doc["anomalies"] == [30, 120, 210, 300, 380]


def test_detect_requires_data(capsys):
    rc, _, err = run_cli(capsys, ["detect"])
    assert rc == 1
    assert "--data is required" in err


def test_detect_rerun_is_byte_identical_across_processes():
    # the model's fit counter is process-global, so byte equality is a
    # fresh-process property; this also exercises the console script
    argv = ["basecamp", "detect", "--data", str(DEMO / "telemetry.csv"),
            "--labels", str(DEMO / "labels.csv"), "--budget-trials", "25"]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.stdout


# ------------------------------------------------------------------- run


def test_run_absorb_matches_library(capsys):
    from basecamp.cli.main import _payload_to_json
    from basecamp.coord import build_dfg, execute_dfg, parse_coord
    from basecamp.tensorir import DenseTensor

    rc, out, _ = run_cli(capsys, [
        "run", DEMO / "absorb.cdr", "--inputs", DEMO / "inputs"])
    assert rc == 0
    doc = json.loads(out)
    assert set(doc) == {"shape", "values"}

    fn = parse_coord((DEMO / "absorb.cdr").read_text())
    g = build_dfg(fn)
    src = {"major_absorber.ekl": (DEMO / "major_absorber.ekl").read_text()}
    inputs = {}
    for name, _t in g.inputs:
        d = json.loads((DEMO / "inputs" / f"{name}.json").read_text())
        inputs[name] = DenseTensor(tuple(d["shape"]), d["values"])
    want = execute_dfg(g, {}, inputs, schedule_seed=0, kernel_sources=src)
    assert doc == _payload_to_json(want)

    rc2, out2, _ = run_cli(capsys, [
        "run", DEMO / "absorb.cdr", "--inputs", DEMO / "inputs"])
    assert out2 == out


def test_run_missing_payload(tmp_path, capsys):
    rc, _, err = run_cli(capsys, [
        "run", DEMO / "absorb.cdr", "--inputs", tmp_path])
    assert rc == 1
    assert "no payload for input" in err


def test_run_opaque_kernels_are_rejected(capsys):
    rc, _, err = run_cli(capsys, [
        "run", DEMO / "mapmatch.cdr", "--inputs", DEMO / "inputs"])
    assert rc == 1
    assert "missing implementation" in err
