#!/usr/bin/env python3
"""End-to-end checks of the statusloop command-line tool."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

BIN = sys.argv[1]


def run(*args, expect=0):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    assert proc.returncode == expect, (
        f"{args}: exit {proc.returncode} (expected {expect})\n"
        f"stdout:\n{proc.stdout}\nstderr:\n{proc.stderr}"
    )
    return proc


def field(output, name):
    for line in output.splitlines():
        parts = line.split()
        if parts and parts[0] == name:
            return parts[1]
    raise AssertionError(f"field {name} not found in:\n{output}")


def test_analyze():
    out = run("analyze").stdout
    assert abs(float(field(out, "p_succ_closed")) - 0.620854) < 1e-5
    assert abs(float(field(out, "upper")) - 0.787943) < 1e-5
    assert abs(float(field(out, "lower")) - 0.368885) < 1e-5
    # byte-identical repetition
    assert out == run("analyze").stdout

    csv_out = run("analyze", "--format", "csv").stdout
    assert csv_out.startswith("field,value\n")
    assert "p_succ_closed,0.620854" in csv_out

    json_out = run("analyze", "--format", "json-like").stdout
    parsed = json.loads(json_out)
    assert abs(parsed["p_succ_closed"] - 0.620854) < 1e-5

    # validation failure names the field and exits 1
    err = run("analyze", "--threads", "0", expect=1).stderr
    assert "c_threads" in err

    # transform quantities go NA when the hazard exceeds the uplink rate
    out = run("analyze", "--lambda-in", "60", "--threads", "1", "--uplink", "20").stdout
    assert field(out, "g_staleness") == "NA"
    assert field(out, "p_succ_transform") == "NA"
    assert field(out, "p_succ_closed") != "NA"
    assert "note:" in out


def test_simulate():
    out1 = run("simulate", "--horizon", "5", "--seed", "1").stdout
    out2 = run("simulate", "--horizon", "5", "--seed", "1").stdout
    assert out1 == out2
    assert field(out1, "n_arr") != "0"

    tiny = run("simulate", "--horizon", "0.001").stdout
    assert "warning:" in tiny

    run("simulate", "--horizon", "5", "--no-drain")

    with tempfile.TemporaryDirectory() as tmp:
        trace = Path(tmp) / "events.jsonl"
        run("simulate", "--horizon", "1", "--trace", str(trace))
        lines = trace.read_text().splitlines()
        assert lines and all(line.startswith("{") for line in lines)
        assert any("task_arrived_at_ap" in line for line in lines)


def test_sweep():
    err = run("sweep", "bogus", expect=1).stderr
    assert "lambda_in" in err and "beta" in err

    with tempfile.TemporaryDirectory() as tmp:
        out = run("sweep", "c_threads", "--horizon", "5", "--seeds", "2",
                  "--out", tmp, "--plot").stdout
        assert "c_threads" in out
        csv_path = Path(tmp) / "c_threads.csv"
        rows = csv_path.read_text().splitlines()
        assert len(rows) == 7  # header + the six thread counts
        assert rows[0].startswith("value,p_succ_mean,p_succ_se,")
        summary = json.loads((Path(tmp) / "c_threads-summary.json").read_text())
        assert summary["sweep"] == "c_threads"
        assert (Path(tmp) / "c_threads.svg").read_text().startswith("<svg")

        # byte-identical rerun
        before = csv_path.read_bytes()
        run("sweep", "c_threads", "--horizon", "5", "--seeds", "2", "--out", tmp)
        assert csv_path.read_bytes() == before

    with tempfile.TemporaryDirectory() as tmp:
        spec = Path(tmp) / "my_sweep.txt"
        spec.write_text("varied=lambda_in\ngrid=20,40\nhorizon=5\n")
        run("sweep", str(spec), "--seeds", "2", "--out", tmp)
        rows = (Path(tmp) / "lambda_in.csv").read_text().splitlines()
        assert len(rows) == 3

    with tempfile.TemporaryDirectory() as tmp:
        out = run("sweep", "all", "--horizon", "2", "--seeds", "2", "--out", tmp).stdout
        csvs = sorted(p.name for p in Path(tmp).glob("*.csv"))
        assert csvs == ["beta.csv", "c_threads.csv", "gamma.csv",
                        "lambda_in.csv", "mu.csv", "r_bar.csv"]
        assert out.count("points") == 6


def test_config_file():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "run.cfg"
        cfg.write_text("lambda-in=50\n")
        out = run("--config", str(cfg), "analyze").stdout
        assert float(field(out, "lambda_star")) < 50.0
        assert float(field(out, "lambda_star")) > 35.0  # the override took effect

        cfg.write_text("lambda-in=50\nnot-a-key=1\n")
        run("--config", str(cfg), "analyze", expect=1)


def test_verify_quick():
    proc = subprocess.run([BIN, "verify", "--quick", "--out",
                           tempfile.mkdtemp(prefix="verify-cli-")],
                          capture_output=True, text=True)
    # 0 = all criteria hold, 2 = at least one reported FAIL; both are valid
    # CLI outcomes, anything else is a crash.
    assert proc.returncode in (0, 2), proc.stderr
    assert "quick verification:" in proc.stdout
    assert "[quick]" in proc.stdout
    assert "[1] fixed-point thinning" in proc.stdout


if __name__ == "__main__":
    test_analyze()
    test_simulate()
    test_sweep()
    test_config_file()
    test_verify_quick()
    print("cli tests passed")
