import json
import math
from pathlib import Path

import pytest

from fekete_lab.cli import RunConfig, UsageError, main, parse_config

DATA = Path(__file__).resolve().parent.parent / "data"


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("example", ["spiral2d", "scaled-basis", "uc-witness", "incomplete", "nonconvex-alt"])
def test_reproduce_bundles_pass(example, capsys):
    code, out, _ = run(["reproduce", example], capsys)
    payload = json.loads(out)
    assert code == 0 and payload["ok"]
    assert all(c["passed"] for c in payload["checks"])


def test_verify_exit_codes(capsys):
    assert run(["verify", "--family", "spiral2d", "--band", "ratio:0.5:2", "--max-sum", "400"], capsys)[0] == 0
    assert run(["verify", "--family", "linear:bound=0,seed=1", "--band", "full", "--max-sum", "300"], capsys)[0] == 0
    bad = ["verify", "--family", "spiral2d-general:delta=0.5", "--max-sum", "200"]
    assert run(bad, capsys)[0] == 1
    assert run(bad + ["--expect-violation"], capsys)[0] == 0
    assert run(["verify", "--family", "scaled-basis", "--max-sum", "50", "--expect-violation"], capsys)[0] == 1


@pytest.mark.parametrize("argv", [
    ["verify", "--family", "nope"],
    ["verify", "--family", "spiral2d", "--band", "ratio:x"],
    ["verify"],
    ["modulus", "--space", "lp:0.5"],
    ["bogus"],
    ["reproduce", "unknown"],
    ["spectral", "--matrix", "/nonexistent.csv"],
    ["verify", "--family", "spiral2d", "--max-sum", "ten"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


def test_generator_failure_exits_3(capsys):
    code, _, err = run(["verify", "--family", "incomplete:loglog=log10", "--max-sum", "10"], capsys)
    assert code == 3 and "generator" in err


def test_modulus_command(capsys):
    code, out, _ = run(["modulus", "--space", "euclidean:3", "--eps", "1.0", "--samples", "20000", "--seed", "7"], capsys)
    est = json.loads(out)["estimates"][0]
    assert code == 0 and abs(est["delta_hat"] - (2 - math.sqrt(3))) <= 1e-3


def test_limit_and_spectral(capsys):
    code, out, _ = run(["limit", "--family", "scaled-basis", "--N", "200"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "DivergenceEvidence"
    code, out, _ = run(["spectral", "--matrix", str(DATA / "diag21.csv"), "--N", "32"], capsys)
    assert code == 0 and json.loads(out)["roots"] == [2.0] * 32
    code, out, _ = run(["spectral", "--matrix", str(DATA / "nilpotent.csv"), "--N", "8"], capsys)
    assert json.loads(out)["radius_estimate"] == 0.0


@pytest.mark.parametrize("fmt", ["csv", "human"])
def test_other_formats(fmt, capsys, tmp_path):
    target = tmp_path / "out.txt"
    code = main(["verify", "--family", "spiral2d-general:delta=0.5", "--max-sum", "80",
                 "--format", fmt, "--output", str(target), "--expect-violation"])
    assert code == 0
    text = target.read_text()
    if fmt == "csv":
        assert text.startswith("n,m,lhs,rhs,margin")
    else:
        assert "violation" in text


@pytest.mark.parametrize("argv", [
    ["verify", "--family", "spiral2d", "--band", "ratio:0.5:2", "--max-sum", "5000", "--tolerance", "1e-12"],
    ["modulus", "--space", "lp:3", "--eps", "0.5,1.0", "--samples", "500", "--seed", "3", "--dim", "4"],
    ["limit", "--family", "uc-witness", "--N", "64", "--window", "2.0", "--format", "human"],
    ["spectral", "--matrix", "m.csv", "--N", "9", "--seed", "1"],
    ["reproduce", "incomplete", "--output", "x.json"],
    ["verify", "--family", "spiral2d", "--expect-violation"],
])
def test_run_config_round_trip(argv):
    cfg = parse_config(argv)
    assert parse_config(cfg.to_argv()) == cfg


def test_config_file_merge_and_rejection(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"family": "scaled-basis", "max_sum": 40, "band": "ratio:0.5:2"}))
    cfg = parse_config(["verify", "--config", str(cfg_file), "--max-sum", "60"])
    assert cfg.family == "scaled-basis" and cfg.max_sum == 60 and cfg.band == "ratio:0.5:2"
    cfg_file.write_text(json.dumps({"family": "scaled-basis", "colour": "red"}))
    with pytest.raises(UsageError):
        parse_config(["verify", "--config", str(cfg_file)])
    cfg_file.write_text(json.dumps({"samples": 10}))
    with pytest.raises(UsageError):
        parse_config(["verify", "--config", str(cfg_file)])
    assert RunConfig("verify").to_argv() == ["verify"]


@pytest.mark.parametrize("argv", [
    ["verify", "--family", "spiral2d-general:delta=0.5", "--max-sum", "300", "--expect-violation"],
    ["modulus", "--space", "convex-l1", "--eps", "0.5,1.5", "--samples", "2000", "--seed", "11"],
    ["limit", "--family", "incomplete", "--N", "64"],
    ["reproduce", "scaled-basis"],
])
def test_json_output_is_byte_identical(argv, tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("FEKETE_THREADS", threads)
        target = tmp_path / f"r{threads}.json"
        main(argv + ["--output", str(target)])
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
