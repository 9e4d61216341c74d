import json
import subprocess
import sys

import pytest

from zeroconc import cli, spectral


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def manifest(out):
    return json.loads(out.strip().splitlines()[-1])


def test_kac_rice(capsys, tmp_path):
    code, out, _ = run(capsys, "kac-rice", "--model", "gaussian", "--out", str(tmp_path))
    assert code == 0
    assert "alpha 0.318310" in out
    assert manifest(out)["command"] == "kac-rice"


def test_assumption_a_band_fails(capsys, tmp_path):
    code, out, _ = run(capsys, "assumption-a", "--model", "band", "--xstar", "6.283185307179586",
                       "--horizon", "10", "--out", str(tmp_path))
    assert code == 0
    assert "verdict fails(r1prime)" in out


def test_zeros_deterministic(capsys, tmp_path):
    outs = []
    for d in ("a", "b"):
        code, out, _ = run(capsys, "zeros", "--T", "30", "--seed", "4", "--n-nodes", "128",
                           "--out", str(tmp_path / d))
        assert code == 0
        outs.append((tmp_path / d / "zeros.csv").read_bytes())
    assert outs[0] == outs[1]


def test_config_overrides_flags(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"T": 12.0, "seed": 9, "n-nodes": 128}))
    code, out, _ = run(capsys, "zeros", "--T", "500", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 0
    code2, out2, _ = run(capsys, "zeros", "--T", "12", "--seed", "9", "--n-nodes", "128",
                         "--out", str(tmp_path / "x"))
    assert manifest(out)["count"] == manifest(out2)["count"]


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "kac-rice", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 2 and "bogus" in err


def test_env_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ZEROCONC_OUT", str(tmp_path / "env"))
    code, out, _ = run(capsys, "zeros", "--T", "10", "--n-nodes", "128")
    assert code == 0
    assert (tmp_path / "env" / "zeros.csv").exists()


def test_invalid_input_exit_two(capsys, tmp_path):
    assert run(capsys, "kac-rice", "--model", "nope", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "tail", "--reps", "10", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "no-such-command")[0] == 2


def test_runtime_failure_exit_one(capsys, tmp_path, monkeypatch):
    def broken(model):
        raise spectral.QuadratureError("no convergence", 1.0)
    monkeypatch.setattr(spectral, "kac_rice_alpha", broken)
    code, _, err = run(capsys, "kac-rice", "--out", str(tmp_path))
    assert code == 1 and "QuadratureError" in err


def test_band_manifest_is_valid_json(capsys, tmp_path):
    code, out, _ = run(capsys, "kac-rice", "--model", "band", "--out", str(tmp_path))
    assert code == 0
    manifest(out)


def test_tail_and_mean(capsys, tmp_path):
    code, out, _ = run(capsys, "tail", "--T", "10,20", "--eta", "0.1", "--reps", "128",
                       "--n-nodes", "128", "--out", str(tmp_path / "t"))
    assert code == 0 and (tmp_path / "t" / "tail.csv").exists()
    code, out, _ = run(capsys, "mean", "--T", "20", "--reps", "64", "--n-nodes", "128",
                       "--out", str(tmp_path / "m"))
    assert code == 0 and out.startswith("mean ")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "zeroconc", "kac-rice", "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.strip().splitlines()[-1])["backend"] in ("cython", "python")
