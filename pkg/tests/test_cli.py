import hashlib
import json

import pytest

from stokesdrop import io, shapes
from stokesdrop.cli import EXIT_CONFIG, EXIT_OK, main


def md5(path):
    return hashlib.md5(path.read_bytes()).hexdigest()


def test_oracle_reference(capsys):
    assert main(["oracle", "annulus", "--l", "1", "--L", "2"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["lam"] == pytest.approx(-1.0) and out["pressure"] == pytest.approx(1.0)


def test_oracle_rejects_time_past_collapse(capsys):
    assert main(["oracle", "annulus", "--l", "1", "--L", "2", "--t", "2"]) == EXIT_CONFIG


def test_usage_errors_exit_with_config_code():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "bogus"])
    assert exc.value.code == EXIT_CONFIG


def test_ubc_of_curve_file(tmp_path, capsys):
    io.write_curve_csv(tmp_path / "e.csv", shapes.ellipse(256, 2.0, 1.0))
    assert main(["ubc", "-i", str(tmp_path / "e.csv")]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["r_omega"] == pytest.approx(0.5, abs=1e-3) and out["active_alternative"] == "curvature"


def test_export_svg_is_deterministic(tmp_path):
    io.write_curve_csv(tmp_path / "a.csv", shapes.annulus(64, 1.0, 2.0))
    for name in ("one.svg", "two.svg"):
        assert main(["export-svg", "-i", str(tmp_path / "a.csv"), "-o", str(tmp_path / name),
                     "--normals", "--show-ubc"]) == EXIT_OK
    assert md5(tmp_path / "one.svg") == md5(tmp_path / "two.svg")


def write_config(tmp_path, **cfg):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def test_simulate_writes_artifacts(tmp_path):
    cfg = write_config(tmp_path, shape={"type": "ellipse", "a": 1.2, "b": 1.0}, N=64, t_end=0.1,
                       fixed_dt=0.02, snapshot_every=5)
    out = tmp_path / "run"
    assert main(["simulate", "-c", str(cfg), "-o", str(out)]) == EXIT_OK
    recs = io.read_jsonl(out / "records.jsonl")
    assert [r["step_index"] for r in recs] == [0, 1, 2, 3, 4, 5]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["stop_reason"] == "t_end reached"
    assert summary["acceptance"]["area_conserved"] and summary["acceptance"]["times_increasing"]
    assert sorted(p.name for p in (out / "snapshots").iterdir()) == ["curve_000000.csv", "curve_000005.csv"]
    b, _ = io.read_snapshot_csv(out / "snapshots" / "curve_000005.csv")
    assert b.total_nodes == 64


def test_simulate_is_reproducible(tmp_path):
    cfg = write_config(tmp_path, shape={"type": "ellipse", "a": 1.2, "b": 1.0}, N=64, t_end=0.06,
                       fixed_dt=0.02)
    for name in ("a", "b"):
        assert main(["simulate", "-c", str(cfg), "-o", str(tmp_path / name)]) == EXIT_OK
    assert md5(tmp_path / "a" / "records.jsonl") == md5(tmp_path / "b" / "records.jsonl")


@pytest.mark.parametrize("cfg", [{"N": 33}, {"cfl": 0}, {"snapshot_every": 3, "record_every": 2},
                                 {"shape": {"type": "file", "path": "missing.csv"}}])
def test_bad_config_exits_before_writing(tmp_path, cfg):
    p = write_config(tmp_path, **cfg)
    out = tmp_path / "run"
    assert main(["simulate", "-c", str(p), "-o", str(out)]) == EXIT_CONFIG
    assert not out.exists()


@pytest.mark.slow
def test_verify_reilly_quick_level(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "reilly", "--level", "0", "-o", str(out)]) == EXIT_OK
    results = json.loads(out.read_text())
    assert results and all(r["passed"] for r in results if r["enforced"])
