"""File formats: lossless round trips and byte-deterministic writers."""

import hashlib
import json

import numpy as np
import pytest

from levywalks import io as lio
from levywalks.config import config_from_dict


@pytest.fixture
def ens():
    rng = np.random.default_rng(3)
    times = np.array([0.5, 1.0, 2.0])
    pos = rng.standard_normal((7, 3, 2)) * np.pi  # ugly decimals on purpose
    return times, pos


def test_ensemble_csv_round_trip_is_exact(ens, tmp_path):
    times, pos = ens
    p = tmp_path / "e.csv"
    lio.write_ensemble_csv(p, times, pos, first_path=5)
    t2, p2, fp = lio.read_ensemble_csv(p)
    assert fp == 5
    assert np.array_equal(t2, times)
    assert np.array_equal(p2, pos)  # repr round trip, not approximate


def test_ensemble_csv_handles_nonfinite(ens, tmp_path):
    times, pos = ens
    pos = pos.copy()
    pos[0, 0, 0] = np.inf
    pos[1, 2, 1] = -np.inf
    p = tmp_path / "e.csv"
    lio.write_ensemble_csv(p, times, pos)
    _, p2, _ = lio.read_ensemble_csv(p)
    assert np.array_equal(p2, pos)


def test_ensemble_npz_round_trip(ens, tmp_path):
    times, pos = ens
    p = tmp_path / "e.npz"
    lio.write_ensemble_npz(p, times, pos, first_path=2)
    t2, p2, fp = lio.read_ensemble_npz(p)
    assert fp == 2
    assert np.array_equal(t2, times)
    assert np.array_equal(p2, pos)


def test_write_ensemble_binary_gate(ens, tmp_path, monkeypatch):
    times, pos = ens
    # csv is the default interchange format
    out = lio.write_ensemble(tmp_path / "a", times, pos, binary=False)
    assert str(out).endswith(".csv")
    # binary is opt-in AND only engages above the row threshold
    out = lio.write_ensemble(tmp_path / "b", times, pos, binary=True)
    assert str(out).endswith(".csv")
    monkeypatch.setattr(lio, "BINARY_ROW_THRESHOLD", 10)
    out = lio.write_ensemble(tmp_path / "c", times, pos, binary=True)
    assert str(out).endswith(".npz")
    out = lio.write_ensemble(tmp_path / "d", times, pos, binary=False)
    assert str(out).endswith(".csv")


def test_records_csv_round_trip(tmp_path):
    records = [
        {"suite": "s", "model": "lw", "point": "k=1 s=1",
         "theory": (0.5, -0.25), "mc": (0.51, -0.26),
         "stderr": 0.01, "tol": 0.05, "gate": "asserted", "passed": True},
        {"suite": "s", "model": "glw", "point": "k=2 s=1",
         "theory": (1.0, 0.0), "mc": (0.9, 0.0),
         "stderr": 0.02, "tol": 0.05, "gate": "asserted", "passed": False},
        {"suite": "s", "model": "olw", "point": "n=100",
         "theory": (np.nan, 0.0), "mc": (0.8, 0.0),
         "stderr": 0.0, "tol": np.inf, "gate": "reported", "passed": None},
    ]
    p = tmp_path / "r.csv"
    lio.write_records_csv(p, records)
    rows = lio.read_records_csv(p)
    assert len(rows) == 3
    # pass/FAIL/blank is the on-disk vocabulary, kept as-is on read
    assert [r["passed"] for r in rows] == ["pass", "FAIL", ""]
    assert rows[0]["theory_re"] == 0.5
    assert rows[0]["mc_im"] == -0.26
    assert np.isnan(rows[2]["theory_re"])
    assert rows[2]["tol"] == np.inf
    header = p.read_text().splitlines()[0].split(",")
    assert header == lio.RECORD_COLUMNS
    (tmp_path / "notrecords.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="record table"):
        lio.read_records_csv(tmp_path / "notrecords.csv")


def test_report_json_bytes_are_deterministic(tmp_path):
    report = {"suite": "demo", "b": [1, 2.5], "a": {"y": 2, "x": 1},
              "nan_ok": float("nan")}
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    lio.write_report_json(p1, report)
    lio.write_report_json(p2, report)
    b1, b2 = p1.read_bytes(), p2.read_bytes()
    assert b1 == b2
    assert b1.endswith(b"\n")
    # keys are emitted sorted so diffs are stable
    assert b1.index(b'"a"') < b1.index(b'"b"')
    back = lio.read_report_json(p1)
    assert back["b"] == [1, 2.5]
    assert np.isnan(back["nan_ok"])


def test_ecf_msd_symbol_writers(tmp_path):
    k = np.array([[0.5], [1.0]])
    lio.write_ecf_csv(tmp_path / "ecf.csv", k,
                      np.array([0.9 + 0.1j, 0.7 - 0.2j]),
                      np.array([0.01, 0.02]))
    text = (tmp_path / "ecf.csv").read_text().splitlines()
    assert text[0].startswith("k1,")
    assert len(text) == 3

    lio.write_msd_csv(tmp_path / "msd.csv", np.array([1.0, 2.0]),
                      np.array([0.5, 1.5]), np.array([0.01, 0.01]))
    assert (tmp_path / "msd.csv").read_text().splitlines()[0] == \
        "t,msd,stderr"

    table = {"k": np.array([[1.0], [2.0]]), "s": np.array([1.0, 1.0]),
             "psi": np.array([1 + 1j, 2 + 0j]),
             "p1": np.array([0.5 + 0j, 0.25 + 0j]),
             "p2": np.array([np.nan + 0j, 0.1 + 0.2j])}
    lio.write_symbol_table_csv(tmp_path / "sym.csv", table)
    lines = (tmp_path / "sym.csv").read_text().splitlines()
    assert len(lines) == 3


def test_manifest_digests_identify_outputs(tmp_path):
    f1 = tmp_path / "out.csv"
    f1.write_text("path,time,x1\n0,1.0,2.0\n")
    cfg = config_from_dict({"model": "lw", "alpha": 0.5})
    man = lio.build_manifest(cfg, {"path_streams": [0, 10]}, [f1], 1.25)
    assert man["outputs"]["out.csv"] == hashlib.sha256(
        f1.read_bytes()).hexdigest()
    assert man["config"]["model"] == "lw"
    assert "scenario" not in man["config"]  # None fields omitted
    assert man["rng_streams"] == {"path_streams": [0, 10]}
    p = tmp_path / "m.json"
    lio.write_manifest(p, man)
    assert lio.read_manifest(p) == json.loads(p.read_text())


def test_sha256_file_matches_hashlib(tmp_path):
    f = tmp_path / "blob"
    f.write_bytes(b"\x00\x01" * 5000)
    assert lio.sha256_file(f) == hashlib.sha256(f.read_bytes()).hexdigest()
