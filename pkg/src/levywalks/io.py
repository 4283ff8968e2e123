"""File formats: CSV tables, optional binary frames, JSON reports.

CSV is the interchange format: UTF-8, header row, one record per line,
floats rendered with repr so identical runs produce identical bytes.
Ensembles above the binary threshold may opt into .npz frames.  JSON
reports and manifests are serialized with sorted keys for the same
byte-determinism guarantee; manifests additionally carry a wall-clock
stamp (the one field that varies between reruns), which is why
verification reports, whose bytes must be reproducible, never embed
timing.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

__all__ = [
    "BINARY_ROW_THRESHOLD",
    "sha256_file",
    "write_ensemble",
    "write_ensemble_csv",
    "read_ensemble_csv",
    "write_ensemble_npz",
    "read_ensemble_npz",
    "write_ecf_csv",
    "write_msd_csv",
    "write_symbol_table_csv",
    "write_records_csv",
    "read_records_csv",
    "write_report_json",
    "read_report_json",
    "build_manifest",
    "write_manifest",
    "read_manifest",
]

BINARY_ROW_THRESHOLD = 1_000_000


def _fmt(x):
    return repr(float(x))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _open_writer(path):
    return open(path, "w", newline="", encoding="utf-8")


def write_ensemble_csv(path, times, positions, first_path=0):
    """Positions (N, M, d) over probe times as (path, time, x...) rows."""
    pos = np.asarray(positions)
    times = np.asarray(times, dtype=float)
    if pos.ndim != 3 or pos.shape[1] != times.size:
        raise ValueError("positions must be (N, M, d) over the time grid")
    n, m, d = pos.shape
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(["path", "time"] + [f"x{j + 1}" for j in range(d)])
        for i in range(n):
            pid = first_path + i
            for j in range(m):
                w.writerow([pid, _fmt(times[j])]
                           + [_fmt(c) for c in pos[i, j]])


def read_ensemble_csv(path):
    """Inverse of write_ensemble_csv: (times, positions, first_path)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header[:2] != ["path", "time"]:
            raise ValueError(f"{path}: not an ensemble table")
        d = len(header) - 2
        ids, ts, xs = [], [], []
        for row in rd:
            ids.append(int(row[0]))
            ts.append(float(row[1]))
            xs.append([float(c) for c in row[2:]])
    ids = np.asarray(ids)
    uniq = np.unique(ids)
    m = int(np.sum(ids == uniq[0]))
    times = np.asarray(ts[:m])
    pos = np.asarray(xs).reshape(uniq.size, m, d)
    return times, pos, int(uniq[0])


def write_ensemble_npz(path, times, positions, first_path=0):
    np.savez_compressed(path, times=np.asarray(times, dtype=float),
                        positions=np.asarray(positions),
                        first_path=np.asarray(first_path))


def read_ensemble_npz(path):
    with np.load(path) as z:
        return z["times"], z["positions"], int(z["first_path"])


def write_ensemble(path_base, times, positions, first_path=0,
                   binary=False):
    """Write an ensemble, choosing CSV or the opt-in binary frame.

    Binary is honored only above BINARY_ROW_THRESHOLD rows (rows =
    paths x probe times); small ensembles always ship as CSV.  Returns
    the path actually written.
    """
    pos = np.asarray(positions)
    rows = pos.shape[0] * pos.shape[1]
    if binary and rows > BINARY_ROW_THRESHOLD:
        path = str(path_base) + ".npz"
        write_ensemble_npz(path, times, pos, first_path)
    else:
        path = str(path_base) + ".csv"
        write_ensemble_csv(path, times, pos, first_path)
    return path


def write_ecf_csv(path, kgrid, values, stderr):
    """(k components, Re ECF, Im ECF, stderr) rows over the k-grid."""
    kgrid = np.atleast_2d(np.asarray(kgrid, dtype=float))
    if kgrid.shape[0] == 1 and np.asarray(values).size != 1:
        kgrid = kgrid.T
    vals = np.asarray(values)
    ses = np.asarray(stderr)
    d = kgrid.shape[1]
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow([f"k{j + 1}" for j in range(d)]
                   + ["re_ecf", "im_ecf", "stderr"])
        for i in range(kgrid.shape[0]):
            w.writerow([_fmt(c) for c in kgrid[i]]
                       + [_fmt(vals[i].real), _fmt(vals[i].imag),
                          _fmt(ses[i])])


def write_msd_csv(path, times, values, stderr):
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(["t", "msd", "stderr"])
        for t, v, s in zip(times, values, stderr):
            w.writerow([_fmt(t), _fmt(v), _fmt(s)])


def write_symbol_table_csv(path, table):
    """Table from flcalc.symbol_table as one row per (k, s) point."""
    k = np.atleast_2d(table["k"])
    d = k.shape[1]
    cols = (["re_psi", "im_psi"], ["re_p1", "im_p1"], ["re_p2", "im_p2"])
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow([f"k{j + 1}" for j in range(d)] + ["s"]
                   + [c for pair in cols for c in pair])
        for i in range(k.shape[0]):
            row = [_fmt(c) for c in k[i]] + [_fmt(table["s"][i])]
            for name in ("psi", "p1", "p2"):
                z = table[name][i]
                row += [_fmt(z.real), _fmt(z.imag)]
            w.writerow(row)


RECORD_COLUMNS = ["suite", "model", "point", "theory_re", "theory_im",
                  "mc_re", "mc_im", "stderr", "tol", "gate", "passed"]


def write_records_csv(path, records):
    """Verification records as a flat CSV (see RECORD_COLUMNS)."""
    with _open_writer(path) as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([
                r["suite"], r["model"], r["point"],
                _fmt(r["theory"][0]), _fmt(r["theory"][1]),
                _fmt(r["mc"][0]), _fmt(r["mc"][1]),
                _fmt(r["stderr"]), _fmt(r["tol"]), r["gate"],
                {True: "pass", False: "FAIL", None: ""}[r["passed"]],
            ])


def read_records_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != RECORD_COLUMNS:
            raise ValueError(f"{path}: not a verification record table")
        out = []
        for row in rd:
            r = dict(zip(RECORD_COLUMNS, row))
            for c in ("theory_re", "theory_im", "mc_re", "mc_im",
                      "stderr", "tol"):
                r[c] = float(r[c])
            out.append(r)
        return out


def _json_bytes(obj):
    return (json.dumps(obj, sort_keys=True, indent=2, allow_nan=True)
            + "\n").encode("utf-8")


def write_report_json(path, report):
    """Byte-deterministic JSON: sorted keys, repr floats, no timing."""
    with open(path, "wb") as fh:
        fh.write(_json_bytes(report))


def read_report_json(path):
    with open(path, "rb") as fh:
        return json.loads(fh.read().decode("utf-8"))


def build_manifest(config, rng_streams, outputs, wall_clock_s):
    """Everything needed to reproduce the run's outputs bit-exactly.

    config echo + stream layout + digests identify the outputs; the
    wall-clock stamp is provenance only and varies between reruns.
    """
    from . import __version__

    return {
        "artifact_version": __version__,
        "config": config.to_dict(),
        "rng_streams": rng_streams,
        "outputs": {os.path.basename(p): sha256_file(p) for p in outputs},
        "wall_clock_s": float(wall_clock_s),
    }


def write_manifest(path, manifest):
    with open(path, "wb") as fh:
        fh.write(_json_bytes(manifest))


def read_manifest(path):
    return read_report_json(path)
