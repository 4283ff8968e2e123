"""Command-line entry points: simulate, limit, verify, report.

Configuration merges three sources with fixed precedence: command-line
flags beat the LEVYWALKS_SEED / LEVYWALKS_THREADS environment
variables, which beat the TOML file named by --config.  Exit codes:
0 success, 2 configuration error, 3 numerical-verification failure,
4 I/O error.
"""

import argparse
import csv
import os
import sys
import time

import numpy as np

from . import io as _io
from .config import (
    LIMIT_MODELS,
    WALK_MODELS,
    ConfigError,
    load_config_dict,
    merge_config,
)
from .limits import DistributedJumpMeasure, StableJumpMeasure, limit_ensemble
from .sampling import JUMP_FIRST, WAIT_FIRST, MixingDensity
from .stats import empirical_cf, msd
from .verify import SUITES, run_suite
from .walks import ConditionedMixtureLaw, HeavyTailLaw, walk_ensemble

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_IO = 4

# report's default wave numbers when deriving an ECF table from a raw
# ensemble: same 16-point grid the convergence suites probe
_REPORT_KGRID = np.concatenate(
    [-np.linspace(0.25, 2.0, 8)[::-1], np.linspace(0.25, 2.0, 8)])


def _log(msg):
    print(msg, file=sys.stderr)


# ------------------------------------------------------------- parsing


def _add_common(p):
    p.add_argument("--config", help="TOML run-configuration file")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--threads", type=int,
                   help="worker threads (results never depend on it)")
    p.add_argument("--out", help="output directory (default: cwd)")


def _add_model_flags(p):
    p.add_argument("--model", help="model name")
    p.add_argument("--alpha", type=float, help="stable tail exponent")
    p.add_argument("--gamma", type=float, help="mixing density shape")
    p.add_argument("--b", type=float, help="mixing density edge exponent")
    p.add_argument("--n", type=int, help="pre-limit scale")
    p.add_argument("--dim", type=int, help="spatial dimension")
    p.add_argument("--horizon", type=float, help="physical time horizon")
    p.add_argument("--paths", type=int, help="ensemble size")
    p.add_argument("--times", help="comma-separated probe times")
    p.add_argument("--direction",
                   help="direction measure kind (point, pair, uniform)")
    p.add_argument("--binary", action="store_true", default=None,
                   help="binary frame for ensembles above the row "
                        "threshold")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="levywalks",
        description="Coupled heavy-tailed walks, their scaling limits, "
                    "and transform-space verification.")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="walk ensembles (lw, olw, glw, "
                                         "golw)")
    _add_model_flags(ps)
    _add_common(ps)

    pl = sub.add_parser("limit", help="limit-process ensembles")
    _add_model_flags(pl)
    pl.add_argument("--scenario", choices=[WAIT_FIRST, JUMP_FIRST])
    pl.add_argument("--eps", type=float, help="small-jump cutoff")
    _add_common(pl)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("--suite", help="suite name; see --list")
    pv.add_argument("--list", action="store_true",
                    help="list available suites and exit")
    _add_common(pv)

    pr = sub.add_parser("report", help="merge outputs into tidy CSVs")
    pr.add_argument("inputs", nargs="*",
                    help="ensembles, record tables, reports, manifests")
    _add_common(pr)
    return ap


def _flags_dict(args, names):
    return {k: getattr(args, k) for k in names if getattr(args, k, None)
            is not None}


def _merged(args, extra_flags=(), base=None):
    file_dict = load_config_dict(args.config) if args.config else {}
    merged_base = dict(base or {})
    merged_base.update(file_dict)
    names = ["model", "alpha", "gamma", "b", "n", "dim", "horizon",
             "paths", "seed", "threads", "out", "binary"]
    names += list(extra_flags)
    flags = _flags_dict(args, names)
    if getattr(args, "times", None):
        flags["times"] = tuple(
            float(t) for t in args.times.split(","))
    if getattr(args, "direction", None):
        flags["direction"] = {"kind": args.direction}
    return merge_config(merged_base, flags=flags)


def _apply_threads(cfg):
    """Pin the worker count; outputs never depend on it."""
    if cfg.threads is None:
        return
    try:
        import numba

        # numba caps the pool at its launch-time size
        numba.set_num_threads(
            max(1, min(cfg.threads, numba.config.NUMBA_NUM_THREADS)))
    except ImportError:  # pragma: no cover - numba is a hard dependency
        pass


# ------------------------------------------------------------ simulate


def _walk_law(cfg):
    if cfg.model in ("lw", "olw"):
        law = HeavyTailLaw(cfg.alpha)
    else:
        law = ConditionedMixtureLaw(MixingDensity(cfg.gamma, cfg.b),
                                    float(cfg.n))
    scenario = WAIT_FIRST if cfg.model in ("lw", "glw") else JUMP_FIRST
    return law, scenario


def _write_run(cfg, times, positions, started):
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, f"{cfg.model}-ensemble")
    path = _io.write_ensemble(base, times, positions,
                              binary=bool(cfg.binary))
    manifest = _io.build_manifest(
        cfg, {"path_streams": [0, cfg.paths]}, [path],
        time.perf_counter() - started)
    mpath = os.path.join(out_dir, f"{cfg.model}-manifest.json")
    _io.write_manifest(mpath, manifest)
    print(path)
    print(mpath)


def cmd_simulate(args):
    cfg = _merged(args)
    if cfg.model not in WALK_MODELS:
        raise ConfigError(
            f"model: simulate drives walk models "
            f"({', '.join(WALK_MODELS)}); use the limit command for "
            f"{cfg.model!r}")
    _apply_threads(cfg)
    law, scenario = _walk_law(cfg)
    times = cfg.probe_times()
    started = time.perf_counter()
    _log(f"simulate: {cfg.model}, {cfg.paths} paths, "
         f"{times.size} probe times")
    pos = walk_ensemble(law, scenario, times, cfg.paths, cfg.seed,
                        directions=cfg.direction_measure())
    _write_run(cfg, times, pos, started)
    return EXIT_OK


def cmd_limit(args):
    cfg = _merged(args, extra_flags=("scenario", "eps"))
    if cfg.model not in LIMIT_MODELS:
        raise ConfigError(
            f"model: limit drives {', '.join(LIMIT_MODELS)}; use the "
            f"simulate command for {cfg.model!r}")
    _apply_threads(cfg)
    if cfg.model == "limit-stable":
        measure = StableJumpMeasure(cfg.alpha)
    else:
        measure = DistributedJumpMeasure(MixingDensity(cfg.gamma, cfg.b))
    times = cfg.probe_times()
    started = time.perf_counter()
    _log(f"limit: {cfg.model} ({cfg.scenario}), {cfg.paths} paths, "
         f"eps={cfg.eps:g}")
    pos = limit_ensemble(measure, cfg.direction_measure(), cfg.eps,
                         times, cfg.paths, cfg.seed, cfg.scenario)
    _write_run(cfg, times, pos, started)
    return EXIT_OK


# -------------------------------------------------------------- verify


def cmd_verify(args):
    if args.list:
        for name in SUITES:
            print(f"{name}: {SUITES[name][1]}")
        return EXIT_OK
    # suites pin their own models and sample sizes; the merged config
    # contributes seed, threads, and output directory, so an inert
    # default model satisfies validation when none is configured
    cfg = _merged(args, extra_flags=("suite",),
                  base={"model": "lw", "alpha": 0.5})
    if not cfg.suite:
        raise ConfigError(
            "suite: name one of " + ", ".join(sorted(SUITES))
            + " (or pass --list)")
    _apply_threads(cfg)
    try:
        report, written = run_suite(cfg.suite, cfg.seed,
                                    out_dir=cfg.out or ".", log=_log)
    except ValueError as e:
        raise ConfigError(f"suite: {e}") from None
    for r in report["records"]:
        verdict = {True: "pass", False: "FAIL", None: "info"}[r["passed"]]
        print(f"[{verdict}] {r['suite']} {r['model']} {r['point']}: "
              f"mc={r['mc'][0]:.6g}{r['mc'][1]:+.6g}j "
              f"theory={r['theory'][0]:.6g}{r['theory'][1]:+.6g}j "
              f"se={r['stderr']:.3g} tol={r['tol']:.3g}")
    for p in written:
        print(p)
    print(f"suite {report['suite']}: "
          f"{'PASS' if report['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


# -------------------------------------------------------------- report


def _sniff(path):
    """Classify an input: ensemble, records, report, or manifest."""
    if path.endswith(".npz"):
        return "ensemble-npz"
    if path.endswith(".json"):
        data = _io.read_report_json(path)
        if "records" in data:
            return "report"
        if "outputs" in data:
            return "manifest"
        raise ValueError("unrecognized JSON layout")
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header == _io.RECORD_COLUMNS:
        return "records"
    if header and header[:2] == ["path", "time"]:
        return "ensemble-csv"
    raise ValueError("unrecognized CSV header")


def _report_rows(inputs):
    """Gather tidy rows from classified inputs; seeds join via manifests."""
    msd_rows, ecf_rows, dist_rows, rec_rows, prov_rows = [], [], [], [], []
    # manifests first: they carry the seed for ensembles they digest
    seeds = {}
    for path in inputs:
        if _sniff(path) != "manifest":
            continue
        m = _io.read_manifest(path)
        seed = m.get("config", {}).get("seed")
        prov_rows.append({
            "source": os.path.basename(path),
            "artifact_version": m.get("artifact_version", ""),
            "seed": seed,
            "outputs": " ".join(sorted(m.get("outputs", {}))),
        })
        for name in m.get("outputs", {}):
            seeds[name] = seed
    for path in inputs:
        kind = _sniff(path)
        name = os.path.basename(path)
        seed = seeds.get(name, "")
        if kind == "manifest":
            continue
        if kind in ("ensemble-csv", "ensemble-npz"):
            if kind == "ensemble-csv":
                times, pos, _ = _io.read_ensemble_csv(path)
            else:
                times, pos, _ = _io.read_ensemble_npz(path)
            mvals, mses = msd(pos)
            for t, v, s in zip(times, mvals, mses):
                msd_rows.append({"source": name, "seed": seed,
                                 "t": t, "msd": v, "stderr": s})
            if pos.shape[2] == 1:
                vals, ses = empirical_cf(pos[:, -1, :], _REPORT_KGRID)
                for k, v, s in zip(_REPORT_KGRID, vals, ses):
                    ecf_rows.append({
                        "source": name, "seed": seed,
                        "t": times[-1], "k": k, "re_ecf": v.real,
                        "im_ecf": v.imag, "stderr": s})
        else:
            if kind == "report":
                rep = _io.read_report_json(path)
                recs = rep["records"]
                seed = rep.get("config", {}).get("seed", seed)
                rows = [{
                    "suite": r["suite"], "model": r["model"],
                    "point": r["point"], "theory_re": r["theory"][0],
                    "theory_im": r["theory"][1], "mc_re": r["mc"][0],
                    "mc_im": r["mc"][1], "stderr": r["stderr"],
                    "tol": r["tol"], "gate": r["gate"],
                    "passed": {True: "pass", False: "FAIL",
                               None: ""}[r["passed"]],
                } for r in recs]
            else:
                rows = _io.read_records_csv(path)
            for r in rows:
                rec_rows.append({"source": name, "seed": seed, **r})
                if (r["suite"] in ("glw-convergence", "rescaled-lw")
                        and r["point"].startswith("n=")):
                    dist_rows.append({
                        "source": name, "seed": seed,
                        "suite": r["suite"], "model": r["model"],
                        "n": float(r["point"].split("=", 1)[1]
                                   .split()[0]),
                        "distance": r["mc_re"]})
    return {"msd": msd_rows, "ecf": ecf_rows, "distance": dist_rows,
            "records": rec_rows, "provenance": prov_rows}


def _write_table(path, rows):
    cols = list(rows[0].keys())
    fmt = _io._fmt
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v
                        for v in (r[c] for c in cols)])


def cmd_report(args):
    if not args.inputs:
        raise ConfigError("inputs: at least one input file is required")
    missing = [p for p in args.inputs if not os.path.exists(p)]
    if missing:
        _log("missing inputs: " + ", ".join(missing))
        return EXIT_IO
    bad = []
    for p in args.inputs:
        try:
            _sniff(p)
        except (ValueError, OSError, KeyError) as e:
            bad.append(f"{p} ({e})")
    if bad:
        _log("unrecognized inputs: " + "; ".join(bad))
        return EXIT_IO
    tables = _report_rows(args.inputs)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    wrote_any = False
    for stem, rows in tables.items():
        if not rows:
            continue
        path = os.path.join(out_dir, f"{stem}.csv")
        _write_table(path, rows)
        print(path)
        wrote_any = True
    if not wrote_any:
        _log("inputs produced no table rows")
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------- main


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"simulate": cmd_simulate, "limit": cmd_limit,
               "verify": cmd_verify, "report": cmd_report}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        _log(f"configuration error: {e}")
        return EXIT_CONFIG
    except OSError as e:
        _log(f"io error: {e}")
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
