"""Verification suites: Monte Carlo ensembles against the governing
transforms.

Each suite pins its own sample sizes, grids, and tolerances (the run
configuration contributes only the seed), simulates with per-stage
stream offsets, and returns a report dict whose records compare a
Monte Carlo value against an independent theoretical value:

* gate "asserted": |mc - theory| must not exceed tol, and a breach
  fails the suite;
* gate "reported": the residual is recorded for inspection without a
  pass/fail verdict (used where no finite printed transform exists or
  where the check is diagnostic).

Reports are byte-deterministic for a fixed seed: no timing, no
environment echo, floats via repr.  The number of worker threads only
changes how block sums are scheduled, never their values, so reruns
at any thread count produce identical bytes.
"""

import math

import numpy as np
from scipy import integrate as _sint
from scipy import stats as _sps

from . import __version__
from . import io as _io
from .flcalc import (
    fl_exponent,
    fl_truncation_bias,
    theoretical_p1_fl,
    theoretical_p2_fl,
    truncated_fl_exponent,
)
from .limits import (
    DistributedJumpMeasure,
    StableJumpMeasure,
    coupled_terminal_ensemble,
    extend_coverage,
    limit_ecf,
    limit_ensemble,
    simulate_coupled_jumps,
    truncation_bias,
)
from .rng import RngStream
from .sampling import (
    JUMP_FIRST,
    WAIT_FIRST,
    DirectionMeasure,
    HeavyTailLaw,
    MixingDensity,
)
from .stats import (
    ecf_distance,
    empirical_cf,
    hill_tail_index,
    numerical_laplace,
)
from .walks import (
    ConditionedMixtureLaw,
    rescaled_walk_positions,
    walk_ensemble,
)

# every simulation stage of a suite owns stream ids
# [stage * STAGE_STRIDE, ...); no suite uses more than 10**6 paths
STAGE_STRIDE = 10_000_000

# values frozen from tests/oracles/gen_p2_brute.py: the jump-first
# source transform evaluated by brute-force double quadrature on a
# rotated ray, mpmath 20 digits (label -> (measure, directions, k, s,
# value))
P2_BRUTE = {
    "stable a=0.5 point k=1 s=1":
        (-0.08910143677360571 + 0.13844349350751406j),
    "stable a=0.5 point k=0.5 s=2":
        (0.03389175453030231 + 0.16467557210007155j),
    "stable a=0.8 pair k=1 s=0.7":
        (0.010578747243545716 + 0j),
    "dist g=1 b=2 point k=1 s=1":
        (-0.2226524167049647 + 0.21941233477426533j),
    "dist g=0.5 b=1.5 pair k=0.8 s=1.2":
        (-0.11466066037112994 + 0j),
}


def _stage(i):
    return i * STAGE_STRIDE


def _pair():
    return DirectionMeasure.symmetric_pair()


def _point():
    return DirectionMeasure.point(np.array([1.0]))


def _rec(suite, model, point, theory, mc, stderr, tol, gate, passed,
         detail=None):
    def _as_pair(v):
        if isinstance(v, (list, tuple)):
            return [float(v[0]), float(v[1])]
        v = complex(v)
        return [float(v.real), float(v.imag)]

    r = {
        "suite": suite,
        "model": model,
        "point": point,
        "theory": _as_pair(theory),
        "mc": _as_pair(mc),
        "stderr": float(stderr),
        "tol": float(tol),
        "gate": gate,
        "passed": passed,
    }
    if detail is not None:
        r["detail"] = {kk: float(vv) for kk, vv in detail.items()}
    return r


def _report(suite, seed, parameters, records, notes):
    return {
        "suite": suite,
        "artifact_version": __version__,
        "config": {"suite": suite, "seed": int(seed)},
        "parameters": parameters,
        "records": records,
        "notes": list(notes),
        "passed": all(r["passed"] is not False for r in records),
    }


def _complex_se(vals):
    """sqrt((E|f|^2 - |Ef|^2) / N): SE bound on the complex mean."""
    n = vals.size
    m = vals.mean()
    var = float(np.mean(np.abs(vals) ** 2) - abs(m) ** 2)
    return math.sqrt(max(var, 0.0) / n)


# ---------------------------------------------------------------- cone


def suite_cone(seed, log=None):
    """Wait-first displacement never outruns elapsed time."""
    horizon = 10.0
    times = np.linspace(0.1, 10.0, 100)
    n_paths = 10_000
    mixing = MixingDensity(0.5, 2.0)
    records = []
    stage = 0
    cases = [
        ("lw", HeavyTailLaw(0.5), 1),
        ("lw", HeavyTailLaw(0.5), 2),
        ("glw", ConditionedMixtureLaw(mixing, 1000.0), 1),
        ("glw", ConditionedMixtureLaw(mixing, 1000.0), 2),
    ]
    for model, law, dim in cases:
        if log:
            log(f"cone: {model} d={dim}, {n_paths} paths")
        dm = _pair() if dim == 1 else DirectionMeasure.uniform(dim)
        pos = walk_ensemble(law, WAIT_FIRST, times, n_paths, seed,
                            first_path=_stage(stage), directions=dm)
        stage += 1
        r = np.sqrt(np.einsum("nmd,nmd->nm", pos, pos))
        ratio = r / times[None, :]
        # one-ulp slack per accumulated term; the bound itself is exact
        slack = 1e-9
        viol = int(np.count_nonzero(ratio > 1.0 + slack))
        records.append(_rec(
            "cone", model, f"d={dim} N={n_paths} 100 probes",
            [0.0, 0.0], [float(viol), float(ratio.max())],
            0.0, 0.0, "asserted", viol == 0,
            detail={"max_ratio": float(ratio.max()), "slack": slack}))
    params = {"horizon": horizon, "probes": 100, "paths": n_paths,
              "alpha": 0.5, "gamma": 0.5, "b": 2.0, "nscale": 1000.0}
    notes = ["mc = [violation count, max |x|/t]; the bound |x| <= t "
             "holds pathwise for wait-first scenarios"]
    return _report("cone", seed, params, records, notes)


# --------------------------------------------------------- waiting-law


def suite_waiting_law(seed, log=None):
    """Exact law of one conditional waiting time (fixed exponent)."""
    records = []
    cases = [(100.0, 0.5, 100_000, "asserted"),
             (1000.0, 0.8, 100_000, "reported")]
    for stage, (n, beta, nsamp, gate) in enumerate(cases):
        if log:
            log(f"waiting-law: n={n:g} beta={beta} N={nsamp}")
        u = RngStream(seed, _stage(stage)).uniforms(nsamp)
        waits = (n * u) ** (-1.0 / beta)

        def cdf(t, n=n, beta=beta):
            t = np.asarray(t, dtype=float)
            return 1.0 - np.minimum(1.0, t ** (-beta) / n)

        stat = float(_sps.kstest(waits, cdf).statistic)
        crit = 1.36 / math.sqrt(nsamp)
        passed = (stat < crit) if gate == "asserted" else None
        records.append(_rec(
            "waiting-law", "glw", f"n={n:g} beta={beta} N={nsamp}",
            [0.0, 0.0], [stat, 0.0], 0.0, crit, gate, passed,
            detail={"ks_statistic": stat, "critical_5pct": crit}))
    params = {"survival": "min(1, t**-beta / n)", "samples": 100_000}
    notes = ["Kolmogorov-Smirnov distance against the exact conditional "
             "CDF; tol is the 5% critical value 1.36/sqrt(N)"]
    return _report("waiting-law", seed, params, records, notes)


# -------------------------------------------------- subordinator suites


def _terminal_S(measure, eps, n_paths, seed, first_list):
    cj = simulate_coupled_jumps(measure, _point(), eps, 1.0, n_paths,
                                seed, first_list)
    _, S = coupled_terminal_ensemble(cj, 1.0)
    return S


def suite_subordinator_stable(seed, log=None):
    """Laplace functional of the stable subordinator at unit time."""
    eps = 1e-3
    n_paths = 100_000
    lams = (0.5, 1.0, 2.0)
    records = []
    for stage, alpha in enumerate((0.3, 0.5, 0.8)):
        if log:
            log(f"subordinator-stable: alpha={alpha}, {n_paths} paths")
        measure = StableJumpMeasure(alpha)
        S = _terminal_S(measure, eps, n_paths, seed, _stage(stage))
        for lam in lams:
            v = np.exp(-lam * S)
            mc = float(v.mean())
            se = float(v.std(ddof=1) / math.sqrt(n_paths))
            theory = math.exp(-lam ** alpha)
            delta = float(truncation_bias(measure, lam, eps))
            tol = 3.0 * se + delta
            records.append(_rec(
                "subordinator-stable", "limit-stable",
                f"alpha={alpha} lam={lam}", [theory, 0.0], [mc, 0.0],
                se, tol, "asserted", abs(mc - theory) <= tol,
                detail={"trunc_bias": delta}))
        d1 = float(truncation_bias(measure, 1.0, eps))
        d2 = float(truncation_bias(measure, 1.0, eps / 10.0))
        ratio = d1 / d2
        records.append(_rec(
            "subordinator-stable", "limit-stable",
            f"alpha={alpha} bias shrink eps {eps:g}->{eps / 10:g}",
            [2.0, 0.0], [ratio, 0.0], 0.0, 0.0, "asserted",
            ratio >= 2.0,
            detail={"bias_eps": d1, "bias_eps_tenth": d2}))
    params = {"eps": eps, "paths": n_paths, "tau": 1.0,
              "lambdas": list(lams), "alphas": [0.3, 0.5, 0.8]}
    notes = ["tol = 3*SE + deterministic truncation bias; the shrink "
             "records require the bias to fall at least 2x per eps "
             "decade (theory is [2, 0], mc is the measured ratio)"]
    return _report("subordinator-stable", seed, params, records, notes)


def suite_subordinator_distributed(seed, log=None):
    """Laplace functional of the mixture subordinator at unit time.

    The reference value integrates Gamma(2 - beta) * lam**beta against
    the Beta(1, 2) weight with scipy quadrature, independently of the
    package's own exponent evaluator.
    """
    eps = 1e-3
    n_paths = 100_000
    mixing = MixingDensity(1.0, 2.0)
    measure = DistributedJumpMeasure(mixing)
    if log:
        log(f"subordinator-distributed: Beta(1,2), {n_paths} paths")
    S = _terminal_S(measure, eps, n_paths, seed, _stage(0))
    records = []
    for lam in (0.5, 1.0, 2.0):
        # Beta(1,2) density 2(1-beta); Gamma(1-beta)*(1-beta) folded to
        # Gamma(2-beta) keeps the integrand bounded at the edge
        val, quad_err = _sint.quad(
            lambda b_: 2.0 * math.gamma(2.0 - b_) * lam ** b_, 0.0, 1.0,
            epsabs=1e-12, epsrel=1e-12)
        theory = math.exp(-val)
        v = np.exp(-lam * S)
        mc = float(v.mean())
        se = float(v.std(ddof=1) / math.sqrt(n_paths))
        delta = float(truncation_bias(measure, lam, eps))
        tol = 3.0 * se + delta
        records.append(_rec(
            "subordinator-distributed", "limit-distributed",
            f"gamma=1 b=2 lam={lam}", [theory, 0.0], [mc, 0.0],
            se, tol, "asserted", abs(mc - theory) <= tol,
            detail={"trunc_bias": delta, "oracle_quad_err": quad_err}))
    params = {"eps": eps, "paths": n_paths, "tau": 1.0,
              "mixing": {"gamma": 1.0, "b": 2.0}}
    notes = ["reference from scipy.integrate.quad of "
             "2*Gamma(2-beta)*lam**beta over (0,1), not from the "
             "package's exponent code"]
    return _report("subordinator-distributed", seed, params, records,
                   notes)


# ------------------------------------------------------------ coupled-cf


def suite_coupled_cf(seed, log=None):
    """Joint Fourier-Laplace functional of the coupled pair at tau=1."""
    eps = 1e-3
    n_paths = 100_000
    grid = (0.5, 1.0, 2.0)
    cases = [
        ("limit-stable", StableJumpMeasure(0.5), "point", _point()),
        ("limit-stable", StableJumpMeasure(0.5), "pair", _pair()),
        ("limit-distributed", DistributedJumpMeasure(MixingDensity(1.0, 2.0)),
         "point", _point()),
        ("limit-distributed", DistributedJumpMeasure(MixingDensity(1.0, 2.0)),
         "pair", _pair()),
    ]
    records = []
    for stage, (model, measure, dlabel, dm) in enumerate(cases):
        if log:
            log(f"coupled-cf: {model} {dlabel}, {n_paths} paths")
        cj = simulate_coupled_jumps(measure, dm, eps, 1.0, n_paths,
                                    seed, _stage(stage))
        L, S = coupled_terminal_ensemble(cj, 1.0)
        x = L[:, 0]
        for k in grid:
            for s in grid:
                theory = complex(np.exp(-fl_exponent(
                    measure, dm, k, s))[0, 0])
                w = np.exp(-s * S)
                f = np.zeros(n_paths, dtype=np.complex128)
                m = w > 0.0
                # a huge S underflows w to 0 and |x| <= S pins the
                # phase small wherever w survives
                f[m] = w[m] * np.exp(1j * k * x[m])
                mc = complex(f.mean())
                se = _complex_se(f)
                delta = float(fl_truncation_bias(
                    measure, dm, k, s, eps)[0, 0])
                tol = 3.0 * se + delta
                records.append(_rec(
                    "coupled-cf", model, f"{dlabel} k={k} s={s}",
                    theory, mc, se, tol, "asserted",
                    abs(mc - theory) <= tol,
                    detail={"trunc_bias": delta}))
    params = {"eps": eps, "paths": n_paths, "tau": 1.0,
              "grid": list(grid), "dim": 1}
    notes = ["mc = mean of exp(i k L(1) - s S(1)) over the truncated "
             "pair; tol = 3*SE + transform-side truncation bias"]
    return _report("coupled-cf", seed, params, records, notes)


# ------------------------------------------- transform-equation suites


def _ecf_laplace(measure, n_paths, seed, first_list, kvals, svals,
                 horizon=50.0, m_grid=4000, eps=1e-3, log=None,
                 label=""):
    """Laplace-transformed empirical CFs of both scenarios on a grid.

    Returns (tgrid, Lw, Lj, Lse, fT) with Lw/Lj shaped (nk, ns): the
    numerical Laplace transform of the wait-first and jump-first ECFs,
    the transformed pointwise SE bound, and the terminal |ECF| per k
    for tail accounting.
    """
    if log:
        log(f"{label}: simulating {n_paths} jump lists to t={horizon:g}")
    dm = _pair()
    cj = simulate_coupled_jumps(measure, dm, eps, 1.0, n_paths, seed,
                                first_list)
    cj = extend_coverage(cj, horizon)
    tgrid = np.linspace(0.0, horizon, m_grid)
    kvecs = np.asarray(kvals, dtype=float)[:, None]
    if log:
        log(f"{label}: ECF on {m_grid} x {kvecs.shape[0]} grid")
    ecf_w, ecf_j, se = limit_ecf(cj, tgrid, kvecs)
    svals = np.asarray(svals, dtype=float)
    Lw = numerical_laplace(tgrid, ecf_w.T, svals)
    Lj = numerical_laplace(tgrid, ecf_j.T, svals)
    Lse = numerical_laplace(tgrid, se.T.astype(np.complex128), svals)
    # grid-refinement (h -> 2h) residual, scaled for the h**2 rule
    Lw2 = numerical_laplace(tgrid[::2], ecf_w[::2].T, svals)
    quad = np.abs(Lw - Lw2) / 3.0
    fT = np.abs(ecf_w[-1])
    fTj = np.abs(ecf_j[-1])
    return {"tgrid": tgrid, "Lw": Lw, "Lj": Lj,
            "Lse": np.abs(Lse), "quad": quad, "fT": fT, "fTj": fTj,
            "dm": dm}


def suite_wait_first_equation(seed, log=None):
    """Transformed wait-first ECF against its governing-equation form."""
    eps = 1e-3
    n_paths = 50_000
    horizon, m_grid = 50.0, 4000
    kvals = (0.5, 1.0)
    svals = (0.5, 1.0, 2.0)
    cases = [("limit-stable", StableJumpMeasure(0.5)),
             ("limit-distributed",
              DistributedJumpMeasure(MixingDensity(1.0, 2.0)))]
    records = []
    for stage, (model, measure) in enumerate(cases):
        out = _ecf_laplace(measure, n_paths, seed, _stage(stage), kvals,
                           svals, horizon, m_grid, eps, log,
                           f"wait-first-equation {model}")
        dm = out["dm"]
        kv = np.asarray(kvals)
        sv = np.asarray(svals)
        p1 = theoretical_p1_fl(measure, dm, kv, sv)
        phi_k = truncated_fl_exponent(measure, dm, kv, sv, eps)
        phi_0 = truncated_fl_exponent(measure, dm, 0.0, sv, eps)
        p1_eps = phi_0 / (sv[None, :] * phi_k)
        for i, k in enumerate(kvals):
            for j, s in enumerate(svals):
                theory = complex(p1[i, j])
                mc = complex(out["Lw"][i, j])
                rel = abs(mc - theory) / abs(theory)
                mc3se = 3.0 * float(out["Lse"][i, j])
                trunc = abs(complex(p1_eps[i, j]) - theory)
                tail = (out["fT"][i] + 1.0) * math.exp(-s * horizon) / s
                quad = float(out["quad"][i, j])
                records.append(_rec(
                    "wait-first-equation", model, f"k={k} s={s}",
                    theory, mc, float(out["Lse"][i, j]),
                    0.02 * abs(theory), "asserted", rel <= 0.02,
                    detail={"rel_err": rel, "mc_3se": mc3se,
                            "trunc": trunc, "tail": tail,
                            "quad": quad,
                            "budget": mc3se + trunc + tail + quad}))
    params = {"eps": eps, "paths": n_paths, "horizon": horizon,
              "laplace_points": m_grid, "k": list(kvals),
              "s": list(svals)}
    notes = ["each record's detail itemizes the error budget: 3x the "
             "transformed SE bound, the deterministic truncation gap "
             "of the transform, the frozen-tail bound, and the "
             "quadrature refinement residual"]
    return _report("wait-first-equation", seed, params, records, notes)


def _overshoot_p2(measure, dm, kvals, svals):
    """Transform of the jump-first position law via first passage.

    The renewal (compensation) identity for the coupled pair gives the
    Fourier-Laplace transform of the overshoot position directly:

        [psi(k, s) - psi(k, 0)] / (s * psi(k, s))

    with psi(k, 0) the boundary symbol (principal branch on the
    imaginary axis, zero at k = 0, so normalization 1/s is built in).
    This is an independent closed form for what the Monte Carlo
    ensemble estimates; the printed source transform is a different
    object (see the suite notes).  Returns shape (nk, ns).
    """
    nodes, w = dm.quadrature()
    kg = np.asarray(kvals, dtype=float)[:, None]
    a = kg @ np.atleast_2d(np.asarray(nodes, dtype=float)).T
    sv = np.asarray(svals, dtype=float)
    z = sv[None, :, None] - 1j * a[:, None, :]
    psi = np.tensordot(measure.laplace_exponent(z), w, axes=([2], [0]))
    psi0 = (measure.laplace_exponent(-1j * a) @ w)[:, None]
    return (psi - psi0) / (sv[None, :] * psi)


def suite_jump_first_equation(seed, log=None):
    """Jump-first source transform: frozen oracle plus MC residuals."""
    records = []
    oracle_cases = [
        ("stable a=0.5 point k=1 s=1", "limit-stable",
         StableJumpMeasure(0.5), _point(), 1.0, 1.0),
        ("stable a=0.5 point k=0.5 s=2", "limit-stable",
         StableJumpMeasure(0.5), _point(), 0.5, 2.0),
        ("stable a=0.8 pair k=1 s=0.7", "limit-stable",
         StableJumpMeasure(0.8), _pair(), 1.0, 0.7),
        ("dist g=1 b=2 point k=1 s=1", "limit-distributed",
         DistributedJumpMeasure(MixingDensity(1.0, 2.0)), _point(),
         1.0, 1.0),
        ("dist g=0.5 b=1.5 pair k=0.8 s=1.2", "limit-distributed",
         DistributedJumpMeasure(MixingDensity(0.5, 1.5)), _pair(),
         0.8, 1.2),
    ]
    if log:
        log("jump-first-equation: frozen brute-force oracle points")
    for label, model, measure, dm, k, s in oracle_cases:
        got = complex(theoretical_p2_fl(measure, dm, k, s)[0, 0])
        ref = P2_BRUTE[label]
        records.append(_rec(
            "jump-first-equation", model, label, ref, got, 0.0, 1e-4,
            "asserted", abs(got - ref) <= 1e-4,
            detail={"abs_err": abs(got - ref)}))

    eps = 1e-3
    n_paths = 20_000
    horizon, m_grid = 50.0, 4000
    kvals = (0.5, 1.0)
    svals = (0.5, 1.0, 2.0)
    mc_cases = [("limit-stable", StableJumpMeasure(0.5)),
                ("limit-distributed",
                 DistributedJumpMeasure(MixingDensity(1.0, 2.0)))]
    for stage, (model, measure) in enumerate(mc_cases):
        out = _ecf_laplace(measure, n_paths, seed, _stage(stage), kvals,
                           svals, horizon, m_grid, eps, log,
                           f"jump-first-equation {model}")
        dm = out["dm"]
        p2 = theoretical_p2_fl(measure, dm, np.asarray(kvals),
                               np.asarray(svals))
        fp = _overshoot_p2(measure, dm, kvals, svals)
        for i, k in enumerate(kvals):
            for j, s in enumerate(svals):
                theory = complex(p2[i, j])
                mc = complex(out["Lj"][i, j])
                records.append(_rec(
                    "jump-first-equation", model, f"k={k} s={s}",
                    theory, mc, float(out["Lse"][i, j]), 0.0,
                    "reported", None,
                    detail={"abs_resid": abs(mc - theory),
                            "rel_resid": abs(mc - theory) / abs(theory),
                            "tail": (out["fTj"][i] + 1.0)
                            * math.exp(-s * horizon) / s}))
        for i, k in enumerate(kvals):
            for j, s in enumerate(svals):
                ref = complex(fp[i, j])
                mc = complex(out["Lj"][i, j])
                records.append(_rec(
                    "jump-first-equation", model,
                    f"k={k} s={s} first-passage", ref, mc,
                    float(out["Lse"][i, j]), 0.0, "reported", None,
                    detail={"abs_resid": abs(mc - ref),
                            "rel_resid": abs(mc - ref) / abs(ref)}))
        # k = 0 has no finite printed transform; report the Laplace of
        # the jump-first ECF there against plain normalization instead
        tgrid = out["tgrid"]
        cj0 = simulate_coupled_jumps(measure, dm, eps, 1.0, 2000, seed,
                                     _stage(stage + 4))
        cj0 = extend_coverage(cj0, horizon)
        _, ecf0_j, _ = limit_ecf(cj0, tgrid, np.array([[0.0]]))
        L0 = numerical_laplace(tgrid, ecf0_j[:, 0], np.asarray(svals))
        for j, s in enumerate(svals):
            records.append(_rec(
                "jump-first-equation", model, f"k=0 s={s} normalization",
                1.0 / s, complex(L0[j]), 0.0, 0.0, "reported", None,
                detail={"abs_resid": abs(complex(L0[j]) - 1.0 / s)}))
    params = {"oracle_tol": 1e-4, "eps": eps, "paths": n_paths,
              "horizon": horizon, "laplace_points": m_grid,
              "k": list(kvals), "s": list(svals)}
    notes = [
        "oracle records: the reduced source transform against values "
        "frozen from an independent brute-force double quadrature "
        "(tests/oracles/gen_p2_brute.py), asserted at 1e-4",
        "MC records are reported without a gate; the residual against "
        "the source transform is O(1) at small k and is structural, "
        "not sampling noise: the source transform diverges like "
        "|<k,u>|**(beta-1) as k -> 0, so it cannot equal the "
        "transform of the position law there (a probability "
        "transform is bounded by 1/s)",
        "first-passage records compare the same MC values against the "
        "renewal identity [psi(k,s) - psi(k,0)] / (s psi(k,s)), which "
        "does transform the position law; agreement at the percent "
        "level pins the Monte Carlo side as ground truth",
        "at k = 0 (or any direction atom orthogonal to k) the printed "
        "source has no finite transform: its boundary power diverges, "
        "so those points are reported against plain normalization "
        "1/s rather than masked or interpolated",
    ]
    return _report("jump-first-equation", seed, params, records, notes)


# --------------------------------------------------- convergence suites


def _kgrid16():
    half = np.linspace(0.25, 2.0, 8)
    return np.concatenate([-half[::-1], half])


def suite_glw_convergence(seed, log=None):
    """Walk-to-limit ECF distance shrinks as the scale grows."""
    eps = 1e-3
    n_paths = 100_000
    mixing = MixingDensity(0.5, 2.0)
    measure = DistributedJumpMeasure(mixing)
    kgrid = _kgrid16()
    scales = (100.0, 1000.0, 10_000.0)
    records = []
    stage = 0
    for model, scen in (("glw", WAIT_FIRST), ("golw", JUMP_FIRST)):
        if log:
            log(f"glw-convergence: limit ensemble ({scen})")
        ref = limit_ensemble(measure, _pair(), eps, np.array([1.0]),
                             n_paths, seed, scen,
                             first_path=_stage(stage))[:, 0, :]
        stage += 1
        dists = []
        for n in scales:
            if log:
                log(f"glw-convergence: {model} n={n:g}, {n_paths} paths")
            pos = walk_ensemble(ConditionedMixtureLaw(mixing, n), scen,
                                np.array([1.0]), n_paths, seed,
                                first_path=_stage(stage))[:, 0, :]
            stage += 1
            dists.append(ecf_distance(pos, ref, kgrid))
        for n, dist in zip(scales, dists):
            gate = "asserted" if n == scales[-1] else "reported"
            passed = (dist < 0.05) if gate == "asserted" else None
            records.append(_rec(
                "glw-convergence", model, f"n={n:g}", [0.0, 0.0],
                [dist, 0.0], 0.0, 0.05 if gate == "asserted" else 0.0,
                gate, passed))
        mono = all(b <= a for a, b in zip(dists, dists[1:]))
        records.append(_rec(
            "glw-convergence", model, "monotone over n", [0.0, 0.0],
            [max(b - a for a, b in zip(dists, dists[1:])), 0.0],
            0.0, 0.0, "asserted", mono,
            detail={f"d_{int(n)}": d for n, d in zip(scales, dists)}))
    params = {"eps": eps, "paths": n_paths, "t": 1.0,
              "scales": list(scales), "k_grid": kgrid.tolist(),
              "mixing": {"gamma": 0.5, "b": 2.0}}
    notes = ["distance = max over the 16-point k grid of the ECF gap "
             "between the walk at scale n and the limit ensemble; "
             "the largest scale is asserted below 0.05 and the "
             "sequence must be non-increasing"]
    return _report("glw-convergence", seed, params, records, notes)


def suite_rescaled_lw(seed, log=None):
    """Ballistically rescaled stable walk against its limit."""
    eps = 1e-3
    alpha = 0.5
    n_paths = 100_000
    kgrid = _kgrid16()
    measure = StableJumpMeasure(alpha)
    law = HeavyTailLaw(alpha)
    scales = (100.0, 1000.0, 10_000.0)
    if log:
        log("rescaled-lw: limit ensemble (wait-first)")
    ref = limit_ensemble(measure, _pair(), eps, np.array([1.0]),
                         n_paths, seed, WAIT_FIRST,
                         first_path=_stage(0))[:, 0, :]
    _, se_ref = empirical_cf(ref, kgrid)
    dists = []
    floors = []
    records = []
    for stage, n in enumerate(scales, start=1):
        c = n ** (1.0 / alpha)
        if log:
            log(f"rescaled-lw: n={n:g} (time scale {c:g}), "
                f"{n_paths} paths")
        pos = rescaled_walk_positions(law, WAIT_FIRST, np.array([1.0]),
                                      c, n_paths, seed,
                                      first_path=_stage(stage))[:, 0, :]
        dists.append(ecf_distance(pos, ref, kgrid))
        _, se_w = empirical_cf(pos, kgrid)
        floors.append(float(np.max(np.hypot(se_w, se_ref))))
    for n, dist, floor in zip(scales, dists, floors):
        gate = "asserted" if n == scales[-1] else "reported"
        passed = (dist < 0.05) if gate == "asserted" else None
        records.append(_rec(
            "rescaled-lw", "lw", f"n={n:g}", [0.0, 0.0], [dist, 0.0],
            floor, 0.05 if gate == "asserted" else 0.0, gate, passed,
            detail={"noise_floor_3se": 3.0 * floor}))
    # the exact-power-tail walk sits at the sampling noise floor from
    # the first rung on, so strict ordering among rungs carries no
    # signal; non-increase is asserted up to the paired 3*SE allowance
    # and the raw ordering is reported
    allow = 3.0 * max(
        math.hypot(a, b) for a, b in zip(floors, floors[1:]))
    worst_up = max(b - a for a, b in zip(dists, dists[1:]))
    records.append(_rec(
        "rescaled-lw", "lw", "monotone up to noise", [0.0, 0.0],
        [worst_up, 0.0], 0.0, allow, "asserted", worst_up <= allow,
        detail={f"d_{int(n)}": d for n, d in zip(scales, dists)}))
    records.append(_rec(
        "rescaled-lw", "lw", "monotone strictly", [0.0, 0.0],
        [worst_up, 0.0], 0.0, 0.0, "reported", None))
    params = {"eps": eps, "alpha": alpha, "paths": n_paths,
              "scales": list(scales), "k_grid": kgrid.tolist(),
              "position_scale": "n**(1/alpha)"}
    notes = ["the walk runs to physical time n**(1/alpha) and positions "
             "divide by the same factor (unit-speed coupling scales "
             "space and time together)",
             "every rung's distance sits at the Monte Carlo noise "
             "floor (see noise_floor_3se): the exactly-power-tailed "
             "walk is statistically indistinguishable from the limit "
             "at these ensemble sizes already at the smallest scale, "
             "so ordering among rungs is asserted only up to the "
             "paired sampling allowance"]
    return _report("rescaled-lw", seed, params, records, notes)


# ----------------------------------------------------------- tail-index


def suite_tail_index(seed, log=None):
    """Hill estimator on a known tail, then on jump-first positions."""
    n_samp = 100_000
    m = 1000
    if log:
        log(f"tail-index: Hill on {n_samp} heavy-tail waits")
    u = RngStream(seed, _stage(0)).uniforms(n_samp)
    pareto = u ** (-2.0)  # survival x**-0.5
    est = hill_tail_index(pareto, m)
    records = [_rec(
        "tail-index", "reference", f"pareto alpha=0.5 m={m}",
        [0.5, 0.0], [est, 0.0], 0.0, 0.05, "asserted",
        abs(est - 0.5) <= 0.05)]

    if log:
        log(f"tail-index: jump-first walk positions at t=10, {n_samp} "
            "paths")
    pos = walk_ensemble(HeavyTailLaw(0.5), JUMP_FIRST, np.array([10.0]),
                        n_samp, seed, first_path=_stage(1))[:, 0, 0]
    x = np.abs(pos)
    x = x[np.isfinite(x) & (x > 0.0)]
    est2 = hill_tail_index(x, m)
    records.append(_rec(
        "tail-index", "olw", f"|position| t=10 m={m}", [0.5, 0.0],
        [est2, 0.0], 0.0, 0.0, "reported", None,
        detail={"used_samples": float(x.size)}))
    params = {"samples": n_samp, "order": m, "alpha": 0.5}
    notes = ["the walk-position record is reported only: the in-flight "
             "jump dominates the tail but the estimator's bias at "
             "finite t is not pinned by the governing equations"]
    return _report("tail-index", seed, params, records, notes)


# -------------------------------------------------------- normalization


def suite_normalization(seed, log=None):
    """Exact unit-mass identities of transforms, kernels, and ECFs."""
    records = []
    svals = (0.5, 1.0, 2.0)
    cases = [("limit-stable", StableJumpMeasure(0.5)),
             ("limit-distributed",
              DistributedJumpMeasure(MixingDensity(1.0, 2.0)))]
    if log:
        log("normalization: transform identities at k=0")
    for model, measure in cases:
        p1 = theoretical_p1_fl(measure, _pair(), 0.0,
                               np.asarray(svals))
        for j, s in enumerate(svals):
            mc = complex(p1[0, j])
            records.append(_rec(
                "normalization", model, f"p1 k=0 s={s}", 1.0 / s, mc,
                0.0, 5e-13, "asserted", abs(mc - 1.0 / s) <= 5e-13))
    if log:
        log("normalization: ECF at k=0 over 2000 limit paths")
    measure = StableJumpMeasure(0.5)
    cj = simulate_coupled_jumps(measure, _pair(), 1e-3, 1.0, 2000, seed,
                                _stage(0))
    cj = extend_coverage(cj, 1.0)
    ecf_w, ecf_j, _ = limit_ecf(cj, np.array([0.5, 1.0]),
                                np.array([[0.0]]))
    for scen, vals in (("wait-first", ecf_w), ("jump-first", ecf_j)):
        err = float(np.max(np.abs(vals - 1.0)))
        records.append(_rec(
            "normalization", "limit-stable", f"ecf k=0 {scen}",
            [1.0, 0.0], [float(vals.real.min()), float(vals.imag.max())],
            0.0, 0.0, "asserted", err == 0.0))
    params = {"s": list(svals), "paths": 2000}
    notes = ["k = 0 identities hold to rounding by construction: the "
             "transforms share one quadrature call between numerator "
             "and denominator, and the ECF kernels add exactly 1 per "
             "path at k = 0"]
    return _report("normalization", seed, params, records, notes)


# ------------------------------------------------------------- registry


SUITES = {
    "normalization": (suite_normalization,
                      "exact unit-mass identities (transforms, ECF)"),
    "cone": (suite_cone,
             "wait-first displacement bounded by elapsed time"),
    "waiting-law": (suite_waiting_law,
                    "KS test of the conditional waiting-time law"),
    "subordinator-stable": (suite_subordinator_stable,
                            "Laplace functional, stable subordinator"),
    "subordinator-distributed": (suite_subordinator_distributed,
                                 "Laplace functional, mixture "
                                 "subordinator"),
    "coupled-cf": (suite_coupled_cf,
                   "joint Fourier-Laplace functional of the pair"),
    "wait-first-equation": (suite_wait_first_equation,
                            "transformed ECF against the wait-first "
                            "governing form"),
    "jump-first-equation": (suite_jump_first_equation,
                            "jump-first source transform: oracle and "
                            "MC residuals"),
    "glw-convergence": (suite_glw_convergence,
                        "walk-to-limit ECF distance over the scale "
                        "ladder"),
    "rescaled-lw": (suite_rescaled_lw,
                    "ballistically rescaled stable walk vs its limit"),
    "tail-index": (suite_tail_index,
                   "Hill estimator on waits and walk positions"),
}


def run_suite(name, seed=0, out_dir=None, log=None):
    """Run one suite; optionally write its report and record table.

    Returns (report, written_paths).  Unknown names raise ValueError
    listing the alternatives.
    """
    if name not in SUITES:
        raise ValueError(
            f"unknown suite {name!r}; available: "
            + ", ".join(sorted(SUITES)))
    fn, _ = SUITES[name]
    report = fn(int(seed), log)
    written = []
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        rp = os.path.join(out_dir, f"{name}-report.json")
        cp = os.path.join(out_dir, f"{name}-records.csv")
        _io.write_report_json(rp, report)
        _io.write_records_csv(cp, report["records"])
        written = [rp, cp]
    return report, written
