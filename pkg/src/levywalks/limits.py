"""Scaling-limit processes: the coupled jump pair and its first passage.

The rescaled walks converge to a coupled pair (L, S): S is a driftless
pure-jump subordinator and L moves by the same jumps, each magnitude
multiplied by a random unit direction.  Simulation truncates the jump
measure at magnitude eps: jumps above eps arrive at Poisson epochs with
the exact restricted law, and the deleted small jumps are replaced by
their mean, a deterministic drift (drift_s for S, drift_s times the
mean direction for L).  The exact effect of the truncation on the
transform side is available through ``truncated_laplace_exponent`` and
``truncation_bias``.

Walk-limit positions at time t are read off S's first passage over t:
the pre-jump point (wait-first scenario), the post-jump point
(jump-first), or the crossing point when drift alone carries S over t.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from . import _kernels
from ._quad import de_nodes, integrate01, mixing_integral
from .rng import COUNT_TAG, poisson_counts, stream_states, substream_states
from .sampling import (
    DUMMY_TABLE_ARGS,
    JUMP_FIRST,
    WAIT_FIRST,
    DirectionMeasure,
    MixingDensity,
    validate_mixing_density,
)

# substream namespace for the jump-list orchestrator: window w of list i
# lives at substream (WINDOW_TAG + w) of stream (seed, first_list + i)
_WINDOW_TAG = np.uint64(1) << np.uint64(40)

TILT_GRID_EPS = 1e-4
TILT_GRID_NODES = 65
_MAX_WINDOW_RATE = 1e8


class CoverageError(RuntimeError):
    """A jump list does not reach far enough to resolve a probe time."""


def _phi2(z, t):
    """(exp(-z t) - 1 + z t) / t**2 on the outer grid (z rows, t cols).

    The series branch factors out z**2, so the value survives t values
    below the underflow threshold of t**2.
    """
    w = np.multiply.outer(z, t)
    small = np.abs(w) < 1e-2
    ws = np.where(small, w, 0.0)
    series = (0.5 + ws * (-1.0 / 6.0 + ws * (1.0 / 24.0 + ws * (
        -1.0 / 120.0 + ws * (1.0 / 720.0 - ws / 5040.0)))))
    series = series * (z * z)[:, None]
    wb = np.where(small, 1.0, w)
    tb = np.where(small, 1.0, np.broadcast_to(t, w.shape))
    direct = (np.exp(-wb) - 1.0 + wb) / (tb * tb)
    return np.where(small, series, direct)


@dataclass(frozen=True)
class StableJumpMeasure:
    """Jump measure with density alpha * t**(-alpha-1) / Gamma(1-alpha).

    Normalized so the subordinator's Laplace exponent is exactly
    lam**alpha.
    """

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly inside (0, 1)")

    def density(self, t):
        t = np.asarray(t, dtype=np.float64)
        a = self.alpha
        return a * t ** (-a - 1.0) / sp.gamma(1.0 - a)

    def tail_mass(self, eps):
        """Measure of magnitudes above eps: eps**(-alpha)/Gamma(1-alpha)."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        return eps ** -self.alpha / sp.gamma(1.0 - self.alpha)

    def small_jump_drift(self, eps):
        """Mean of the deleted jumps: int_0^eps t nu(dt)."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        a = self.alpha
        return a * eps ** (1.0 - a) / ((1.0 - a) * sp.gamma(1.0 - a))

    def laplace_exponent(self, z):
        """int (1 - exp(-z t)) nu(dt) = z**alpha, principal branch.

        Defined for Re z >= 0 (z = s - i<k,u> points arise downstream).
        """
        z = np.asarray(z)
        return z ** self.alpha

    def compensated_remainder(self, z, eps):
        """int_0^eps (exp(-z t) - 1 + z t) nu(dt).

        The exact transform-side residual of replacing sub-eps jumps by
        their mean drift; order eps**(2-alpha) as eps -> 0.
        """
        z = np.atleast_1d(np.asarray(z))
        a = self.alpha
        pref = a * eps ** (2.0 - a) / sp.gamma(1.0 - a)

        def f(x, omx):
            return _phi2(z, eps * x) * x ** (1.0 - a)

        val, _ = integrate01(f)
        return pref * val

    def kernel_args(self):
        return 0, self.alpha, DUMMY_TABLE_ARGS


@dataclass(frozen=True)
class DistributedJumpMeasure:
    """Mixture jump measure int_0^1 beta t**(-beta-1) p(beta) dbeta dt.

    p is the Beta(gamma, b) mixing density; the edge integrability
    condition b > 1 is required so the deleted-jump drift and the
    regularized exponent integrals are finite.
    """

    mixing: MixingDensity
    rtol: float = 1e-10

    def __post_init__(self):
        report = validate_mixing_density(self.mixing)
        if not report.valid:
            raise ValueError("; ".join(report.messages))

    def density(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))

        def g(x, omx):
            return np.exp(np.multiply.outer(-np.log(t), x)) \
                * x / t[:, None]

        val, _ = mixing_integral(self.mixing, g, rtol=self.rtol)
        return val

    def tail_mass(self, eps):
        """int p(beta) eps**(-beta) dbeta."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        lneps = math.log(eps)

        def g(x, omx):
            return np.exp(-lneps * x)

        val, _ = mixing_integral(self.mixing, g, rtol=self.rtol)
        return float(val)

    def small_jump_drift(self, eps):
        """int [beta/(1-beta)] eps**(1-beta) p(beta) dbeta."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        lneps = math.log(eps)

        def g(x, omx):
            return x * np.exp(lneps * omx)

        val, _ = mixing_integral(self.mixing, g, edge_shift=1,
                                 rtol=self.rtol)
        return float(val)

    def laplace_exponent(self, z):
        """int Gamma(1-beta) z**beta p(beta) dbeta, principal branch.

        Gamma(1-beta) is evaluated as Gamma(2-beta)/(1-beta) and the
        pole folded into the quadrature weight, so the integrand stays
        bounded at beta -> 1.  Defined for Re z >= 0; the entries with
        z == 0 return 0.
        """
        z = np.atleast_1d(np.asarray(z))
        out = np.zeros(z.shape, dtype=complex if np.iscomplexobj(z)
                       else float)
        nz = z != 0.0
        if np.any(nz):
            lnz = np.log(z[nz].astype(complex))
            if not np.iscomplexobj(z):
                lnz = lnz.real

            def g(x, omx):
                return sp.gamma(1.0 + omx) * np.exp(
                    np.multiply.outer(lnz, x))

            val, _ = mixing_integral(self.mixing, g, edge_shift=1,
                                     rtol=self.rtol)
            out[nz] = val
        return out

    def compensated_remainder(self, z, eps):
        """int_0^eps (exp(-z t) - 1 + z t) nu(dt), order eps/log as eps->0.

        Uses the bounded reformulation
        int_0^eps [(e**(-zt)-1+zt)/t**2] * m2(t) dt with
        m2(t) = int beta t**(1-beta) p(beta) dbeta.
        """
        z = np.atleast_1d(np.asarray(z))

        def f(x, omx):
            t = eps * x
            lnt = np.log(t)

            def g_m2(xb, omxb):
                return xb * np.exp(np.multiply.outer(lnt, omxb))

            m2, _ = mixing_integral(self.mixing, g_m2, rtol=self.rtol)
            return _phi2(z, t) * m2

        val, _ = integrate01(f)
        return eps * val

    def kernel_args(self):
        table = self.mixing.quantile_table()
        return 1, 0.0, table.as_args()


def subordinator_laplace(measure, lam, tau=1.0):
    """E exp(-lam * S(tau)) = exp(-tau * laplace_exponent(lam))."""
    return np.exp(-tau * measure.laplace_exponent(lam))


def truncated_laplace_exponent(measure, z, eps):
    """Exact Laplace exponent of the eps-truncated pair's S component."""
    return measure.laplace_exponent(z) + measure.compensated_remainder(
        z, eps)


def truncation_bias(measure, z, eps, tau=1.0):
    """|E exp(-z S(tau)) - E exp(-z S_eps(tau))| on the transform side.

    Both expectations are exact closed/quadrature forms, so this is the
    deterministic part of the simulation error at truncation level eps.
    """
    exact = np.exp(-tau * measure.laplace_exponent(z))
    approx = np.exp(-tau * truncated_laplace_exponent(measure, z, eps))
    return np.abs(exact - approx)


def build_tilt_grid(mixing, eps, nodes=TILT_GRID_NODES):
    """Inverse CDF of the tilted density eps**(-beta) p(beta) on a grid.

    Used by the kernels when eps is too small for rejection sampling to
    stay cheap; linear interpolation between the nodes is a documented
    approximation of the tilted law.
    """
    x, omx, w, h = de_nodes(6)
    lnp = ((mixing.gamma - 1.0) * np.log(x)
           + (mixing.b - 1.0) * np.log(omx)
           - sp.betaln(mixing.gamma, mixing.b))
    f = np.exp(lnp - math.log(eps) * x)
    cdf = np.cumsum(h * w * f)
    cdf = cdf / cdf[-1]
    # strictly increasing knots for interpolation
    keep = np.concatenate(([True], np.diff(cdf) > 0.0))
    return np.interp(np.linspace(0.0, 1.0, nodes), cdf[keep], x[keep])


@dataclass(frozen=True)
class CoupledJumpLists:
    """Truncated jump lists of the coupled pair, one list per path.

    Jumps of list i live in starts[i]:starts[i+1], sorted by epoch
    within [0, horizons[i]].  Magnitudes are at least eps (inf is legal:
    the mixture measure has tails heavier than any power).  The missing
    sub-eps jumps are summarized by drift_s (and drift_l in space).
    List i regenerates deterministically from (seed, first_list + i).
    """

    measure: object
    directions: DirectionMeasure
    eps: float
    tilt_mode: int
    tilt_grid: np.ndarray
    seed: int
    first_list: int
    tau0: float
    starts: np.ndarray
    epochs: np.ndarray
    mags: np.ndarray
    dirs: np.ndarray
    windows: np.ndarray
    horizons: np.ndarray
    drift_s: float
    drift_l: np.ndarray

    def __post_init__(self):
        n = self.starts.shape[0] - 1
        if n < 1 or self.starts[0] != 0 or self.starts[-1] != len(self.mags):
            raise ValueError("starts must index the jump arrays")
        if np.any(np.diff(self.starts) < 0):
            raise ValueError("starts must be nondecreasing")
        if len(self.epochs) != len(self.mags) or len(self.dirs) != len(self.mags):
            raise ValueError("jump arrays must share one length")
        if np.any(self.mags < self.eps * (1.0 - 1e-12)):
            raise ValueError("magnitudes must be >= eps")
        owner = np.repeat(np.arange(n), np.diff(self.starts))
        if np.any(self.epochs < 0.0) or np.any(
                self.epochs > self.horizons[owner]):
            raise ValueError("epochs must lie within each list's horizon")
        inner = np.diff(self.epochs) < 0.0
        if np.any(inner & (owner[1:] == owner[:-1])):
            raise ValueError("epochs must be sorted within each list")
        if not self.drift_s > 0.0:
            raise ValueError("drift_s must be positive (eps > 0)")

    @property
    def n_lists(self) -> int:
        return self.starts.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.dirs.shape[1]

    def terminal_sums(self) -> np.ndarray:
        """S at each list's horizon: drift plus all jump magnitudes."""
        n = self.n_lists
        owner = np.repeat(np.arange(n), np.diff(self.starts))
        return self.drift_s * self.horizons + np.bincount(
            owner, weights=self.mags, minlength=n)

    def covered_to(self) -> float:
        """Largest probe time every list can resolve (exclusive)."""
        return float(self.terminal_sums().min())


def _window_bounds(tau0, w):
    if w == 0:
        return 0.0, tau0
    return tau0 * 2.0 ** (w - 1), tau0 * 2.0 ** w


def _sample_window(measure, directions, eps, tilt_mode, tilt_grid, seed,
                   first_list, list_idx, tau0, w):
    """Jumps of window w for the given lists: (owner_idx, e, m, v)."""
    lo, hi = _window_bounds(tau0, w)
    lam = measure.tail_mass(eps) * (hi - lo)
    if lam > _MAX_WINDOW_RATE:
        raise CoverageError(
            f"window rate {lam:.3g} jumps per list is beyond reach; "
            "raise eps or lower the probe horizon")
    n = list_idx.size
    roots = stream_states(seed, (first_list + list_idx).astype(np.uint64))
    wtag = np.full(n, _WINDOW_TAG + np.uint64(w), dtype=np.uint64)
    wins = substream_states(roots, wtag)
    counts = poisson_counts(
        substream_states(wins, np.full(n, COUNT_TAG, dtype=np.uint64)), lam)
    tot = int(counts.sum())
    d = directions.dim
    if tot == 0:
        return (np.empty(0, dtype=np.int64), np.empty(0), np.empty(0),
                np.empty((0, d)))
    owner = np.repeat(np.arange(n), counts)
    offs = np.cumsum(counts) - counts
    jtags = (np.arange(tot, dtype=np.int64)
             - np.repeat(offs, counts)).astype(np.uint64)
    jstates = substream_states(wins[owner], jtags)
    model, alpha, targs = measure.kernel_args()
    dmode, atoms, cumw = directions.sampler_args()
    epochs, mags, dirs, fail = _kernels.get().sample_jumps(
        model, alpha, *targs, eps, tilt_mode, tilt_grid, dmode, atoms,
        cumw, jstates, np.full(tot, lo), np.full(tot, hi))
    if np.any(fail):
        raise RuntimeError(
            "tilted-exponent rejection exhausted its trial budget; this "
            "marks a configuration error (eps incompatible with the "
            "mixing density)")
    return list_idx[owner], epochs, mags, dirs


def simulate_coupled_jumps(measure, directions, eps, tau_max, n_lists,
                           seed, first_list=0,
                           tilt_eps=TILT_GRID_EPS) -> CoupledJumpLists:
    """Simulate n_lists truncated jump lists of the pair on [0, tau_max].

    Jump counts are Poisson with the restricted measure's mass;
    magnitudes follow the exact restricted law (for the mixture measure
    via a tilted mixing exponent, by rejection, or below ``tilt_eps``
    from an interpolated inverse CDF).  Everything derives from
    (seed, first_list), so lists extend and regenerate reproducibly.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if tau_max <= 0.0:
        raise ValueError("tau_max must be positive")
    if n_lists < 1:
        raise ValueError("n_lists must be >= 1")
    tilt_mode = 0
    tilt_grid = np.zeros(2)
    if isinstance(measure, DistributedJumpMeasure) and eps < tilt_eps:
        tilt_mode = 1
        tilt_grid = build_tilt_grid(measure.mixing, eps)
    idx = np.arange(n_lists, dtype=np.int64)
    owner, epochs, mags, dirs = _sample_window(
        measure, directions, eps, tilt_mode, tilt_grid, seed, first_list,
        idx, tau_max, 0)
    order = np.lexsort((epochs, owner))
    starts = np.zeros(n_lists + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=n_lists), out=starts[1:])
    drift_s = measure.small_jump_drift(eps)
    drift_l = drift_s * directions.mean_direction()
    return CoupledJumpLists(
        measure=measure, directions=directions, eps=eps,
        tilt_mode=tilt_mode, tilt_grid=tilt_grid, seed=seed,
        first_list=first_list, tau0=float(tau_max), starts=starts,
        epochs=epochs[order], mags=mags[order], dirs=dirs[order],
        windows=np.ones(n_lists, dtype=np.int64),
        horizons=np.full(n_lists, float(tau_max)),
        drift_s=float(drift_s), drift_l=np.asarray(drift_l, dtype=np.float64))


def extend_coverage(cj: CoupledJumpLists, t_cover,
                    max_windows=60) -> CoupledJumpLists:
    """Grow deficient lists (by horizon doubling) until S exceeds t_cover.

    Already-sampled windows are kept; new windows draw from their own
    substreams, so the result is independent of how many extension
    rounds it took.  Raises CoverageError if max_windows is reached.
    """
    n = cj.n_lists
    starts, epochs, mags, dirs = cj.starts, cj.epochs, cj.mags, cj.dirs
    windows = cj.windows.copy()
    horizons = cj.horizons.copy()
    sums = cj.terminal_sums()
    while True:
        need = sums <= t_cover
        if not np.any(need):
            break
        if np.any(windows[need] >= max_windows):
            raise CoverageError(
                f"lists still do not reach t={t_cover:g} after "
                f"{max_windows} horizon doublings")
        owner_all = [np.repeat(np.arange(n), np.diff(starts))]
        e_all, m_all, v_all = [epochs], [mags], [dirs]
        for w in np.unique(windows[need]):
            idx = np.nonzero(need & (windows == w))[0]
            own, e, m, v = _sample_window(
                cj.measure, cj.directions, cj.eps, cj.tilt_mode,
                cj.tilt_grid, cj.seed, cj.first_list, idx, cj.tau0, int(w))
            owner_all.append(own)
            e_all.append(e)
            m_all.append(m)
            v_all.append(v)
            sums[idx] += np.bincount(
                np.searchsorted(idx, own), weights=m, minlength=idx.size)
            lo, hi = _window_bounds(cj.tau0, int(w))
            sums[idx] += cj.drift_s * (hi - horizons[idx])
            horizons[idx] = hi
            windows[idx] += 1
        owner = np.concatenate(owner_all)
        epochs = np.concatenate(e_all)
        mags = np.concatenate(m_all)
        dirs = np.concatenate(v_all)
        order = np.lexsort((epochs, owner))
        owner = owner[order]
        epochs, mags, dirs = epochs[order], mags[order], dirs[order]
        starts = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(owner, minlength=n), out=starts[1:])
    return dataclasses.replace(
        cj, starts=starts, epochs=epochs, mags=mags, dirs=dirs,
        windows=windows, horizons=horizons)


def coupled_terminal_ensemble(cj: CoupledJumpLists, tau=None):
    """The pair (L(tau), S(tau)) across lists; tau must equal the horizon.

    Returns (L, S) with L shaped (n_lists, dim).  Requires every list
    to cover exactly [0, tau]: terminal sums count all jumps, so mixed
    horizons would mix operational times.
    """
    if tau is None:
        tau = cj.tau0
    if not np.all(cj.horizons == tau):
        raise ValueError(
            "terminal sums need a uniform horizon equal to tau; build "
            "the lists with tau_max=tau and no coverage extension")
    return _kernels.get().coupled_terminal(
        cj.starts, cj.mags, cj.dirs, cj.drift_s, cj.drift_l, float(tau))


def _check_times(times):
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times.ndim != 1 or times.shape[0] == 0:
        raise ValueError("times must be a nonempty 1-d array")
    if times[0] < 0.0 or np.any(np.diff(times) < 0.0):
        raise ValueError("times must be sorted and nonnegative")
    return times


def limit_positions_at(cj: CoupledJumpLists, times, scenario):
    """Limit-process positions at sorted probe times, (N, M, dim).

    Every list must already cover max(times); extend_coverage otherwise.
    """
    times = _check_times(times)
    if cj.covered_to() <= times[-1]:
        raise CoverageError(
            "some lists do not reach the last probe time; call "
            "extend_coverage first")
    jump_first = 1 if scenario == JUMP_FIRST else 0
    if scenario not in (WAIT_FIRST, JUMP_FIRST):
        raise ValueError(f"scenario must be {WAIT_FIRST!r} or {JUMP_FIRST!r}")
    pos, bad = _kernels.get().limit_positions(
        cj.starts, cj.epochs, cj.mags, cj.dirs, cj.drift_s, cj.drift_l,
        times, jump_first)
    if np.any(bad):
        raise CoverageError("lists failed first-passage resolution")
    return pos


def limit_ensemble(measure, directions, eps, times, n_paths, seed,
                   scenario, first_path=0):
    """Simulate lists, extend coverage, and return positions (N, M, d)."""
    times = _check_times(times)
    tau0 = max(float(times[-1]), eps, 1e-6)
    cj = simulate_coupled_jumps(measure, directions, eps, tau0, n_paths,
                                seed, first_path)
    cj = extend_coverage(cj, times[-1])
    return limit_positions_at(cj, times, scenario)


def limit_ecf(cj: CoupledJumpLists, times, kvecs, block=1024):
    """Empirical characteristic function of both scenarios on a k-grid.

    Returns (ecf_wait, ecf_jump, se) with shapes (M, nk): blockwise
    partial sums (fixed block membership, serial final reduction, so
    totals are bit-stable under threading) divided by n_lists, and the
    population bound sqrt((1-|ecf|^2)/N) on the standard error.
    """
    times = _check_times(times)
    if cj.covered_to() <= times[-1]:
        raise CoverageError(
            "some lists do not reach the last probe time; call "
            "extend_coverage first")
    kvecs = np.atleast_2d(np.asarray(kvecs, dtype=np.float64))
    if kvecs.shape[1] != cj.dim:
        raise ValueError("kvecs must have one column per dimension")
    pw, pj = _kernels.get().limit_ecf_blocks(
        cj.starts, cj.epochs, cj.mags, cj.dirs, cj.drift_s, cj.drift_l,
        times, kvecs, int(block))
    n = cj.n_lists
    ecf_w = np.add.reduce(pw, axis=0) / n
    ecf_j = np.add.reduce(pj, axis=0) / n
    se_w = np.sqrt(np.maximum(1.0 - np.abs(ecf_w) ** 2, 0.0) / n)
    se_j = np.sqrt(np.maximum(1.0 - np.abs(ecf_j) ** 2, 0.0) / n)
    return ecf_w, ecf_j, np.maximum(se_w, se_j)


def first_passage_profile(cj: CoupledJumpLists, times):
    """Diagnostic inverse-subordinator values tau*(t) per list.

    Returns (tau_star, straddled): the first-passage time of S over
    each probe t, and whether a jump (rather than pure drift) carries S
    across.  Segment crossings solve drift_s * tau + sum = t in closed
    form.  Python-loop implementation, meant for small diagnostics.
    """
    times = _check_times(times)
    if cj.covered_to() <= times[-1]:
        raise CoverageError(
            "some lists do not reach the last probe time; call "
            "extend_coverage first")
    n = cj.n_lists
    M = times.shape[0]
    tau = np.empty((n, M))
    strad = np.empty((n, M), dtype=bool)
    for i in range(n):
        j0, j1 = int(cj.starts[i]), int(cj.starts[i + 1])
        e = cj.epochs[j0:j1]
        m = cj.mags[j0:j1]
        cum = np.concatenate(([0.0], np.cumsum(m)))
        s_post = cj.drift_s * e + cum[1:]
        js = np.searchsorted(s_post, times, side="right")
        jc = np.minimum(js, max(e.shape[0] - 1, 0))
        hit = np.zeros(M, dtype=bool)
        if e.shape[0]:
            hit = (js < e.shape[0]) & (cj.drift_s * e[jc] + cum[jc] <= times)
        tau[i] = np.where(hit, e[jc] if e.shape[0] else 0.0,
                          (times - cum[js]) / cj.drift_s)
        strad[i] = hit
    return tau, strad
