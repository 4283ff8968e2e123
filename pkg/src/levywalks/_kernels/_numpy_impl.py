"""Pure-numpy kernel backend.

Vectorized lockstep implementations of the hot loops.  Each trajectory
(or jump) owns a counter-based stream, and every algorithm consumes a
fixed, documented number of draws per step, so this backend and the
compiled backend trace the same stream positions draw for draw.

Model flags shared with the compiled backend:
  model 0: stable law, tail exponent alpha;
  model 1: distributed law, per-event mixing exponent from the
           quantile table;
  tilt 0:  tilted mixing exponent by rejection (magnitudes above eps);
  tilt 1:  tilted mixing exponent from a 65-node inverse-CDF grid
           (documented approximation for very small eps).
"""

import numpy as np

_U64 = np.uint64
GOLDEN = _U64(0x9E3779B97F4A7C15)
M1 = _U64(0xBF58476D1CE4E5B9)
M2 = _U64(0x94D049BB133111EB)
S30 = _U64(30)
S27 = _U64(27)
S31 = _U64(31)
S11 = _U64(11)
ONE = _U64(1)
TWO = _U64(2)
INV53 = 2.0 ** -53

XLO = 0.002
XHI = 0.998
NEWTON_ITERS = 8
SERIES_TERMS = 24
MAX_TILT_TRIALS = 1_000_000
TINY = 1e-300
# 2**53: the float grid spacing reaches 2.0 here, so a phase modulo
# 2*pi is pure rounding noise from this magnitude on
PHASE_LIM = 9007199254740992.0


def _uniforms(states, counters):
    z = states + counters * GOLDEN
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    z = z ^ (z >> S31)
    return ((z >> S11).astype(np.float64) + 0.5) * INV53


def _tail_solve(target, a, c, coef, cap):
    """Solve x**a * series(x) = target for x in (0, cap] by Newton."""
    x = (a * target) ** (1.0 / a)
    x = np.minimum(x, cap)
    x = np.maximum(x, TINY)
    for _ in range(NEWTON_ITERS):
        ps = np.zeros_like(x)
        for k in range(SERIES_TERMS - 1, -1, -1):
            ps = ps * x + coef[k]
        f = x ** a * ps - target
        fp = x ** (a - 1.0) * (1.0 - x) ** (c - 1.0)
        x = x - f / fp
        x = np.minimum(np.maximum(x, TINY), cap)
    return x


def qbeta_eval(u, gamma, b, beta_fn, xs, us, slopes, bidx, cl, cr):
    """Beta(gamma, b) quantile function on an array of uniforms."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    u_lo = us[0]
    u_hi = us[-1]
    left = u < u_lo
    right = u > u_hi
    mid = ~(left | right)
    if left.any():
        out[left] = _tail_solve(u[left] * beta_fn, gamma, b, cl, XLO)
    if right.any():
        out[right] = 1.0 - _tail_solve((1.0 - u[right]) * beta_fn,
                                       b, gamma, cr, 1.0 - XHI)
    if mid.any():
        um = u[mid]
        j = np.searchsorted(us, um, side="right") - 1
        j = np.clip(j, 0, xs.shape[0] - 2)
        h = us[j + 1] - us[j]
        th = (um - us[j]) / h
        t2 = th * th
        t3 = t2 * th
        out[mid] = (xs[j] * (2.0 * t3 - 3.0 * t2 + 1.0)
                    + (h * slopes[j]) * (t3 - 2.0 * t2 + th)
                    + xs[j + 1] * (-2.0 * t3 + 3.0 * t2)
                    + (h * slopes[j + 1]) * (t3 - t2))
    return out


def _directions(states, ctr, dmode, atoms, cumw, idx=None):
    """Draw one direction per state; returns (vectors, updated counters).

    Consumes 1 draw (discrete) or 2*ceil(d/2) draws (uniform sphere).
    """
    d = atoms.shape[1]
    n = states.shape[0]
    if dmode == 0:
        u = _uniforms(states, ctr + ONE)
        ctr = ctr + ONE
        ai = np.searchsorted(cumw, u, side="right")
        ai = np.minimum(ai, atoms.shape[0] - 1)
        return atoms[ai], ctr
    npairs = (d + 1) // 2
    g = np.empty((n, 2 * npairs))
    for p in range(npairs):
        ua = _uniforms(states, ctr + ONE)
        ub = _uniforms(states, ctr + TWO)
        ctr = ctr + TWO
        r = np.sqrt(-2.0 * np.log(ua))
        ang = 2.0 * np.pi * ub
        g[:, 2 * p] = r * np.cos(ang)
        g[:, 2 * p + 1] = r * np.sin(ang)
    g = g[:, :d]
    nrm = np.sqrt((g * g).sum(axis=1))
    bad = nrm == 0.0
    if bad.any():
        g[bad] = 0.0
        g[bad, 0] = 1.0
        nrm[bad] = 1.0
    return g / nrm[:, None], ctr


def _ragged_fill(out, rows_idx, lo, hi, values):
    """out[rows_idx[i], lo[i]:hi[i]] = values[i] for ragged ranges."""
    L = hi - lo
    tot = int(L.sum())
    if tot == 0:
        return
    rows = np.repeat(rows_idx, L)
    start = np.cumsum(L) - L
    cols = np.repeat(lo, L) + (np.arange(tot, dtype=np.int64)
                               - np.repeat(start, L))
    out[rows, cols] = np.repeat(values, L, axis=0)


def walk_positions(model, alpha, nscale, gamma, b, beta_fn, xs, us, slopes,
                   bidx, cl, cr, dmode, atoms, cumw, jump_first, times,
                   states):
    """Positions of N walk trajectories at sorted probe times.

    Event draw order per trajectory: [mixing exponent,] waiting time,
    direction block.  Returns (N, M, d).
    """
    N = states.shape[0]
    M = times.shape[0]
    d = atoms.shape[1]
    out = np.empty((N, M, d))
    S = np.zeros(N)
    ti = np.zeros(N, dtype=np.int64)
    ctr = np.zeros(N, dtype=np.uint64)
    posw = np.zeros((N, d))
    idx = np.nonzero(ti < M)[0]
    while idx.size:
        st = states[idx]
        c = ctr[idx]
        if model == 1:
            u1 = _uniforms(st, c + ONE)
            beta = qbeta_eval(u1, gamma, b, beta_fn, xs, us, slopes,
                              bidx, cl, cr)
            u2 = _uniforms(st, c + TWO)
            c = c + TWO
            # overflow to inf is intended: a tiny mixing exponent makes
            # the conditional wait exceed float range, and the fill loop
            # below treats that as "never finishes"
            with np.errstate(over="ignore"):
                T = (nscale * u2) ** (-1.0 / beta)
        else:
            u1 = _uniforms(st, c + ONE)
            c = c + ONE
            T = u1 ** (-1.0 / alpha)
        v, c = _directions(st, c, dmode, atoms, cumw)
        ctr[idx] = c
        Snew = S[idx] + T
        # zero direction component: zero displacement even when the
        # wait overflowed to inf (avoids inf*0 -> nan)
        with np.errstate(invalid="ignore"):
            jump = T[:, None] * v
        jump = np.where(v == 0.0, 0.0, jump)
        fillval = posw[idx] + jump if jump_first else posw[idx].copy()
        hi = np.searchsorted(times, Snew, side="left")
        _ragged_fill(out, idx, ti[idx], hi, fillval)
        posw[idx] += jump
        S[idx] = Snew
        ti[idx] = hi
        idx = idx[hi < M]
    return out


def sample_jumps(model, alpha, gamma, b, beta_fn, xs, us, slopes, bidx, cl,
                 cr, eps, tilt_mode, tilt_grid, dmode, atoms, cumw, states,
                 lo, hi):
    """Epoch, magnitude, and direction of one compound-Poisson jump each.

    Each jump owns a stream.  Draw order: epoch uniform, magnitude block
    (stable: 1 draw; distributed: rejection pairs or grid draw, then the
    conditional tail draw), direction block.  Returns
    (epochs, mags, dirs, fail) where fail marks exhausted rejections.
    """
    J = states.shape[0]
    d = atoms.shape[1]
    ctr = np.zeros(J, dtype=np.uint64)
    u = _uniforms(states, ctr + ONE)
    ctr += ONE
    epochs = lo + (hi - lo) * u
    fail = np.zeros(J, dtype=bool)
    if model == 0:
        u = _uniforms(states, ctr + ONE)
        ctr += ONE
        mags = eps * u ** (-1.0 / alpha)
    else:
        beta = np.empty(J)
        if tilt_mode == 1:
            u = _uniforms(states, ctr + ONE)
            ctr += ONE
            pos = u * (tilt_grid.shape[0] - 1)
            j = np.minimum(pos.astype(np.int64), tilt_grid.shape[0] - 2)
            frac = pos - j
            beta = tilt_grid[j] + (tilt_grid[j + 1] - tilt_grid[j]) * frac
        else:
            lneps = np.log(eps)
            shift = 1.0 if eps < 1.0 else 0.0
            active = np.ones(J, dtype=bool)
            trials = 0
            while active.any():
                trials += 1
                if trials > MAX_TILT_TRIALS:
                    fail |= active
                    beta[active] = 0.5
                    break
                ii = np.nonzero(active)[0]
                u1 = _uniforms(states[ii], ctr[ii] + ONE)
                u2 = _uniforms(states[ii], ctr[ii] + TWO)
                ctr[ii] += TWO
                cand = qbeta_eval(u1, gamma, b, beta_fn, xs, us, slopes,
                                  bidx, cl, cr)
                acc = np.log(u2) < (shift - cand) * lneps
                beta[ii[acc]] = cand[acc]
                active[ii[acc]] = False
        u = _uniforms(states, ctr + ONE)
        ctr += ONE
        # inf magnitudes are faithful: the tilted measure has tails
        # heavier than any power, and exp(-lam*inf) == 0 downstream
        with np.errstate(over="ignore"):
            mags = eps * u ** (-1.0 / beta)
    dirs, ctr = _directions(states, ctr, dmode, atoms, cumw)
    return epochs, mags, dirs, fail


def limit_positions(starts, epochs, mags, dirs, drift_s, drift_l, times,
                    jump_first):
    """Positions of the limit process at sorted probe times.

    Per list: S(tau) = drift_s*tau + sum of magnitudes up to tau; each
    probe t is resolved to the first-passage point, taking the pre-jump
    position (wait-first) or post-jump position (jump-first) when a jump
    straddles t.  Returns (N, M, d) and a coverage-failure flag array.
    """
    N = starts.shape[0] - 1
    M = times.shape[0]
    d = dirs.shape[1]
    out = np.empty((N, M, d))
    bad = np.zeros(N, dtype=bool)
    for i in range(N):
        j0, j1 = int(starts[i]), int(starts[i + 1])
        e = epochs[j0:j1]
        m = mags[j0:j1]
        dv = dirs[j0:j1]
        nj = e.shape[0]
        cum_s = np.concatenate(([0.0], np.cumsum(m)))
        # an overflowed magnitude can meet a zero direction component
        # (inf*0 -> nan); entries at and past such a jump are never
        # read because first passage pins there, so only the warning
        # needs suppressing
        with np.errstate(invalid="ignore"):
            cum_l = np.concatenate((np.zeros((1, d)),
                                    np.cumsum(m[:, None] * dv, axis=0)))
        # S including jump j, increasing in j; first passage over t is at
        # jump js when S just before that jump is still <= t
        s_post = drift_s * e + cum_s[1:]
        js = np.searchsorted(s_post, times, side="right")
        jc = np.minimum(js, max(nj - 1, 0))
        if nj > 0:
            s_pre_at = drift_s * e[jc] + cum_s[jc]
            straddle = (js < nj) & (s_pre_at <= times)
        else:
            straddle = np.zeros(M, dtype=bool)
        if drift_s > 0.0:
            tau_c = (times - cum_s[js]) / drift_s
            res = tau_c[:, None] * drift_l[None, :] + cum_l[js]
        else:
            res = np.full((M, d), np.nan)
        if nj > 0 and straddle.any():
            xw = e[jc][:, None] * drift_l[None, :] + cum_l[jc]
            if jump_first:
                # a zero direction component means zero displacement
                # even when the magnitude overflowed to inf
                with np.errstate(invalid="ignore"):
                    disp = (m[jc])[:, None] * dv[jc]
                xw = xw + np.where(dv[jc] == 0.0, 0.0, disp)
            res = np.where(straddle[:, None], xw, res)
        out[i] = res
        # unresolvable probe: no straddling jump and no drift to invert
        if drift_s <= 0.0 and not np.all(straddle):
            bad[i] = True
    return out, bad


def limit_ecf_blocks(starts, epochs, mags, dirs, drift_s, drift_l, times,
                     kvecs, block):
    """Blockwise partial ECF sums of the limit process, both scenarios.

    Returns (pw, pj): complex arrays of shape (nblocks, M, nk) holding
    sums of exp(i k.x(t)) over the paths of each fixed block, for the
    wait-first and jump-first positions.  Block membership is a fixed
    slicing of path indices, so totals are independent of threading.

    A jump-first position coordinate can be huge or overflow to inf (a
    mixing exponent near zero makes the in-progress jump astronomically
    long).  Past PHASE_LIM the float grid is coarser than the phase
    period, so the phase carries no information; the true contribution
    of that region to the CF vanishes anyway (the position density out
    there is flat on the 2*pi/k scale).  Such a coordinate therefore
    contributes 0 against any k with a nonzero component along it,
    while components with k_c = 0 contribute exactly 0 whatever the
    coordinate and never invalidate the phase.

    Phases accumulate coordinate-major with plain multiply-add so both
    backends trace identical rounding (no FMA contraction).
    """
    N = starts.shape[0] - 1
    M = times.shape[0]
    nk = kvecs.shape[0]
    d = dirs.shape[1]
    nb = (N + block - 1) // block
    pw = np.zeros((nb, M, nk), dtype=np.complex128)
    pj = np.zeros((nb, M, nk), dtype=np.complex128)
    kzero = kvecs.T == 0.0  # (d, nk)
    for blk in range(nb):
        i0 = blk * block
        i1 = min(N, i0 + block)
        xw, _ = limit_positions(starts[i0:i1 + 1] - starts[i0],
                                epochs[starts[i0]:starts[i1]],
                                mags[starts[i0]:starts[i1]],
                                dirs[starts[i0]:starts[i1]],
                                drift_s, drift_l, times, False)
        xj, _ = limit_positions(starts[i0:i1 + 1] - starts[i0],
                                epochs[starts[i0]:starts[i1]],
                                mags[starts[i0]:starts[i1]],
                                dirs[starts[i0]:starts[i1]],
                                drift_s, drift_l, times, True)
        for i in range(i1 - i0):
            phw = np.zeros((M, nk))
            for c in range(d):
                phw += np.multiply.outer(xw[i][:, c], kvecs[:, c])
            pw[blk] += np.cos(phw) + 1j * np.sin(phw)
            xok = np.isfinite(xj[i]) & (np.abs(xj[i]) < PHASE_LIM)
            xz = np.where(xok, xj[i], 0.0)
            phj = np.zeros((M, nk))
            for c in range(d):
                phj += np.multiply.outer(xz[:, c], kvecs[:, c])
            if xok.all():
                pj[blk] += np.cos(phj) + 1j * np.sin(phj)
            else:
                # a row is valid for k unless an unresolvable coordinate
                # meets a nonzero k component
                hits = (~xok).astype(np.float64) @ (~kzero).astype(
                    np.float64)
                pj[blk] += np.where(hits == 0.0,
                                    np.cos(phj) + 1j * np.sin(phj), 0.0)
    return pw, pj


def coupled_terminal(starts, mags, dirs, drift_s, drift_l, tau):
    """Coupled pair (L(tau), S(tau)) per jump list: sums plus drift."""
    N = starts.shape[0] - 1
    d = dirs.shape[1]
    counts = np.diff(starts)
    ids = np.repeat(np.arange(N), counts)
    S = drift_s * tau + np.bincount(ids, weights=mags, minlength=N)
    L = np.empty((N, d))
    for c in range(d):
        L[:, c] = drift_l[c] * tau + np.bincount(
            ids, weights=mags * dirs[:, c], minlength=N)
    return L, S
