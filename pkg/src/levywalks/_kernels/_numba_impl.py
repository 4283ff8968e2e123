"""Compiled kernel backend.

Scalar njit twins of the numpy backend with identical signatures and
identical per-event draw consumption, so both backends trace the same
stream positions.  Parallel loops only ever write rows owned by their
own index (trajectory, jump, or block), and final reductions happen
outside the kernels in fixed order, so results are independent of the
thread count.  fastmath stays off: reassociation would break the
cross-backend agreement on the table interpolation path.
"""

import math

import numpy as np
from numba import njit, prange

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
ZERO = _U64(0)
INV53 = 2.0 ** -53

XLO = 0.002
XHI = 0.998
NEWTON_ITERS = 8
SERIES_TERMS = 24
NBUCKETS = 4096
MAX_TILT_TRIALS = 1_000_000
TINY = 1e-300
# 2**53: float grid spacing 2.0, phases are rounding noise beyond it
PHASE_LIM = 9007199254740992.0


@njit(cache=True)
def _u_at(state, ctr):
    # keep every operand uint64: mixing in a signed int would promote
    # the whole chain to float64 under numba's numpy-style rules
    z = state + ctr * GOLDEN
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    z = z ^ (z >> S31)
    return (np.float64(z >> S11) + 0.5) * INV53


@njit(cache=True)
def _tail_solve1(target, a, c, coef, cap):
    x = (a * target) ** (1.0 / a)
    if x > cap:
        x = cap
    if x < TINY:
        x = TINY
    for _ in range(NEWTON_ITERS):
        ps = 0.0
        for k in range(SERIES_TERMS - 1, -1, -1):
            ps = ps * x + coef[k]
        f = x ** a * ps - target
        fp = x ** (a - 1.0) * (1.0 - x) ** (c - 1.0)
        x = x - f / fp
        if x > cap:
            x = cap
        if x < TINY:
            x = TINY
    return x


@njit(cache=True)
def _qbeta1(u, gamma, b, beta_fn, xs, us, slopes, bidx, cl, cr):
    n = us.shape[0]
    if u < us[0]:
        return _tail_solve1(u * beta_fn, gamma, b, cl, XLO)
    if u > us[n - 1]:
        return 1.0 - _tail_solve1((1.0 - u) * beta_fn, b, gamma, cr,
                                  1.0 - XHI)
    bk = int(u * NBUCKETS)
    if bk > NBUCKETS - 1:
        bk = NBUCKETS - 1
    # windowed bisect_right on us; the bucket table brackets the true
    # insertion point so the result matches a full searchsorted
    lo = bidx[bk]
    hi = bidx[bk + 1] + 2
    if hi > n:
        hi = n
    while lo < hi:
        mid = (lo + hi) // 2
        if us[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    j = lo - 1
    if j < 0:
        j = 0
    if j > n - 2:
        j = n - 2
    h = us[j + 1] - us[j]
    th = (u - us[j]) / h
    t2 = th * th
    t3 = t2 * th
    return (xs[j] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + (h * slopes[j]) * (t3 - 2.0 * t2 + th)
            + xs[j + 1] * (-2.0 * t3 + 3.0 * t2)
            + (h * slopes[j + 1]) * (t3 - t2))


@njit(cache=True, parallel=True)
def qbeta_eval(u, gamma, b, beta_fn, xs, us, slopes, bidx, cl, cr):
    out = np.empty(u.shape[0])
    for i in prange(u.shape[0]):
        out[i] = _qbeta1(u[i], gamma, b, beta_fn, xs, us, slopes, bidx,
                         cl, cr)
    return out


@njit(cache=True)
def _direction1(st, c, dmode, atoms, cumw, v):
    """Fill v with one direction draw; returns the updated counter."""
    d = atoms.shape[1]
    if dmode == 0:
        u = _u_at(st, c + ONE)
        c = c + ONE
        na = cumw.shape[0]
        lo = 0
        hi = na
        while lo < hi:
            mid = (lo + hi) // 2
            if cumw[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        ai = lo
        if ai > na - 1:
            ai = na - 1
        for cc in range(d):
            v[cc] = atoms[ai, cc]
        return c
    npairs = (d + 1) // 2
    for p in range(npairs):
        ua = _u_at(st, c + ONE)
        ub = _u_at(st, c + TWO)
        c = c + TWO
        r = math.sqrt(-2.0 * math.log(ua))
        ang = 2.0 * math.pi * ub
        g0 = r * math.cos(ang)
        g1 = r * math.sin(ang)
        if 2 * p < d:
            v[2 * p] = g0
        if 2 * p + 1 < d:
            v[2 * p + 1] = g1
    nrm = 0.0
    for cc in range(d):
        nrm += v[cc] * v[cc]
    nrm = math.sqrt(nrm)
    if nrm == 0.0:
        for cc in range(d):
            v[cc] = 0.0
        v[0] = 1.0
    else:
        for cc in range(d):
            v[cc] = v[cc] / nrm
    return c


@njit(cache=True, parallel=True)
def walk_positions(model, alpha, nscale, gamma, b, beta_fn, xs, us, slopes,
                   bidx, cl, cr, dmode, atoms, cumw, jump_first, times,
                   states):
    N = states.shape[0]
    M = times.shape[0]
    d = atoms.shape[1]
    out = np.empty((N, M, d))
    for i in prange(N):
        st = states[i]
        c = ZERO
        S = 0.0
        ti = 0
        posw = np.zeros(d)
        v = np.empty(d)
        while ti < M:
            if model == 1:
                u1 = _u_at(st, c + ONE)
                beta = _qbeta1(u1, gamma, b, beta_fn, xs, us, slopes,
                               bidx, cl, cr)
                u2 = _u_at(st, c + TWO)
                c = c + TWO
                T = (nscale * u2) ** (-1.0 / beta)
            else:
                u1 = _u_at(st, c + ONE)
                c = c + ONE
                T = u1 ** (-1.0 / alpha)
            c = _direction1(st, c, dmode, atoms, cumw, v)
            Snew = S + T
            while ti < M and times[ti] < Snew:
                if jump_first:
                    # zero component: zero displacement even when the
                    # wait overflowed to inf (avoids inf*0 -> nan)
                    for cc in range(d):
                        if v[cc] != 0.0:
                            out[i, ti, cc] = posw[cc] + T * v[cc]
                        else:
                            out[i, ti, cc] = posw[cc]
                else:
                    for cc in range(d):
                        out[i, ti, cc] = posw[cc]
                ti += 1
            for cc in range(d):
                if v[cc] != 0.0:
                    posw[cc] += T * v[cc]
            S = Snew
    return out


@njit(cache=True, parallel=True)
def sample_jumps(model, alpha, gamma, b, beta_fn, xs, us, slopes, bidx, cl,
                 cr, eps, tilt_mode, tilt_grid, dmode, atoms, cumw, states,
                 lo, hi):
    J = states.shape[0]
    d = atoms.shape[1]
    epochs = np.empty(J)
    mags = np.empty(J)
    dirs = np.empty((J, d))
    fail = np.zeros(J, dtype=np.bool_)
    lneps = math.log(eps)
    shift = 1.0 if eps < 1.0 else 0.0
    ng = tilt_grid.shape[0]
    for j in prange(J):
        st = states[j]
        c = ZERO
        u = _u_at(st, c + ONE)
        c = c + ONE
        epochs[j] = lo[j] + (hi[j] - lo[j]) * u
        if model == 0:
            u = _u_at(st, c + ONE)
            c = c + ONE
            mags[j] = eps * u ** (-1.0 / alpha)
        else:
            beta = 0.5
            if tilt_mode == 1:
                u = _u_at(st, c + ONE)
                c = c + ONE
                pos = u * (ng - 1)
                jj = int(pos)
                if jj > ng - 2:
                    jj = ng - 2
                frac = pos - jj
                beta = tilt_grid[jj] + (tilt_grid[jj + 1]
                                        - tilt_grid[jj]) * frac
            else:
                trials = 0
                while True:
                    trials += 1
                    if trials > MAX_TILT_TRIALS:
                        fail[j] = True
                        beta = 0.5
                        break
                    u1 = _u_at(st, c + ONE)
                    u2 = _u_at(st, c + TWO)
                    c = c + TWO
                    cand = _qbeta1(u1, gamma, b, beta_fn, xs, us, slopes,
                                   bidx, cl, cr)
                    if math.log(u2) < (shift - cand) * lneps:
                        beta = cand
                        break
            u = _u_at(st, c + ONE)
            c = c + ONE
            mags[j] = eps * u ** (-1.0 / beta)
        c = _direction1(st, c, dmode, atoms, cumw, dirs[j])
    return epochs, mags, dirs, fail


@njit(cache=True, parallel=True)
def limit_positions(starts, epochs, mags, dirs, drift_s, drift_l, times,
                    jump_first):
    N = starts.shape[0] - 1
    M = times.shape[0]
    d = dirs.shape[1]
    out = np.empty((N, M, d))
    bad = np.zeros(N, dtype=np.bool_)
    for i in prange(N):
        j0 = starts[i]
        j1 = starts[i + 1]
        cs = 0.0
        cl = np.zeros(d)
        jp = j0
        for mi in range(M):
            t = times[mi]
            while jp < j1 and drift_s * epochs[jp] + cs + mags[jp] <= t:
                cs += mags[jp]
                for cc in range(d):
                    cl[cc] += mags[jp] * dirs[jp, cc]
                jp += 1
            if jp < j1 and drift_s * epochs[jp] + cs <= t:
                tau = epochs[jp]
                for cc in range(d):
                    x = tau * drift_l[cc] + cl[cc]
                    # zero direction component: zero displacement even
                    # for an inf magnitude (avoids inf*0 -> nan)
                    if jump_first and dirs[jp, cc] != 0.0:
                        x += mags[jp] * dirs[jp, cc]
                    out[i, mi, cc] = x
            elif drift_s > 0.0:
                tau_c = (t - cs) / drift_s
                for cc in range(d):
                    out[i, mi, cc] = tau_c * drift_l[cc] + cl[cc]
            else:
                for cc in range(d):
                    out[i, mi, cc] = np.nan
                bad[i] = True
    return out, bad


@njit(cache=True, parallel=True)
def limit_ecf_blocks(starts, epochs, mags, dirs, drift_s, drift_l, times,
                     kvecs, block):
    N = starts.shape[0] - 1
    M = times.shape[0]
    nk = kvecs.shape[0]
    d = dirs.shape[1]
    nb = (N + block - 1) // block
    pw = np.zeros((nb, M, nk), dtype=np.complex128)
    pj = np.zeros((nb, M, nk), dtype=np.complex128)
    for blk in prange(nb):
        i0 = blk * block
        i1 = min(N, i0 + block)
        cl = np.zeros(d)
        xw = np.empty(d)
        for i in range(i0, i1):
            j0 = starts[i]
            j1 = starts[i + 1]
            cs = 0.0
            for cc in range(d):
                cl[cc] = 0.0
            jp = j0
            for mi in range(M):
                t = times[mi]
                while jp < j1 and drift_s * epochs[jp] + cs + mags[jp] <= t:
                    cs += mags[jp]
                    for cc in range(d):
                        cl[cc] += mags[jp] * dirs[jp, cc]
                    jp += 1
                straddle = jp < j1 and drift_s * epochs[jp] + cs <= t
                if straddle:
                    tau = epochs[jp]
                    for cc in range(d):
                        xw[cc] = tau * drift_l[cc] + cl[cc]
                elif drift_s > 0.0:
                    tau_c = (t - cs) / drift_s
                    for cc in range(d):
                        xw[cc] = tau_c * drift_l[cc] + cl[cc]
                else:
                    for cc in range(d):
                        xw[cc] = np.nan
                for kk in range(nk):
                    phw = 0.0
                    phj = 0.0
                    ok = True
                    for cc in range(d):
                        phw += xw[cc] * kvecs[kk, cc]
                    if straddle:
                        for cc in range(d):
                            xj = xw[cc]
                            if dirs[jp, cc] != 0.0:
                                xj += mags[jp] * dirs[jp, cc]
                            if np.isfinite(xj) and abs(xj) < PHASE_LIM:
                                phj += xj * kvecs[kk, cc]
                            elif kvecs[kk, cc] != 0.0:
                                # huge or overflowed coordinate against
                                # a live k component: unresolvable
                                # phase, contributes zero (see the
                                # numpy twin's docstring)
                                ok = False
                    else:
                        phj = phw
                    pw[blk, mi, kk] += complex(math.cos(phw),
                                               math.sin(phw))
                    if ok:
                        pj[blk, mi, kk] += complex(math.cos(phj),
                                                   math.sin(phj))
    return pw, pj


@njit(cache=True, parallel=True)
def coupled_terminal(starts, mags, dirs, drift_s, drift_l, tau):
    N = starts.shape[0] - 1
    d = dirs.shape[1]
    L = np.empty((N, d))
    S = np.empty(N)
    for i in prange(N):
        j0 = starts[i]
        j1 = starts[i + 1]
        s = 0.0
        acc = np.zeros(d)
        for j in range(j0, j1):
            s += mags[j]
            for cc in range(d):
                acc[cc] += mags[j] * dirs[j, cc]
        S[i] = drift_s * tau + s
        for cc in range(d):
            L[i, cc] = drift_l[cc] * tau + acc[cc]
    return L, S
