"""Estimators used to compare simulation output with theory.

Everything operates on plain arrays: an ensemble of positions is an
(N, d) array at one probe time or (N, M, d) over a probe grid.  The
Monte Carlo side of every verification suite flows through here, so
the estimators carry their own standard errors where the comparison
budget needs them.
"""

from __future__ import annotations

import math as _math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Ensemble",
    "empirical_cf",
    "numerical_laplace",
    "msd",
    "hill_tail_index",
    "ecf_distance",
]


@dataclass(frozen=True)
class Ensemble:
    """Positions of independent paths at one probe time."""

    samples: np.ndarray
    t: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] == 0:
            raise ValueError("samples must be a nonempty (N, d) array")
        object.__setattr__(self, "samples", s)
        if not (np.isfinite(self.t) and self.t >= 0.0):
            raise ValueError("probe time must be finite and nonnegative")

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]


def _as_samples(samples):
    if isinstance(samples, Ensemble):
        return samples.samples
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("samples must be a nonempty (N, d) array")
    return x


def _as_kgrid(k, dim):
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k.reshape(1, 1)
    elif k.ndim == 1:
        k = k[:, None] if dim == 1 else k[None, :]
    if k.ndim != 2 or k.shape[1] != dim:
        raise ValueError(
            f"wave-vector grid must have shape (nk, {dim}); got {k.shape}")
    return k


# 2**53: the float grid spacing reaches 2.0 here, so a phase modulo
# 2*pi is pure rounding noise from this magnitude on (the ECF kernels
# hard-code the same constant)
PHASE_LIM = 9007199254740992.0


def empirical_cf(samples, k):
    """Empirical characteristic function over a wave-vector grid.

    Returns (values, stderr), both shaped (nk,).  The standard error
    is the large-N bound sqrt((1 - |ecf|**2) / N) on the modulus of
    the complex estimation error.

    A jump-first walk with a very small mixing exponent can overflow
    the float range mid-excursion, and beyond PHASE_LIM a coordinate
    cannot resolve a phase at all.  Such samples count toward N but
    contribute 0 against any k with a nonzero component along the
    unresolvable coordinate: the true CF mass that far out is
    negligible at any fixed k (the density out there is flat on the
    phase-period scale).  Components with k_c = 0 contribute exactly 0
    whatever the coordinate, so k = 0 always averages to exactly 1.
    """
    x = _as_samples(samples)
    kgrid = _as_kgrid(k, x.shape[1])
    n = x.shape[0]
    ok = np.isfinite(x) & (np.abs(x) < PHASE_LIM)  # (N, d)
    if ok.all():
        total = np.exp(1j * (x @ kgrid.T)).sum(axis=0)
    else:
        phase = np.where(ok, x, 0.0) @ kgrid.T
        # a sample is valid for k unless an unresolvable coordinate
        # meets a nonzero k component
        hits = (~ok).astype(np.float64) @ (kgrid.T != 0.0).astype(
            np.float64)
        total = np.where(hits == 0.0, np.exp(1j * phase), 0.0).sum(axis=0)
    # divide componentwise: complex-by-scalar division rounds n/n away
    # from 1, which would break the exactness promise at k = 0
    vals = (total.real / n) + 1j * (total.imag / n)
    se = np.sqrt(np.maximum(1.0 - np.abs(vals) ** 2, 0.0) / n)
    return vals, se


# coefficients of sum_j (-u)^j / (j+2)!  and  sum_j (-u)^j (j+1)/(j+2)!
_PHI_A = [(-1.0) ** j / _math.factorial(j + 2) for j in range(10)]
_PHI_B = [(-1.0) ** j * (j + 1) / _math.factorial(j + 2) for j in range(10)]


def _cell_weights(u):
    """Exact integrals of the two linear hat halves against exp(-u x).

    phi_a(u) = int_0^1 (1-x) e^(-ux) dx = (u - 1 + e^(-u)) / u**2
    phi_b(u) = int_0^1    x  e^(-ux) dx = (1 - (1+u) e^(-u)) / u**2

    Series branch below |u| = 0.1: the closed forms cancel two leading
    orders, so their rounding error grows like eps/u**2 and the series
    (truncation below 3e-15 at the cutoff) takes over.
    """
    if abs(u) < 0.1:
        a = b = 0.0
        for ca, cb in zip(reversed(_PHI_A), reversed(_PHI_B)):
            a = a * u + ca
            b = b * u + cb
        return a, b
    eu = np.exp(-u)
    return (u - 1.0 + eu) / u ** 2, (1.0 - (1.0 + u) * eu) / u ** 2


def numerical_laplace(tgrid, fvals, s):
    """Laplace transform of tabulated f: trapezoid in f, exact kernel.

    On each cell f is replaced by its linear interpolant and the
    product with exp(-s t) is integrated in closed form, so the rule
    reduces to the classic trapezoid as s*h -> 0 and a constant f
    telescopes to exactly 1/s.  The tail beyond T = tgrid[-1] is
    approximated by f(T) * exp(-s T) / s (constant extrapolation of
    f), so choose s*T large enough that the frozen tail is negligible
    for the accuracy needed.

    tgrid must be a uniform grid starting at 0 with at least two
    points; fvals has shape (..., M) over that grid and may be
    complex; Re(s) > 0 is required.  Returns shape (..., ns) for s of
    shape (ns,), scalar s squeezing the last axis.
    """
    t = np.asarray(tgrid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid must be 1-d with at least two points")
    if t[0] != 0.0:
        raise ValueError("time grid must start at 0")
    h = t[1] - t[0]
    if h <= 0.0 or not np.allclose(np.diff(t), h, rtol=1e-9, atol=0.0):
        raise ValueError("time grid must be uniformly spaced")
    f = np.asarray(fvals)
    if f.shape[-1] != t.size:
        raise ValueError(
            f"fvals trailing axis ({f.shape[-1]}) must match the time "
            f"grid ({t.size})")
    scalar = np.ndim(s) == 0
    sgrid = np.atleast_1d(np.asarray(s))
    if np.any(~np.isfinite(sgrid)) or np.any(np.real(sgrid) <= 0.0):
        raise ValueError("Laplace abscissa must have positive real part")
    kern = np.exp(-np.multiply.outer(sgrid, t))  # (ns, M)
    out = None
    for j, sv in enumerate(sgrid):
        wa, wb = _cell_weights(sv * h)
        # sum over cells i of h*exp(-s t_i)*(wa*f_i + wb*f_{i+1})
        left = np.einsum("...m,m->...", f[..., :-1], kern[j, :-1])
        right = np.einsum("...m,m->...", f[..., 1:], kern[j, :-1])
        val = h * (wa * left + wb * right)
        val = val + f[..., -1] * kern[j, -1] / sv
        if out is None:
            out = np.empty(f.shape[:-1] + (sgrid.size,),
                           dtype=np.result_type(val, kern))
        out[..., j] = val
    return out[..., 0] if scalar else out


def msd(positions):
    """Mean squared displacement with its standard error.

    positions is an Ensemble, an (N, d) array for one probe time, or
    (N, M, d) over a probe grid; returns (msd, stderr) as scalars or
    (M,) arrays.  The value equals the trace of the empirical
    second-moment matrix by construction.
    """
    if isinstance(positions, Ensemble):
        positions = positions.samples
    x = np.asarray(positions, dtype=float)
    single = x.ndim == 2
    if single:
        x = x[:, None, :]
    if x.ndim != 3 or x.shape[0] < 2:
        raise ValueError("positions must be (N, M, d) with N >= 2")
    sq = np.einsum("nmd,nmd->nm", x, x)
    m = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / np.sqrt(x.shape[0])
    return (m[0], se[0]) if single else (m, se)


def hill_tail_index(samples, m):
    """Hill estimator of the tail index from the m largest samples.

    With order statistics X_(1) <= ... <= X_(N), returns

        1 / ((1/m) * sum_{i=1..m} log(X_(N-i+1) / X_(N-m)))

    which is consistent for the index of a regularly varying right
    tail.  Requires strictly positive samples, 0 < m < N, and a
    nonzero average log spacing (ties across the whole top block make
    the estimate infinite and raise instead).  Scale-invariant.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if not (0 < m < n):
        raise ValueError(f"order m must satisfy 0 < m < {n}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("tail estimation requires finite positive samples")
    xs = np.sort(x)
    top = np.log(xs[n - m:])
    pivot = np.log(xs[n - m - 1])
    g = np.mean(top) - pivot
    if g <= 0.0:
        raise ValueError(
            "degenerate top block: zero log spacing, tail index undefined")
    return 1.0 / g


def ecf_distance(samples_a, samples_b, k):
    """Largest ECF gap over a wave-vector grid between two ensembles."""
    xa = _as_samples(samples_a)
    xb = _as_samples(samples_b)
    if xa.shape[1] != xb.shape[1]:
        raise ValueError("ensembles must share a dimension")
    va, _ = empirical_cf(xa, k)
    vb, _ = empirical_cf(xb, k)
    return float(np.max(np.abs(va - vb)))
