"""Waiting-time, mixing-exponent, and direction sampling.

Three distribution families drive every simulation in this package:

* heavy-tailed waiting times with survival t**(-alpha) on t >= 1,
  sampled by exact inversion T = U**(-1/alpha);
* scale-conditioned waiting times whose survival is 1 below n**(-1/beta)
  and t**(-beta)/n above it, sampled by T = (n*U)**(-1/beta);
* a mixing density for the local tail exponent, the Beta(gamma, b)
  family p(beta) ~ beta**(gamma-1) * (1-beta)**(b-1) on (0, 1).

The mixing density is sampled by inverse CDF through a precomputed
Hermite quantile table with series-solved tails, so one uniform yields
one draw.  Fixed draw counts per event keep the vectorized numpy
backend and the compiled backend consuming identical stream positions.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from .rng import RngStream

WAIT_FIRST = "wait-first"
JUMP_FIRST = "jump-first"

# quantile table layout; the kernels hard-code the same Newton/series
# iteration counts so both backends trace identical arithmetic
QTAB_CELLS = 16384
QTAB_XLO = 0.002
QTAB_XHI = 0.998
QTAB_SERIES_TERMS = 24
QTAB_NEWTON_ITERS = 8
QTAB_BUCKETS = 4096


@dataclass(frozen=True)
class HeavyTailLaw:
    """Waiting-time law with survival P(T > t) = t**(-alpha) for t >= 1."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly inside (0, 1)")

    def survival(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t < 1.0, 1.0, t ** -self.alpha)

    def cdf(self, t):
        return 1.0 - self.survival(t)


def pareto_from_uniform(u, alpha: float):
    """Inversion map of the heavy-tailed law: u in (0,1) -> U**(-1/alpha)."""
    return np.asarray(u, dtype=np.float64) ** (-1.0 / alpha)


def conditional_from_uniform(u, n, beta):
    """Inversion map of the scale-conditioned law: (n*U)**(-1/beta)."""
    return (n * np.asarray(u, dtype=np.float64)) ** (-1.0 / beta)


def conditional_survival(t, n, beta):
    """P(T > t) for the scale-conditioned law: min(1, t**(-beta)/n)."""
    t = np.asarray(t, dtype=np.float64)
    lower = float(n) ** (-1.0 / beta)
    return np.where(t < lower, 1.0, (t ** -beta) / n)


def sample_pareto_waiting(law: HeavyTailLaw, rng: RngStream, size=None):
    """Waiting-time draws; pure in (law, rng), repeatable call by call."""
    n = 1 if size is None else int(size)
    out = pareto_from_uniform(rng.uniforms(n), law.alpha)
    return float(out[0]) if size is None else out


def sample_conditional_waiting(n, beta, rng: RngStream, size=None):
    """Scale-conditioned waiting-time draws for conditioning scale n."""
    if n < 1:
        raise ValueError("conditioning scale n must be >= 1")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly inside (0, 1)")
    m = 1 if size is None else int(size)
    out = conditional_from_uniform(rng.uniforms(m), float(n), beta)
    return float(out[0]) if size is None else out


@dataclass(frozen=True)
class QuantileTable:
    """Inverse-CDF table for a Beta(gamma, b) mixing density.

    xs/us/slopes define a cubic Hermite interpolant of the quantile
    function on [u_lo, u_hi] (slopes are dx/du = 1/pdf); bidx is a
    uniform bucket index accelerating the cell search.  cl/cr hold the
    series coefficients used to solve the left and right tails exactly.
    """

    gamma: float
    b: float
    beta_fn: float
    xs: np.ndarray
    us: np.ndarray
    slopes: np.ndarray
    bidx: np.ndarray
    cl: np.ndarray
    cr: np.ndarray

    @property
    def u_lo(self) -> float:
        return float(self.us[0])

    @property
    def u_hi(self) -> float:
        return float(self.us[-1])

    def as_args(self):
        """Flat argument tuple in the order the kernels expect."""
        return (self.gamma, self.b, self.beta_fn, self.xs, self.us,
                self.slopes, self.bidx, self.cl, self.cr)


# placeholder table args for kernel calls that never touch the mixing
# branch (model flag 0); dtypes must match a real table
DUMMY_TABLE_ARGS = (0.0, 0.0, 0.0, np.zeros(2), np.array([0.0, 1.0]),
                    np.zeros(2), np.zeros(2, dtype=np.int64), np.zeros(24),
                    np.zeros(24))


def _tail_series_coeffs(a: float, c: float) -> np.ndarray:
    """Coefficients of B*I_x(a, c) = x**a * sum_k coeff[k] * x**k near 0."""
    k = np.arange(QTAB_SERIES_TERMS, dtype=np.float64)
    return sp.binom(c - 1.0, k) * ((-1.0) ** k) / (a + k)


def build_quantile_table(gamma: float, b: float) -> QuantileTable:
    """Build the sampling table for Beta(gamma, b); requires b > 1."""
    beta_fn = math.exp(sp.betaln(gamma, b))
    xs = np.linspace(QTAB_XLO, QTAB_XHI, QTAB_CELLS + 1)
    us = sp.betainc(gamma, b, xs)
    if not np.all(np.diff(us) > 0):
        raise ValueError("quantile table grid degenerated; check gamma, b")
    # dx/du = 1 / pdf(x), computed in log space to survive spiky densities
    slopes = np.exp(math.log(beta_fn)
                    - (gamma - 1.0) * np.log(xs)
                    - (b - 1.0) * np.log1p(-xs))
    bidx = np.searchsorted(us, np.linspace(0.0, 1.0, QTAB_BUCKETS + 1),
                           side="right") - 1
    bidx = np.clip(bidx, 0, QTAB_CELLS - 1).astype(np.int64)
    cl = _tail_series_coeffs(gamma, b)
    cr = _tail_series_coeffs(b, gamma)
    return QuantileTable(gamma, b, beta_fn, xs, us, slopes, bidx, cl, cr)


@dataclass(frozen=True)
class MixingDensity:
    """Beta(gamma, b) mixing density for the local tail exponent.

    p(beta) = beta**(gamma-1) * (1-beta)**(b-1) / B(gamma, b) on (0, 1).
    gamma controls the regular variation at 0 (exponent gamma - 1); the
    edge behaviour at 1 must satisfy the integrability condition
    int_0^1 p(beta) / (1 - beta) dbeta < oo, i.e. b > 1, before the
    density may be used for sampling or transform evaluation.
    """

    gamma: float
    b: float = 2.0
    _table: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.b > 0.0:
            raise ValueError("b must be positive")

    def pdf(self, beta):
        beta = np.asarray(beta, dtype=np.float64)
        lognum = (self.gamma - 1.0) * np.log(beta) + (self.b - 1.0) * np.log1p(-beta)
        return np.exp(lognum - sp.betaln(self.gamma, self.b))

    def cdf(self, beta):
        return sp.betainc(self.gamma, self.b, np.asarray(beta, dtype=np.float64))

    def mean(self) -> float:
        return self.gamma / (self.gamma + self.b)

    def var(self) -> float:
        g, b = self.gamma, self.b
        return g * b / ((g + b) ** 2 * (g + b + 1.0))

    def quantile_table(self) -> QuantileTable:
        """Cached sampling table; only valid densities (b > 1) have one."""
        if not self._table:
            report = validate_mixing_density(self)
            if not report.valid:
                raise ValueError("; ".join(report.messages))
            self._table.append(build_quantile_table(self.gamma, self.b))
        return self._table[0]


@dataclass(frozen=True)
class MixingDensityReport:
    valid: bool
    edge_integrable: bool
    regular_variation_ok: bool
    rv_exponent: float
    messages: tuple

    def __bool__(self):
        return self.valid


def validate_mixing_density(p: MixingDensity) -> MixingDensityReport:
    """Check the admissibility conditions of a mixing density.

    Rejects b <= 1: the governing transforms need
    int_0^1 p(beta) / (1 - beta) dbeta < oo, which for the Beta family
    holds exactly when b > 1.  Also confirms regular variation at 0 by
    a numerical ratio check p(l*t)/p(t) ~ l**(gamma-1).
    """
    messages = []
    edge = p.b > 1.0
    if not edge:
        messages.append(
            "edge integrability condition violated: "
            "int_0^1 p(beta)/(1-beta) dbeta must be finite, "
            f"which requires b > 1 (got b={p.b:g})")
    rv_ok = True
    for t in (1e-3, 1e-5):
        for lam in (0.5, 2.0):
            # log-space ratio survives pdf underflow for spiky densities
            logratio = ((p.gamma - 1.0) * math.log(lam)
                        + (p.b - 1.0) * (math.log1p(-lam * t) - math.log1p(-t)))
            ratio = math.exp(logratio)
            target = lam ** (p.gamma - 1.0)
            if abs(ratio / target - 1.0) > 0.01:
                rv_ok = False
                messages.append(
                    f"regular variation check failed at t={t:g}, lam={lam:g}: "
                    f"ratio {ratio:.6g} vs target {target:.6g}")
    return MixingDensityReport(
        valid=edge and rv_ok,
        edge_integrable=edge,
        regular_variation_ok=rv_ok,
        rv_exponent=p.gamma - 1.0,
        messages=tuple(messages),
    )


def qbeta(u, table: QuantileTable):
    """Quantile function evaluated through the active kernel backend."""
    from . import _kernels
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    return _kernels.get().qbeta_eval(u, *table.as_args())


def sample_mixing_exponent(p: MixingDensity, rng: RngStream, size=None):
    """Mixing-exponent draws by single-uniform inverse CDF."""
    n = 1 if size is None else int(size)
    out = qbeta(rng.uniforms(n), p.quantile_table())
    return float(out[0]) if size is None else out


# 26-point degree-7 spherical rule (octahedron vertices, edge midpoints,
# cube corners) with weights 40/840, 32/840, 27/840
def _sphere26():
    pts = []
    wts = []
    for i in range(3):
        for s in (1.0, -1.0):
            v = np.zeros(3)
            v[i] = s
            pts.append(v)
            wts.append(40.0 / 840.0)
    for i in range(3):
        for j in range(i + 1, 3):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    v = np.zeros(3)
                    v[i] = si / math.sqrt(2.0)
                    v[j] = sj / math.sqrt(2.0)
                    pts.append(v)
                    wts.append(32.0 / 840.0)
    for si in (1.0, -1.0):
        for sj in (1.0, -1.0):
            for sk in (1.0, -1.0):
                pts.append(np.array([si, sj, sk]) / math.sqrt(3.0))
                wts.append(27.0 / 840.0)
    return np.array(pts), np.array(wts)


@dataclass(frozen=True)
class DirectionMeasure:
    """Probability measure on unit directions.

    kind == "discrete": finite atoms with positive weights summing to 1.
    kind == "uniform": the uniform surface measure on the unit sphere,
    dim >= 2 (dim == 1 is canonicalized to atoms at +1 and -1).
    """

    kind: str
    dim: int
    atoms: np.ndarray = None
    weights: np.ndarray = None
    quad_nodes: int = 64

    def __post_init__(self):
        if self.kind not in ("discrete", "uniform"):
            raise ValueError("kind must be 'discrete' or 'uniform'")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.kind == "discrete":
            a = np.asarray(self.atoms, dtype=np.float64)
            w = np.asarray(self.weights, dtype=np.float64)
            if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] != self.dim:
                raise ValueError("atoms must have shape (m, dim)")
            norms = np.sqrt((a * a).sum(axis=1))
            if np.any(np.abs(norms - 1.0) > 1e-12):
                raise ValueError("atoms must be unit vectors (|norm - 1| <= 1e-12)")
            if w.shape != (a.shape[0],) or np.any(w <= 0):
                raise ValueError("weights must be positive, one per atom")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 within 1e-12")
            object.__setattr__(self, "atoms", a)
            object.__setattr__(self, "weights", w)

    @classmethod
    def discrete(cls, atoms, weights=None) -> "DirectionMeasure":
        a = np.atleast_2d(np.asarray(atoms, dtype=np.float64))
        if weights is None:
            weights = np.full(a.shape[0], 1.0 / a.shape[0])
        return cls(kind="discrete", dim=a.shape[1], atoms=a,
                   weights=np.asarray(weights, dtype=np.float64))

    @classmethod
    def point(cls, direction) -> "DirectionMeasure":
        a = np.asarray(direction, dtype=np.float64).reshape(1, -1)
        return cls.discrete(a, [1.0])

    @classmethod
    def symmetric_pair(cls) -> "DirectionMeasure":
        return cls.discrete([[1.0], [-1.0]], [0.5, 0.5])

    @classmethod
    def uniform(cls, dim: int, quad_nodes: int = 64) -> "DirectionMeasure":
        if dim == 1:
            return cls.symmetric_pair()
        return cls(kind="uniform", dim=dim, quad_nodes=quad_nodes)

    def mean_direction(self) -> np.ndarray:
        if self.kind == "uniform":
            return np.zeros(self.dim)
        return self.weights @ self.atoms

    def quadrature(self):
        """Deterministic node/weight pairs integrating this measure.

        Discrete measures return their atoms.  The uniform circle uses
        an offset equi-angle rule (quad_nodes points, spectrally exact
        for smooth integrands); the uniform 2-sphere uses a fixed
        26-point degree-7 rule.  Higher dimensions have no rule here.
        """
        if self.kind == "discrete":
            return self.atoms, self.weights
        if self.dim == 2:
            n = self.quad_nodes
            theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
            pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            return pts, np.full(n, 1.0 / n)
        if self.dim == 3:
            return _sphere26()
        raise ValueError(
            "no deterministic quadrature rule configured for the uniform "
            f"measure in dimension {self.dim}; use discrete atoms")

    def sampler_args(self):
        """(mode, atoms, cumweights) consumed by the kernels."""
        if self.kind == "discrete":
            cumw = np.cumsum(self.weights)
            cumw[-1] = 1.0
            return 0, self.atoms, cumw
        return 1, np.zeros((1, self.dim)), np.ones(1)


def sample_direction(lam: DirectionMeasure, rng: RngStream, size=None):
    """Direction draws.

    Discrete measures consume one uniform per draw (cumulative-weight
    search); the uniform sphere consumes 2*ceil(dim/2) uniforms per draw
    (Box-Muller pairs, then normalization).  Draw counts are fixed per
    event so stream positions are backend independent.
    """
    n = 1 if size is None else int(size)
    mode, atoms, cumw = lam.sampler_args()
    d = lam.dim
    if mode == 0:
        u = rng.uniforms(n)
        idx = np.searchsorted(cumw, u, side="right")
        idx = np.minimum(idx, atoms.shape[0] - 1)
        out = atoms[idx]
    else:
        npairs = (d + 1) // 2
        u = rng.uniforms(2 * npairs * n).reshape(n, 2 * npairs)
        g = np.empty((n, 2 * npairs))
        for p in range(npairs):
            r = np.sqrt(-2.0 * np.log(u[:, 2 * p]))
            ang = 2.0 * np.pi * u[:, 2 * p + 1]
            g[:, 2 * p] = r * np.cos(ang)
            g[:, 2 * p + 1] = r * np.sin(ang)
        g = g[:, :d]
        nrm = np.sqrt((g * g).sum(axis=1))
        bad = nrm == 0.0
        if bad.any():
            # same convention as the kernels: degenerate draws map to e1
            g[bad] = 0.0
            g[bad, 0] = 1.0
            nrm[bad] = 1.0
        out = g / nrm[:, None]
    return out[0] if size is None else out
