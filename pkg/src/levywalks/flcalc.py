"""Fourier-Laplace calculus for the coupled limit pair.

Transform-side counterparts of the simulation layer: the joint symbol
of the position/clock pair, the action of the material derivative it
generates, and closed transform-space forms for the densities of the
two scenarios.  Everything here is deterministic; Monte Carlo lives in
:mod:`levywalks.limits` and the comparison glue in
:mod:`levywalks.verify`.

Conventions.  Fourier in space with kernel exp(i<k,x>), Laplace in
time with kernel exp(-s t), so the symbol evaluates at z = s - i<k,u>
per direction atom u.  All grid functions return complex arrays of
shape (nk, ns) indexed by the flattened k-grid and the s-grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .limits import DistributedJumpMeasure, StableJumpMeasure
from .sampling import DirectionMeasure

__all__ = [
    "TransformModel",
    "TransformPoint",
    "fl_exponent",
    "apply_material_derivative_fl",
    "theoretical_p1_fl",
    "theoretical_p2_fl",
    "truncated_fl_exponent",
    "fl_truncation_bias",
    "symbol_table",
]


def _as_sgrid(s):
    s = np.atleast_1d(np.asarray(s))
    if s.ndim != 1 or s.size == 0:
        raise ValueError("Laplace abscissa grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(s)):
        raise ValueError("Laplace abscissa grid must be finite")
    if np.any(np.real(s) <= 0.0):
        raise ValueError(
            "Laplace abscissa must have positive real part; the symbol is "
            "only defined on the right half-plane")
    return s.astype(complex)


def _as_kgrid(k, dim):
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k.reshape(1, 1)
    elif k.ndim == 1:
        # ambiguous: a list of scalars in dim 1, or one vector in dim d
        k = k[:, None] if dim == 1 else k[None, :]
    if k.ndim != 2 or k.shape[1] != dim:
        raise ValueError(
            f"wave-vector grid must have shape (nk, {dim}); got {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ValueError("wave-vector grid must be finite")
    return k


def _atoms(directions):
    nodes, weights = directions.quadrature()
    return np.atleast_2d(np.asarray(nodes, dtype=float)), np.asarray(
        weights, dtype=float)


def _zgrid(kgrid, sgrid, nodes):
    # z[i, j, m] = s_j - i <k_i, u_m>
    a = kgrid @ nodes.T
    return sgrid[None, :, None] - 1j * a[:, None, :], a


@dataclass(frozen=True)
class TransformPoint:
    """One (k, s) evaluation point of the joint symbol."""

    k: tuple
    s: float

    def __post_init__(self):
        k = tuple(float(c) for c in np.atleast_1d(self.k))
        object.__setattr__(self, "k", k)
        if not all(np.isfinite(c) for c in k):
            raise ValueError("wave vector must be finite")
        if not (np.isfinite(self.s) and float(np.real(self.s)) > 0.0):
            raise ValueError("Laplace abscissa must have positive real part")

    @property
    def dim(self):
        return len(self.k)


@dataclass(frozen=True)
class TransformModel:
    """Jump measure plus direction measure, fixed for a grid of points."""

    measure: object
    directions: DirectionMeasure

    def __post_init__(self):
        if not isinstance(self.measure,
                          (StableJumpMeasure, DistributedJumpMeasure)):
            raise TypeError(
                "measure must be a stable or distributed jump measure")
        if not isinstance(self.directions, DirectionMeasure):
            raise TypeError("directions must be a DirectionMeasure")
        self.directions.quadrature()  # fail fast if no rule exists

    @property
    def dim(self):
        return self.directions.dim

    def exponent(self, k, s):
        return fl_exponent(self.measure, self.directions, k, s)

    def p1(self, k, s):
        return theoretical_p1_fl(self.measure, self.directions, k, s)

    def p2(self, k, s):
        return theoretical_p2_fl(self.measure, self.directions, k, s)


def fl_exponent(measure, directions, k, s):
    """Joint symbol psi(k, s) of the coupled pair, shape (nk, ns).

    Weighted sum over direction atoms u of the jump measure's Laplace
    exponent at z = s - i<k,u>.  Stable measures give sum w (z)**alpha;
    distributed measures fold in the exponent mixture with the
    Gamma(1-beta) factor paired against the density's edge weight so
    the quadrature integrand stays bounded.
    """
    sgrid = _as_sgrid(s)
    nodes, weights = _atoms(directions)
    kgrid = _as_kgrid(k, nodes.shape[1])
    z, _ = _zgrid(kgrid, sgrid, nodes)
    g = measure.laplace_exponent(z.ravel()).reshape(z.shape)
    return np.einsum("ijm,m->ij", g, weights)


def apply_material_derivative_fl(measure, directions, k, s, phat):
    """Transform-space action of the material derivative on phat.

    The operator acts as multiplication by the joint symbol, so this
    returns psi(k, s) * phat broadcast over the (nk, ns) grid.
    """
    psi = fl_exponent(measure, directions, k, s)
    phat = np.asarray(phat)
    if phat.shape not in ((), psi.shape):
        raise ValueError(
            f"phat must be scalar or have grid shape {psi.shape}; "
            f"got {phat.shape}")
    return psi * phat


def theoretical_p1_fl(measure, directions, k, s):
    """Transform of the wait-first scenario density, shape (nk, ns).

    Stable: s**(alpha-1) / psi(k, s).  Distributed: the numerator is
    the exponent mixture evaluated at z = s divided by s, and it is
    computed in the same vectorised quadrature call as the denominator
    so that k = 0 collapses to 1/s exactly to rounding.
    """
    sgrid = _as_sgrid(s)
    nodes, weights = _atoms(directions)
    kgrid = _as_kgrid(k, nodes.shape[1])
    z, _ = _zgrid(kgrid, sgrid, nodes)
    ns = sgrid.size
    if isinstance(measure, StableJumpMeasure):
        psi = np.einsum("ijm,m->ij",
                        measure.laplace_exponent(z.ravel()).reshape(z.shape),
                        weights)
        return sgrid[None, :] ** (measure.alpha - 1.0) / psi
    # one call evaluates numerator and denominator on a shared node
    # set, which is what makes the k = 0 normalisation exact
    allz = np.concatenate([sgrid, z.ravel()])
    g = measure.laplace_exponent(allz)
    num = g[:ns] / sgrid
    psi = np.einsum("ijm,m->ij", g[ns:].reshape(z.shape), weights)
    return num[None, :] / psi


def theoretical_p2_fl(measure, directions, k, s, atol=1e-12):
    """Transform of the printed jump-first source over the symbol.

    Per direction atom u with a = <k,u>, the transform of the printed
    source term reduces to

        stable:       alpha * ((-i a)**(alpha-1) - (s - i a)**(alpha-1)) / s
        distributed:  int Gamma(1-beta) ((-i a)**(beta-1)
                                         - (s - i a)**(beta-1)) p(beta) dbeta / s

    (principal branch on the imaginary axis), weighted by the atom mass
    and divided by psi(k, s).  Any atom with <k,u> = 0 makes the
    boundary power diverge, k = 0 included, and raises ValueError:
    there is no finite printed transform at those points, so callers
    must compare against Monte Carlo there instead.
    """
    sgrid = _as_sgrid(s)
    nodes, weights = _atoms(directions)
    kgrid = _as_kgrid(k, nodes.shape[1])
    z, a = _zgrid(kgrid, sgrid, nodes)
    scale = 1.0 + np.linalg.norm(kgrid, axis=1, keepdims=True)
    if np.any(np.abs(a) <= atol * scale):
        raise ValueError(
            "singular transform configuration: some direction atom is "
            "orthogonal to k (k = 0 included), where the printed "
            "jump-first source has no finite transform")
    minus_ia = -1j * a[:, None, :]  # boundary argument, principal branch
    if isinstance(measure, StableJumpMeasure):
        al = measure.alpha
        diff = minus_ia ** (al - 1.0) - z ** (al - 1.0)
        src = al * np.einsum("ijm,m->ij", diff, weights) / sgrid[None, :]
    else:
        from ._quad import mixing_integral

        l1 = np.broadcast_to(np.log(minus_ia), z.shape).ravel()
        l2 = np.log(z).ravel()

        def g(x, omx):
            # beta - 1 = -omx; Gamma(1-beta) pairs with the edge weight
            from scipy.special import gamma as _gamma

            gam = _gamma(1.0 + omx)
            return gam[None, :] * (np.exp(-np.multiply.outer(l1, omx))
                                   - np.exp(-np.multiply.outer(l2, omx)))

        val, _ = mixing_integral(measure.mixing, g, edge_shift=1,
                                 rtol=measure.rtol)
        src = np.einsum("ijm,m->ij", val.reshape(z.shape),
                        weights) / sgrid[None, :]
    psi = fl_exponent(measure, directions, kgrid, sgrid)
    return src / psi


def truncated_fl_exponent(measure, directions, k, s, eps):
    """Joint symbol of the eps-truncated, drift-compensated pair.

    Adds the compensated small-jump remainder at each atom argument, so
    exp(-tau * value) is the exact characteristic/Laplace functional of
    the simulated pair at truncation level eps.
    """
    sgrid = _as_sgrid(s)
    nodes, weights = _atoms(directions)
    kgrid = _as_kgrid(k, nodes.shape[1])
    z, _ = _zgrid(kgrid, sgrid, nodes)
    g = measure.laplace_exponent(z.ravel())
    r = measure.compensated_remainder(z.ravel(), eps)
    return np.einsum("ijm,m->ij", (g + r).reshape(z.shape), weights)


def fl_truncation_bias(measure, directions, k, s, eps, tau=1.0):
    """|E exp(i<k,L(tau)> - s S(tau)) - same at truncation eps|.

    Deterministic part of the Monte Carlo error of the coupled
    functional at truncation level eps, on the transform side.
    """
    psi = fl_exponent(measure, directions, k, s)
    phi = truncated_fl_exponent(measure, directions, k, s, eps)
    return np.abs(np.exp(-tau * psi) - np.exp(-tau * phi))


def symbol_table(measure, directions, k, s):
    """Grid evaluation of psi, p1 and p2 for tabular export.

    Returns a dict of parallel arrays over the flattened (k, s) grid:
    the k components, s, and real/imaginary parts of the symbol and
    both scenario transforms.  Points where p2 has no finite printed
    transform (some atom orthogonal to k) carry NaN in the p2 columns.
    """
    sgrid = _as_sgrid(s)
    nodes, _ = _atoms(directions)
    kgrid = _as_kgrid(k, nodes.shape[1])
    psi = fl_exponent(measure, directions, kgrid, sgrid)
    p1 = theoretical_p1_fl(measure, directions, kgrid, sgrid)
    p2 = np.full(psi.shape, np.nan + 0j)
    for i in range(kgrid.shape[0]):
        try:
            p2[i] = theoretical_p2_fl(measure, directions, kgrid[i], sgrid)[0]
        except ValueError:
            pass  # singular row stays NaN
    nk, ns = psi.shape
    krep = np.repeat(kgrid, ns, axis=0)
    srep = np.tile(np.real(sgrid), nk)
    return {
        "k": krep,
        "s": srep,
        "psi": psi.ravel(),
        "p1": p1.ravel(),
        "p2": p2.ravel(),
    }
