"""Coupled walk trajectories: single paths and kernel-backed ensembles.

A walk alternates waiting periods and jumps whose length equals the
waiting time (unit speed), in one of two scenarios:

* wait-first: the walker rests for T, then jumps V*T instantly, so the
  observed position is the sum of completed jumps;
* jump-first: the jump happens at the start of each waiting period, so
  the observed position includes the jump of the period in progress.

Waiting times come either from the heavy-tailed stable law or from the
scale-conditioned mixture law.  Trajectory k of an ensemble consumes
stream (seed, first_path + k); the single-path simulator replays the
same stream scalar by scalar, so ``simulate_walk`` agrees with row k of
``walk_ensemble`` draw for draw.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .rng import RngStream, stream_states
from .sampling import (
    DUMMY_TABLE_ARGS,
    JUMP_FIRST,
    WAIT_FIRST,
    DirectionMeasure,
    HeavyTailLaw,
    MixingDensity,
    qbeta,
)


@dataclass(frozen=True)
class ConditionedMixtureLaw:
    """Waiting-time law of the distributed-exponent walk.

    Each event draws a local tail exponent beta from the mixing density,
    then a waiting time with survival min(1, t**(-beta)/n).  The
    conditioning scale n is the convergence parameter: n events of this
    law sum directly to the limiting subordinator at operational time 1.
    """

    mixing: MixingDensity
    nscale: float

    def __post_init__(self):
        if self.nscale < 1.0:
            raise ValueError("conditioning scale nscale must be >= 1")


def _law_args(law):
    """(model, alpha, nscale, table_args) for the kernel signature."""
    if isinstance(law, HeavyTailLaw):
        return 0, law.alpha, 1.0, DUMMY_TABLE_ARGS
    if isinstance(law, ConditionedMixtureLaw):
        table = law.mixing.quantile_table()
        return 1, 0.0, float(law.nscale), table.as_args()
    raise TypeError(
        "law must be HeavyTailLaw or ConditionedMixtureLaw, "
        f"got {type(law).__name__}")


def _scenario_flag(scenario):
    if scenario == WAIT_FIRST:
        return 0
    if scenario == JUMP_FIRST:
        return 1
    raise ValueError(f"scenario must be {WAIT_FIRST!r} or {JUMP_FIRST!r}")


@dataclass(frozen=True)
class WalkPath:
    """One realized trajectory, stored as raw event data.

    waits[i] is the i-th waiting time, jumps[i] the i-th displacement
    (length waits[i] times a unit direction), betas[i] the mixing
    exponent behind event i (None for the stable law).  Events are
    simulated past ``horizon``: the accumulated waits strictly exceed it,
    so every t <= horizon falls inside a realized waiting period.
    """

    scenario: str
    horizon: float
    waits: np.ndarray
    jumps: np.ndarray
    betas: np.ndarray = None

    @property
    def epochs(self) -> np.ndarray:
        """Event clock: 0, then each completed wait."""
        return np.concatenate(([0.0], np.cumsum(self.waits)))

    @property
    def dim(self) -> int:
        return self.jumps.shape[1]

    def position_at(self, t):
        """Occupied position at each query time in [0, horizon]."""
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0.0) or np.any(t > self.horizon):
            raise ValueError("query times must lie in [0, horizon]")
        cum = np.cumsum(self.waits)
        k = np.searchsorted(cum, t, side="right")
        cumj = np.concatenate((np.zeros((1, self.dim)),
                               np.cumsum(self.jumps, axis=0)))
        if self.scenario == JUMP_FIRST:
            k = k + 1
        return cumj[k]


def simulate_walk(law, scenario, horizon, seed, path_id=0,
                  directions=None) -> WalkPath:
    """Simulate one trajectory, scalar draw by scalar draw.

    Consumes stream (seed, path_id) in exactly the order the ensemble
    kernels do, so the path reproduces ensemble row path_id.
    """
    if horizon < 0.0:
        raise ValueError("horizon must be >= 0")
    if directions is None:
        directions = DirectionMeasure.symmetric_pair()
    model, alpha, nscale, _ = _law_args(law)
    _scenario_flag(scenario)
    table = law.mixing.quantile_table() if model == 1 else None
    dmode, atoms, cumw = directions.sampler_args()
    d = directions.dim
    stream = RngStream(seed, path_id)
    off = 0
    waits, jumps, betas = [], [], []
    S = 0.0
    while S <= horizon:
        if model == 1:
            u1, u2 = stream.uniforms(2, off)
            off += 2
            beta = float(qbeta(u1, table)[0])
            # numpy pow so a tiny exponent overflows to inf (a Python
            # float ** would raise instead), matching the kernels
            with np.errstate(over="ignore"):
                T = float(np.float64(nscale * u2) ** (-1.0 / beta))
            betas.append(beta)
        else:
            u1 = stream.uniforms(1, off)[0]
            off += 1
            T = float(np.float64(u1) ** (-1.0 / alpha))
        if dmode == 0:
            u = stream.uniforms(1, off)[0]
            off += 1
            ai = min(int(np.searchsorted(cumw, u, side="right")),
                     atoms.shape[0] - 1)
            v = atoms[ai]
        else:
            npairs = (d + 1) // 2
            g = np.empty(2 * npairs)
            for p in range(npairs):
                ua, ub = stream.uniforms(2, off)
                off += 2
                r = math.sqrt(-2.0 * math.log(ua))
                ang = 2.0 * math.pi * ub
                g[2 * p] = r * math.cos(ang)
                g[2 * p + 1] = r * math.sin(ang)
            g = g[:d]
            # multiply-then-sum, never a BLAS dot: the kernels compute
            # the norm this way and replay must agree to the last bit
            nrm = math.sqrt(float((g * g).sum()))
            if nrm == 0.0:
                g[:] = 0.0
                g[0] = 1.0
                nrm = 1.0
            v = g / nrm
        waits.append(T)
        # zero direction component: zero displacement even when the wait
        # overflowed to inf (avoids inf*0 -> nan)
        with np.errstate(invalid="ignore"):
            jump = np.asarray(T * v)
        jumps.append(np.where(np.asarray(v) == 0.0, 0.0, jump))
        S += T
    return WalkPath(
        scenario=scenario,
        horizon=float(horizon),
        waits=np.array(waits),
        jumps=np.array(jumps).reshape(len(jumps), d),
        betas=np.array(betas) if model == 1 else None,
    )


def simulate_lw(alpha, horizon, seed, path_id=0, directions=None):
    """Wait-first walk with the stable heavy-tailed law."""
    return simulate_walk(HeavyTailLaw(alpha), WAIT_FIRST, horizon, seed,
                         path_id, directions)


def simulate_olw(alpha, horizon, seed, path_id=0, directions=None):
    """Jump-first walk with the stable heavy-tailed law."""
    return simulate_walk(HeavyTailLaw(alpha), JUMP_FIRST, horizon, seed,
                         path_id, directions)


def simulate_glw(mixing, nscale, horizon, seed, path_id=0, directions=None):
    """Wait-first walk with the scale-conditioned mixture law."""
    return simulate_walk(ConditionedMixtureLaw(mixing, nscale), WAIT_FIRST,
                         horizon, seed, path_id, directions)


def simulate_golw(mixing, nscale, horizon, seed, path_id=0, directions=None):
    """Jump-first walk with the scale-conditioned mixture law."""
    return simulate_walk(ConditionedMixtureLaw(mixing, nscale), JUMP_FIRST,
                         horizon, seed, path_id, directions)


def walk_ensemble(law, scenario, times, n_paths, seed, first_path=0,
                  directions=None):
    """Positions of n_paths trajectories at sorted probe times.

    Returns an (n_paths, len(times), dim) array computed by the active
    kernel backend.  Trajectory k owns stream (seed, first_path + k),
    so ensembles may be built incrementally or in parts.
    """
    if directions is None:
        directions = DirectionMeasure.symmetric_pair()
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times.ndim != 1 or times.shape[0] == 0:
        raise ValueError("times must be a nonempty 1-d array")
    if np.any(np.diff(times) < 0.0) or times[0] < 0.0:
        raise ValueError("times must be sorted and nonnegative")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    model, alpha, nscale, targs = _law_args(law)
    jump_first = _scenario_flag(scenario)
    dmode, atoms, cumw = directions.sampler_args()
    ids = np.arange(first_path, first_path + n_paths, dtype=np.uint64)
    states = stream_states(seed, ids)
    return _kernels.get().walk_positions(
        model, alpha, nscale, *targs, dmode, atoms, cumw, jump_first,
        times, states)


def rescaled_walk_positions(law, scenario, times, scale, n_paths, seed,
                            first_path=0, directions=None):
    """Ensemble positions of the rescaled walk R(scale*t)/scale.

    For the stable law this converges to the corresponding limit-process
    position as scale grows; probe times are in limit units.
    """
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    times = np.ascontiguousarray(times, dtype=np.float64)
    pos = walk_ensemble(law, scenario, times * scale, n_paths, seed,
                        first_path, directions)
    return pos / scale
