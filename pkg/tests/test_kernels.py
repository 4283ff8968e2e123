"""Backend selection and numba/numpy kernel parity.

The two implementations share one source of randomness (counter-based
streams), so they walk through identical draw sequences. They are not
bit-identical: transcendental calls and power evaluations differ in the
last ulp between the compiled and the vectorized paths. The contract
tested here is exact agreement of finiteness patterns and relative
agreement at 1e-12, far below any statistical tolerance in the package.
"""

import numpy as np
import pytest

from levywalks import _kernels
from levywalks.limits import (
    CoupledJumpLists,
    StableJumpMeasure,
    DistributedJumpMeasure,
    coupled_terminal_ensemble,
    limit_ecf,
    limit_positions_at,
    simulate_coupled_jumps,
)
from levywalks.rng import RngStream
from levywalks.sampling import (
    JUMP_FIRST,
    WAIT_FIRST,
    ConditionedMixtureLaw,
    DirectionMeasure,
    MixingDensity,
    StableWaitingLaw,
    qbeta,
)
from levywalks.walks import walk_ensemble

PAIR = DirectionMeasure.symmetric_pair()
BACKENDS = ["numpy", "numba"]


@pytest.fixture
def both_backends():
    """Restore whatever backend was active, whatever the test did."""
    prev = _kernels.active_name()
    yield
    _kernels.set_backend(prev)


def run_on(name, fn):
    prev = _kernels.set_backend(name)
    try:
        return fn()
    finally:
        _kernels.set_backend(prev)


def assert_parity(a, b, rel=1e-12):
    assert a.shape == b.shape
    fin_a, fin_b = np.isfinite(a), np.isfinite(b)
    assert np.array_equal(fin_a, fin_b)
    assert np.array_equal(a[~fin_a], b[~fin_b])  # same infs, same signs
    scale = np.maximum(np.abs(a[fin_a]), 1.0)
    assert np.max(np.abs(a[fin_a] - b[fin_b]) / scale) <= rel


# -- selection API -----------------------------------------------------------

def test_backend_registry(both_backends):
    assert _kernels.active_name() in ("numba", "numpy")
    prev = _kernels.set_backend("numpy")
    assert _kernels.active_name() == "numpy"
    assert _kernels.get() is _kernels.backend("numpy")
    _kernels.set_backend(prev)
    with pytest.raises(ValueError, match="backend"):
        _kernels.backend("fortran")
    with pytest.raises(ValueError, match="backend"):
        _kernels.set_backend("")


def test_backends_expose_same_surface():
    mods = [_kernels.backend(n) for n in BACKENDS]
    names = [
        {k for k in dir(m) if not k.startswith("_") and k != "np"}
        for m in mods
    ]
    assert names[0] == names[1]
    assert all(m.PHASE_LIM == 2.0 ** 53 for m in mods)


# -- walk kernels ------------------------------------------------------------

WALK_CASES = [
    (StableWaitingLaw(0.5), WAIT_FIRST, None, "stable-wf"),
    (StableWaitingLaw(0.8), JUMP_FIRST, DirectionMeasure.uniform(2),
     "stable-jf-2d"),
    (ConditionedMixtureLaw(MixingDensity(0.5, 2.0), 1000), WAIT_FIRST,
     DirectionMeasure.uniform(3), "mix-wf-3d"),
    (ConditionedMixtureLaw(MixingDensity(1.0, 2.0), 100), JUMP_FIRST,
     None, "mix-jf"),
]


@pytest.mark.parametrize("law,scenario,dirs,_id", WALK_CASES,
                         ids=[c[-1] for c in WALK_CASES])
def test_walk_positions_parity(law, scenario, dirs, _id):
    times = np.linspace(0.5, 10.0, 7)
    out = {
        n: run_on(n, lambda: walk_ensemble(law, scenario, times, 50, 42,
                                           directions=dirs))
        for n in BACKENDS
    }
    assert_parity(out["numpy"], out["numba"])


def test_walk_overflow_pattern_identical():
    # tiny gamma mixtures overflow jump-first positions to inf; both
    # backends must overflow on exactly the same entries
    law = ConditionedMixtureLaw(MixingDensity(0.1, 1.2), 1)
    times = np.linspace(1.0, 10.0, 5)
    out = {
        n: run_on(n, lambda: walk_ensemble(law, JUMP_FIRST, times, 40, 0))
        for n in BACKENDS
    }
    assert not np.isfinite(out["numpy"]).all()
    assert_parity(out["numpy"], out["numba"])


# -- limit kernels -----------------------------------------------------------

@pytest.mark.parametrize("measure", [
    StableJumpMeasure(0.5),
    DistributedJumpMeasure(MixingDensity(1.0, 2.0)),
], ids=["stable", "mix"])
def test_limit_pipeline_parity(measure):
    def pipeline():
        cj = simulate_coupled_jumps(measure, PAIR, 1e-3, 1.5, 80, seed=7)
        times = np.array([0.4, 0.9, 1.4])
        pos_w = limit_positions_at(cj, times, WAIT_FIRST)
        pos_j = limit_positions_at(cj, times, JUMP_FIRST)
        L, S = coupled_terminal_ensemble(cj)
        return cj, pos_w, pos_j, L, S

    res = {n: run_on(n, pipeline) for n in BACKENDS}
    a, b = res["numpy"], res["numba"]
    # identical draws -> identical jump lists up to the last ulp
    assert np.array_equal(a[0].starts, b[0].starts)
    assert_parity(a[0].mags, b[0].mags)
    assert_parity(a[0].epochs, b[0].epochs)
    for i in (1, 2, 3, 4):
        assert_parity(np.asarray(a[i]), np.asarray(b[i]))


def test_limit_ecf_parity_and_conventions():
    kvecs = np.array([[0.0], [0.8], [2.0]])
    times = np.array([0.5, 1.0])

    def pipeline():
        cj = simulate_coupled_jumps(StableJumpMeasure(0.5), PAIR, 1e-2,
                                    1.0, 60, seed=3)
        return limit_ecf(cj, times, kvecs)

    res = {n: run_on(n, pipeline) for n in BACKENDS}
    for i in range(3):
        av, bv = res["numpy"][i], res["numba"][i]
        assert np.max(np.abs(av - bv)) <= 1e-12
    ecf_w, ecf_j, se = res["numba"]
    assert np.all(ecf_w[:, 0] == 1.0 + 0.0j)
    assert np.all(ecf_j[:, 0] == 1.0 + 0.0j)
    assert np.all(se[:, 0] == 0.0)


def test_ecf_unresolvable_positions_drop_out():
    # a jump magnitude past 2^53 has no resolvable phase: it must count
    # as zero against k != 0 and as one against k = 0, on both backends
    inf_list = CoupledJumpLists(
        measure=None, directions=PAIR, eps=1.0, tilt_mode=0,
        tilt_grid=np.empty(0), seed=0, first_list=0, tau0=2.0,
        starts=np.array([0, 1, 2]),
        epochs=np.array([0.5, 0.5]),
        mags=np.array([2.0 ** 60, 1.0]),
        dirs=np.array([[1.0], [1.0]]),
        windows=np.ones(2, dtype=np.int64),
        horizons=np.array([2.0, 2.0]),
        drift_s=1.0, drift_l=np.array([0.5, 0.5]))
    times = np.array([1.0])
    kvecs = np.array([[0.0], [1.0]])

    def pipeline():
        return limit_ecf(inf_list, times, kvecs)

    res = {n: run_on(n, pipeline) for n in BACKENDS}
    for i in range(3):
        assert np.max(np.abs(res["numpy"][i] - res["numba"][i])) <= 1e-12
    ecf_w, ecf_j, _ = res["numba"]
    assert ecf_w[0, 0] == 1.0 + 0.0j
    assert ecf_j[0, 0] == 1.0 + 0.0j
    # second path is at 1.5 - 0.5 drift = finite; first contributes 0
    fine = np.exp(1j * 1.0 * 1.5) / 2.0
    assert ecf_j[0, 1] == pytest.approx(fine, abs=1e-12)


# -- scalar table kernels ------------------------------------------------------

def test_qbeta_parity():
    table = MixingDensity(0.7, 3.0).quantile_table()
    u = RngStream(11, 0).uniforms(4096)
    res = {n: run_on(n, lambda: qbeta(u, table)) for n in BACKENDS}
    assert_parity(res["numpy"], res["numba"], rel=1e-13)
    assert np.all((res["numba"] > 0.0) & (res["numba"] < 1.0))
