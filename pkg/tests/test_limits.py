"""Coupled limit pair: jump-list construction, marginals, first passage."""

import math

import numpy as np
import pytest
from scipy import integrate as sint

from levywalks.flcalc import truncated_fl_exponent
from levywalks.limits import (
    TILT_GRID_EPS,
    CoupledJumpLists,
    CoverageError,
    DistributedJumpMeasure,
    StableJumpMeasure,
    coupled_terminal_ensemble,
    extend_coverage,
    first_passage_profile,
    limit_ensemble,
    limit_ecf,
    limit_positions_at,
    simulate_coupled_jumps,
    subordinator_laplace,
    truncated_laplace_exponent,
    truncation_bias,
)
from levywalks.sampling import (
    JUMP_FIRST,
    WAIT_FIRST,
    DirectionMeasure,
    MixingDensity,
)

PAIR = DirectionMeasure.symmetric_pair()
STABLE = StableJumpMeasure(0.5)
MIXTURE = DistributedJumpMeasure(MixingDensity(1.0, 2.0))


# -- measure-level closed forms ------------------------------------------

def test_stable_tail_mass_closed_form():
    # eps^-alpha / Gamma(1-alpha); at eps=1, alpha=1/2 this is 1/sqrt(pi)
    assert STABLE.tail_mass(1.0) == pytest.approx(1.0 / math.sqrt(math.pi),
                                                  rel=1e-14)
    assert STABLE.tail_mass(1e-4) == pytest.approx(
        1e2 / math.gamma(0.5), rel=1e-14)


def test_distributed_tail_mass_closed_form():
    # Beta(1,2) mixture of beta*t^(-1-beta) levels: mass above eps is
    # int_0^1 eps^-beta 2(1-beta) dbeta = 2(e - 2) at eps = 1/e
    val = MIXTURE.tail_mass(math.exp(-1.0))
    assert val == pytest.approx(2.0 * (math.e - 2.0), rel=1e-10)


def test_stable_laplace_exponent_is_power():
    z = np.array([0.5, 1.0 + 0.0j, 1.0 - 1.0j, 3.0 + 2.0j])
    assert np.allclose(STABLE.laplace_exponent(z), z ** 0.5, rtol=1e-15)


def test_distributed_laplace_exponent_shapes_and_zero():
    z = np.array([[0.0 + 0.0j, 1.0 + 0.0j], [2.0 + 0.0j, 1.0 - 1.0j]])
    g = MIXTURE.laplace_exponent(z)
    assert g.shape == z.shape
    assert g[0, 0] == 0.0  # empty exponent at the origin
    # frozen 40-digit quadrature references (tests/oracles)
    assert g[0, 1] == pytest.approx(1.8454919013612612, rel=1e-12)
    assert g[1, 0] == pytest.approx(2.6618913593702884, rel=1e-12)
    assert g[1, 1] == pytest.approx(1.9647813929968578 - 0.8664319290118165j,
                                    rel=1e-12)


def test_subordinator_laplace_marginal():
    assert subordinator_laplace(STABLE, 2.0) == pytest.approx(
        math.exp(-math.sqrt(2.0)), rel=1e-14)
    assert subordinator_laplace(STABLE, 1.0, tau=3.0) == pytest.approx(
        math.exp(-3.0), rel=1e-14)
    assert subordinator_laplace(MIXTURE, 1.0) == pytest.approx(
        math.exp(-1.8454919013612612), rel=1e-12)


# -- truncation ------------------------------------------------------------

def series_remainder(z, eps, b):
    """int_0^eps (e^(-z t) - 1 + z t) b t^(-1-b) dt, expanded termwise.

    The compensated integrand is an entire series in z t starting at the
    quadratic term, and each power integrates against the tail slice in
    closed form. Converges to machine precision in ~10 terms here since
    z * eps <= 0.02.
    """
    total = 0.0
    for m in range(2, 60):
        term = b * (-z) ** m / math.factorial(m) * eps ** (m - b) / (m - b)
        total += term
        if abs(term) < 1e-30 * abs(total):
            break
    return total


def oracle_remainder(measure, z, eps):
    if isinstance(measure, StableJumpMeasure):
        a = measure.alpha
        return series_remainder(z, eps, a) / math.gamma(1.0 - a)
    mix = measure.mixing
    val, _ = sint.quad(lambda b: series_remainder(z, eps, b) * mix.pdf(b),
                       0.0, 1.0, epsabs=1e-15, epsrel=1e-12)
    return val


@pytest.mark.parametrize("measure", [STABLE, MIXTURE], ids=["stable", "mix"])
@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_truncated_exponent_vs_quadrature(measure, eps):
    for z in (0.5, 2.0):
        full = measure.laplace_exponent(np.array([z + 0.0j]))[0]
        trunc = truncated_laplace_exponent(measure, np.array([z + 0.0j]),
                                           eps)[0]
        oracle = oracle_remainder(measure, z, eps)
        assert (trunc - full).real == pytest.approx(oracle, rel=1e-9)
        assert abs((trunc - full).imag) < 1e-15


def test_truncation_bias_shrinks_by_documented_factor():
    for measure in (STABLE, MIXTURE):
        b2 = truncation_bias(measure, np.array([1.0 + 0.0j]), 1e-2)[0]
        b3 = truncation_bias(measure, np.array([1.0 + 0.0j]), 1e-3)[0]
        assert b2 > 0.0 and b3 > 0.0
        assert b2 / b3 >= 2.0


# -- jump-list construction --------------------------------------------------

def test_simulated_lists_are_well_formed():
    cj = simulate_coupled_jumps(STABLE, PAIR, 1e-3, 2.0, 50, seed=1)
    assert cj.n_lists == 50
    assert cj.dim == 1
    assert np.all(cj.mags >= 1e-3)
    assert np.all(cj.horizons == 2.0)
    owner = np.repeat(np.arange(50), np.diff(cj.starts))
    for i in range(50):
        e = cj.epochs[owner == i]
        assert np.all(np.diff(e) >= 0.0)
        assert np.all((e >= 0.0) & (e <= 2.0))
    assert cj.drift_s > 0.0
    assert np.all(np.abs(np.abs(cj.dirs) - 1.0) < 1e-12)


def test_simulation_is_deterministic_and_list_addressable():
    a = simulate_coupled_jumps(MIXTURE, PAIR, 1e-3, 1.0, 20, seed=3)
    b = simulate_coupled_jumps(MIXTURE, PAIR, 1e-3, 1.0, 20, seed=3)
    assert np.array_equal(a.mags, b.mags)
    assert np.array_equal(a.epochs, b.epochs)
    # list k of a run equals list 0 of a run starting at first_list=k
    c = simulate_coupled_jumps(MIXTURE, PAIR, 1e-3, 1.0, 1, seed=3,
                               first_list=7)
    lo, hi = a.starts[7], a.starts[8]
    assert np.array_equal(a.mags[lo:hi], c.mags)
    assert np.array_equal(a.epochs[lo:hi], c.epochs)
    assert np.array_equal(a.dirs[lo:hi], c.dirs)


def test_extend_coverage_preserves_existing_jumps():
    cj = simulate_coupled_jumps(STABLE, PAIR, 1e-3, 1.0, 30, seed=5)
    ext = extend_coverage(cj, 20.0)
    assert ext.covered_to() > 20.0
    owner0 = np.repeat(np.arange(30), np.diff(cj.starts))
    owner1 = np.repeat(np.arange(30), np.diff(ext.starts))
    for i in range(30):
        old = cj.epochs[owner0 == i]
        new = ext.epochs[owner1 == i]
        assert np.array_equal(new[: old.size], old)
    # extending to an already-covered point changes nothing
    again = extend_coverage(ext, 10.0)
    assert np.array_equal(again.epochs, ext.epochs)
    assert np.array_equal(again.horizons, ext.horizons)
    # extension windows regenerate identically regardless of the target
    far = extend_coverage(cj, 20.0)
    assert np.array_equal(far.epochs, ext.epochs)
    assert np.array_equal(far.mags, ext.mags)


def test_list_validation():
    good = dict(
        measure=None, directions=PAIR, eps=1.0, tilt_mode=0,
        tilt_grid=np.empty(0), seed=0, first_list=0, tau0=4.0,
        starts=np.array([0, 2]), epochs=np.array([1.0, 3.0]),
        mags=np.array([2.0, 4.0]), dirs=np.array([[1.0], [-1.0]]),
        windows=np.ones(1, dtype=np.int64), horizons=np.array([4.0]),
        drift_s=0.5, drift_l=np.array([0.25]))
    CoupledJumpLists(**good)
    for field, value, msg in [
        ("starts", np.array([0, 1]), "index"),
        ("starts", np.array([1, 2]), "index"),
        ("epochs", np.array([3.0, 1.0]), "sorted"),
        ("epochs", np.array([1.0, 5.0]), "horizon"),
        ("mags", np.array([0.5, 4.0]), ">= eps"),
        ("drift_s", 0.0, "drift_s"),
    ]:
        bad = dict(good)
        bad[field] = value
        with pytest.raises(ValueError, match=msg):
            CoupledJumpLists(**bad)


# -- deterministic path evaluation -------------------------------------------

@pytest.fixture
def handmade():
    """One list, fully worked by hand.

    S(tau) = tau/2 plus jumps of 2 at tau=1 and 4 at tau=3;
    L(tau) = tau/4 plus the same jumps signed +, -.
    """
    return CoupledJumpLists(
        measure=None, directions=PAIR, eps=1.0, tilt_mode=0,
        tilt_grid=np.empty(0), seed=0, first_list=0, tau0=4.0,
        starts=np.array([0, 2]), epochs=np.array([1.0, 3.0]),
        mags=np.array([2.0, 4.0]), dirs=np.array([[1.0], [-1.0]]),
        windows=np.ones(1, dtype=np.int64), horizons=np.array([4.0]),
        drift_s=0.5, drift_l=np.array([0.25]))


def test_positions_on_handmade_list(handmade):
    times = np.array([0.25, 1.0, 2.6, 3.6, 7.9])
    wait = limit_positions_at(handmade, times, WAIT_FIRST)
    jump = limit_positions_at(handmade, times, JUMP_FIRST)
    # drift-crossing probes agree; jump-straddled probes differ by
    # exactly the straddling jump
    assert np.allclose(wait[0, :, 0], [0.125, 0.25, 2.3, 2.75, -1.05],
                       rtol=1e-15)
    assert np.allclose(jump[0, :, 0], [0.125, 2.25, 2.3, -1.25, -1.05],
                       rtol=1e-15)


def test_first_passage_on_handmade_list(handmade):
    times = np.array([0.25, 1.0, 2.6, 3.6, 7.9])
    tau, straddled = first_passage_profile(handmade, times)
    assert np.allclose(tau[0], [0.5, 1.0, 1.2, 3.0, 3.8], rtol=1e-14)
    assert np.array_equal(straddled[0], [False, True, False, True, False])


def test_terminal_pair_on_handmade_list(handmade):
    L, S = coupled_terminal_ensemble(handmade)
    assert np.array_equal(L, [[-1.0]])
    assert np.array_equal(S, [8.0])
    assert handmade.covered_to() == 8.0
    assert handmade.terminal_sums()[0] == 8.0


def test_coverage_and_scenario_guards(handmade):
    with pytest.raises(CoverageError):
        limit_positions_at(handmade, np.array([8.0]), WAIT_FIRST)
    with pytest.raises(CoverageError):
        first_passage_profile(handmade, np.array([9.0]))
    with pytest.raises(ValueError, match="scenario"):
        limit_positions_at(handmade, np.array([1.0]), "diagonal")
    ext = extend_coverage(simulate_coupled_jumps(STABLE, PAIR, 1e-2, 1.0,
                                                 4, seed=0), 3.0)
    with pytest.raises(ValueError, match="uniform horizon"):
        coupled_terminal_ensemble(ext, 1.0)


def test_pathwise_domination():
    # |L(tau)| <= S(tau) holds list by list: space jumps ride on the
    # same magnitudes that advance operational time
    for measure in (STABLE, MIXTURE):
        cj = simulate_coupled_jumps(measure, PAIR, 1e-3, 1.0, 300, seed=9)
        L, S = coupled_terminal_ensemble(cj)
        assert np.all(np.abs(L[:, 0]) <= S * (1.0 + 1e-12))


def test_wait_first_positions_respect_cone():
    times = np.array([0.5, 1.0, 2.0])
    pos = limit_ensemble(STABLE, PAIR, 1e-3, times, 200, 11, WAIT_FIRST)
    assert np.all(np.abs(pos[:, :, 0]) <= times[None, :] * (1.0 + 1e-9))


# -- Monte Carlo vs transform ------------------------------------------------

@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_terminal_cf_matches_truncated_symbol(eps):
    """E exp(i k L(1) - s S(1)) = exp(-symbol) exactly at matching eps.

    Comparing against the truncated symbol removes the truncation bias
    from the budget, so the gap is pure Monte Carlo noise at any eps.
    """
    k, s = 1.0, 1.0
    n = 4000
    for measure in (STABLE, MIXTURE):
        cj = simulate_coupled_jumps(measure, PAIR, eps, 1.0, n, seed=17)
        L, S = coupled_terminal_ensemble(cj)
        # mixture magnitudes can overflow to inf; those samples carry
        # weight exp(-s * inf) = 0, which naive complex exp turns to nan
        f = np.zeros(n, dtype=np.complex128)
        ok = np.isfinite(S)
        f[ok] = np.exp(1j * k * L[ok, 0] - s * S[ok])
        mc = f.mean()
        se = np.sqrt(max(np.mean(np.abs(f) ** 2) - np.abs(mc) ** 2, 0.0) / n)
        theory = np.exp(-truncated_fl_exponent(measure, PAIR, k, s, eps))[0, 0]
        assert abs(mc - theory) <= 4.0 * se + 1e-12


def test_small_eps_takes_tilt_grid_path():
    # below TILT_GRID_EPS magnitude sampling switches to the tabulated
    # tilt grid; the lists must stay well-formed and reproducible
    eps = TILT_GRID_EPS / 2.0
    a = simulate_coupled_jumps(MIXTURE, PAIR, eps, 0.5, 10, seed=2)
    b = simulate_coupled_jumps(MIXTURE, PAIR, eps, 0.5, 10, seed=2)
    assert np.array_equal(a.mags, b.mags)
    assert np.all(a.mags >= eps)
    assert a.tilt_mode != simulate_coupled_jumps(
        MIXTURE, PAIR, 1e-3, 0.5, 10, seed=2).tilt_mode


def test_limit_ecf_matches_direct_average():
    cj = simulate_coupled_jumps(STABLE, PAIR, 1e-2, 1.0, 64, seed=21)
    cj = extend_coverage(cj, 3.0)
    times = np.array([0.5, 1.0, 2.5])
    kvecs = np.array([[0.0], [0.7], [1.5]])
    ecf_w, ecf_j, se = limit_ecf(cj, times, kvecs)
    for scen, vals in ((WAIT_FIRST, ecf_w), (JUMP_FIRST, ecf_j)):
        pos = limit_positions_at(cj, times, scen)
        direct = np.exp(1j * pos @ kvecs.T).mean(axis=0)
        assert np.max(np.abs(vals - direct)) < 1e-12
    assert np.all(vals[:, 0] == 1.0)  # k = 0 column exact
    assert se.shape == (3, 3)


def test_limit_ensemble_first_path_addressing():
    times = np.array([0.5, 1.0])
    full = limit_ensemble(STABLE, PAIR, 1e-2, times, 6, 13, WAIT_FIRST)
    tail = limit_ensemble(STABLE, PAIR, 1e-2, times, 2, 13, WAIT_FIRST,
                          first_path=4)
    assert np.array_equal(full[4:], tail)
