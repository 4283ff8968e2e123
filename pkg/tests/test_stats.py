"""Estimator conventions: ECF guards, tabulated Laplace, MSD, Hill."""

import numpy as np
import pytest

from levywalks.stats import (
    PHASE_LIM,
    ecf_distance,
    empirical_cf,
    hill_tail_index,
    msd,
    numerical_laplace,
)


# -- empirical characteristic function ----------------------------------

def test_ecf_hand_values():
    samples = np.array([[1.0], [-1.0]])
    k = np.array([[np.pi], [0.0]])
    vals, se = empirical_cf(samples, k)
    assert vals[0] == pytest.approx(np.cos(np.pi), abs=1e-15)
    assert vals[1] == 1.0 + 0.0j
    assert se[1] == 0.0


def test_ecf_k_zero_is_exactly_one():
    # k = 0 is the normalization probe: it must be exact, not approximate
    x = np.random.default_rng(0).standard_normal((501, 2)) * 1e8
    vals, se = empirical_cf(x, np.zeros((1, 2)))
    assert vals[0] == 1.0 + 0.0j
    assert se[0] == 0.0


@pytest.mark.parametrize("bad", [np.inf, -np.inf, np.nan, 2.0 ** 53, -2.0 ** 53])
def test_ecf_unresolvable_coordinates_contribute_zero(bad):
    """Coordinates at or beyond 2**53 have no resolvable phase.

    They enter the average as 0 against any nonzero k component (pulling
    the ECF toward 0, never poisoning it with NaN), while the k = 0
    column stays exact.
    """
    samples = np.array([[1.0], [bad]])
    k = np.array([[2.0], [0.0]])
    vals, _ = empirical_cf(samples, k)
    expected = np.exp(2.0j) / 2.0
    assert vals[0] == pytest.approx(expected, abs=1e-15)
    assert vals[1] == 1.0 + 0.0j
    assert PHASE_LIM == 2.0 ** 53


def test_ecf_threshold_is_sharp():
    below = np.array([[np.nextafter(PHASE_LIM, 0.0)]])
    at = np.array([[PHASE_LIM]])
    k = np.array([[1.0]])
    v_below, _ = empirical_cf(below, k)
    v_at, _ = empirical_cf(at, k)
    assert v_below[0] != 0.0
    assert v_at[0] == 0.0


def test_ecf_mixed_dims_require_matching_k():
    with pytest.raises(ValueError):
        empirical_cf(np.zeros((4, 2)), np.zeros((1, 3)))


# -- numerical Laplace transform ----------------------------------------

def test_laplace_constant_telescopes_exactly():
    # the closed-form cell rule makes a constant integrate to 1/s with
    # only rounding error, across four orders of magnitude in s
    t = np.linspace(0.0, 50.0, 4000)
    f = np.ones_like(t)
    for s in (0.004, 0.1, 1.0, 30.0):
        v = numerical_laplace(t, f, np.array([s]))[0]
        assert abs(v - 1.0 / s) * s < 5e-15


def test_laplace_exponential_accuracy():
    t = np.linspace(0.0, 50.0, 4000)
    f = np.exp(-t)
    s = np.array([0.5, 1.0, 2.0])
    v = numerical_laplace(t, f, s)
    # piecewise-linear f: error is O(h^2) ~ 1.3e-5 relative at h = 0.0125
    assert np.max(np.abs(v - 1.0 / (s + 1.0)) * (s + 1.0)) < 5e-5


def test_laplace_complex_values_and_batch_shape():
    t = np.linspace(0.0, 40.0, 2000)
    f = np.stack([np.exp(-t), np.exp(-2.0 * t)]).astype(complex)
    v = numerical_laplace(t, f, np.array([1.0, 2.0]))
    assert v.shape == (2, 2)
    assert v[1, 0] == pytest.approx(1.0 / 3.0, rel=5e-4)
    assert numerical_laplace(t, f[0], 1.0).shape == ()


def test_laplace_input_validation():
    t = np.linspace(0.0, 10.0, 100)
    f = np.ones(100)
    with pytest.raises(ValueError, match="start at 0"):
        numerical_laplace(t + 1.0, f, 1.0)
    with pytest.raises(ValueError, match="uniform"):
        numerical_laplace(np.concatenate([[0.0], t[2:]]), f[1:], 1.0)
    with pytest.raises(ValueError, match="match the time"):
        numerical_laplace(t, f[:-1], 1.0)
    with pytest.raises(ValueError, match="[Rr]e"):
        numerical_laplace(t, f, -1.0)


# -- mean squared displacement ------------------------------------------

def test_msd_hand_case():
    pos = np.array([[[1.0, 0.0]], [[3.0, 4.0]]])  # (N=2, M=1, d=2)
    m, se = msd(pos)
    assert m.shape == (1,)
    assert m[0] == pytest.approx((1.0 + 25.0) / 2.0)
    # SE of the mean of {1, 25}
    assert se[0] == pytest.approx(np.std([1.0, 25.0], ddof=1) / np.sqrt(2.0))


def test_msd_accepts_single_time_layout():
    x = np.array([[1.0], [2.0], [3.0]])  # (N, d) collapses to scalars
    m, se = msd(x)
    assert np.ndim(m) == 0
    assert m == pytest.approx(14.0 / 3.0)
    with pytest.raises(ValueError):
        msd(np.array([[1.0]]))  # N < 2 has no spread estimate


# -- Hill estimator -------------------------------------------------------

def test_hill_recovers_exponent_on_quantile_grid():
    # deterministic Pareto quantiles: no MC noise, only estimator bias
    N, alpha = 100000, 0.5
    x = ((np.arange(N) + 0.5) / N) ** (-1.0 / alpha)
    est = hill_tail_index(x, 1000)
    assert abs(est - alpha) < 0.005


def test_hill_input_validation():
    x = np.linspace(1.0, 2.0, 50)
    with pytest.raises(ValueError):
        hill_tail_index(x, 0)
    with pytest.raises(ValueError):
        hill_tail_index(x, 50)
    with pytest.raises(ValueError):
        hill_tail_index(np.array([0.0, 1.0, 2.0]), 1)
    with pytest.raises(ValueError, match="degenerate"):
        hill_tail_index(np.ones(100), 10)


# -- ECF distance ----------------------------------------------------------

def test_ecf_distance_hand_values():
    a = np.array([[0.0]])
    b = np.array([[np.pi]])
    k = np.array([[1.0], [2.0]])
    # |1 - e^{i pi k}| is 2 at k=1, 0 at k=2
    assert ecf_distance(a, b, k) == pytest.approx(2.0, abs=1e-12)
    assert ecf_distance(a, a, k) == 0.0
