"""Waiting-time laws, mixing-density quantiles, direction measures."""

import numpy as np
import pytest
from scipy import stats as sps

from levywalks.rng import RngStream
from levywalks.sampling import (
    DirectionMeasure,
    HeavyTailLaw,
    MixingDensity,
    conditional_from_uniform,
    conditional_survival,
    pareto_from_uniform,
    qbeta,
    sample_conditional_waiting,
    sample_direction,
    sample_mixing_exponent,
    sample_pareto_waiting,
    validate_mixing_density,
)
from levywalks._quad import integrate01


# -- heavy-tailed waits ------------------------------------------------

def test_pareto_inversion_frozen_points():
    # u**(-1/alpha): closed form, checked at exactly representable inputs
    assert pareto_from_uniform(np.array([0.25]), 0.5)[0] == 16.0
    assert pareto_from_uniform(np.array([0.5]), 0.5)[0] == 4.0
    assert pareto_from_uniform(np.array([1.0]), 0.8)[0] == 1.0


def test_pareto_law_consistency():
    law = HeavyTailLaw(0.5)
    t = np.array([1.0, 2.0, 10.0, 1e6])
    assert np.allclose(law.survival(t), t ** -0.5, rtol=1e-15)
    assert np.allclose(law.cdf(t) + law.survival(t), 1.0, rtol=1e-15)
    assert law.survival(np.array([0.5]))[0] == 1.0  # support is [1, inf)


def test_pareto_samples_match_law():
    law = HeavyTailLaw(0.7)
    x = sample_pareto_waiting(law, RngStream(2024), size=100000)
    d = sps.kstest(x, lambda t: law.cdf(t)).statistic
    assert d < 1.36 / np.sqrt(x.size)


def test_conditional_waiting_closed_form():
    u = np.linspace(0.001, 0.999, 101)
    n, beta = 100.0, 0.5
    t = conditional_from_uniform(u, n, beta)
    assert np.allclose(t, (n * u) ** (-1.0 / beta), rtol=1e-15)
    # survival min(1, t**-beta / n) inverts the map
    assert np.allclose(conditional_survival(t, n, beta), u, rtol=1e-12)
    assert conditional_survival(np.array([0.5 * n ** (-1 / beta)]), n, beta)[0] == 1.0


def test_conditional_samples_match_law():
    n, beta = 100.0, 0.5
    x = sample_conditional_waiting(n, beta, RngStream(7), size=100000)
    cdf = lambda t: 1.0 - conditional_survival(t, n, beta)
    assert sps.kstest(x, cdf).statistic < 1.36 / np.sqrt(x.size)


# -- mixing density ----------------------------------------------------

def test_mixing_density_is_normalized():
    m = MixingDensity(0.5, 2.0)
    # pdf underflows cleanly to 0 at nodes rounding to beta = 1
    with np.errstate(divide="ignore"):
        val, _ = integrate01(lambda x, omx: m.pdf(x))
        assert val == pytest.approx(1.0, abs=1e-10)
        val, _ = integrate01(lambda x, omx: x * m.pdf(x))
        assert val == pytest.approx(m.mean(), abs=1e-10)
        mu = m.mean()
        val, _ = integrate01(lambda x, omx: (x - mu) ** 2 * m.pdf(x))
        assert val == pytest.approx(m.var(), abs=1e-10)


def test_mixing_density_rejects_bad_shape():
    with pytest.raises(ValueError):
        MixingDensity(0.0, 2.0)
    with pytest.raises(ValueError):
        MixingDensity(0.5, 0.0)


def test_edge_condition_blocks_sampling():
    # b = 1 parameterizes a fine Beta density, but 1/(1-beta) is not
    # integrable against it, so validation flags it and no table exists
    m = MixingDensity(0.5, 1.0)
    report = validate_mixing_density(m)
    assert not report.valid
    assert not report.edge_integrable
    assert any("b > 1" in msg for msg in report.messages)
    with pytest.raises(ValueError, match="b > 1"):
        m.quantile_table()


def test_validate_mixing_density_report():
    report = validate_mixing_density(MixingDensity(1.0, 2.0))
    assert bool(report)
    assert report.valid and report.edge_integrable and report.regular_variation_ok
    assert report.rv_exponent == 0.0


@pytest.mark.parametrize("gamma", [0.1, 0.5, 1.0, 2.0, 5.0, 50.0])
@pytest.mark.parametrize("b", [1.2, 1.5, 2.0, 4.0])
def test_qbeta_roundtrip_accuracy(gamma, b):
    # probed worst case over this grid is 2.3e-10; gate leaves ~4x slack
    m = MixingDensity(gamma, b)
    table = m.quantile_table()
    u = np.linspace(1e-6, 1.0 - 1e-6, 2001)
    x = qbeta(u, table)
    assert np.all((x > 0.0) & (x < 1.0))
    assert np.all(np.diff(x) >= 0.0)
    assert np.max(np.abs(m.cdf(x) - u)) < 1e-9


def test_qbeta_tail_clamps():
    table = MixingDensity(0.5, 2.0).quantile_table()
    x = qbeta(np.array([1e-300, 1.0 - 1e-16]), table)
    assert 0.0 < x[0] < x[1] < 1.0


def test_sample_mixing_exponent_matches_cdf():
    m = MixingDensity(2.0, 3.0)
    x = sample_mixing_exponent(m, RngStream(31), size=50000)
    assert sps.kstest(x, m.cdf).statistic < 1.36 / np.sqrt(x.size)


# -- direction measures ------------------------------------------------

def test_symmetric_pair_atoms():
    d = DirectionMeasure.symmetric_pair()
    nodes, w = d.quadrature()
    assert nodes.shape == (2, 1)
    assert sorted(nodes[:, 0]) == [-1.0, 1.0]
    assert np.allclose(w, 0.5)
    assert np.allclose(d.mean_direction(), 0.0)


def test_point_measure():
    d = DirectionMeasure.point(np.array([0.0, 1.0]))
    nodes, w = d.quadrature()
    assert np.array_equal(nodes, [[0.0, 1.0]])
    assert w[0] == 1.0
    x = sample_direction(d, RngStream(1), size=16)
    assert np.array_equal(x, np.tile([[0.0, 1.0]], (16, 1)))


def test_discrete_measure_atoms_and_weights():
    atoms = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    d = DirectionMeasure.discrete(atoms, np.array([0.5, 0.25, 0.25]))
    nodes, w = d.quadrature()
    assert np.array_equal(nodes, atoms)
    assert np.allclose(d.mean_direction(), [0.25, 0.25])
    x = sample_direction(d, RngStream(5), size=40000)
    frac = (x[:, 0] > 0.5).mean()
    assert abs(frac - 0.5) < 0.02
    # normalization is the caller's job (the config layer does it)
    with pytest.raises(ValueError, match="sum to 1"):
        DirectionMeasure.discrete(atoms, np.array([2.0, 1.0, 1.0]))
    with pytest.raises(ValueError, match="unit"):
        DirectionMeasure.discrete(np.array([[2.0, 0.0]]), np.array([1.0]))
    # equal weights are implied when omitted
    e = DirectionMeasure.discrete(atoms)
    assert np.allclose(e.quadrature()[1], 1.0 / 3.0)


def test_uniform_sphere_samples_are_unit():
    for dim in (1, 2, 3):
        d = DirectionMeasure.uniform(dim)
        x = sample_direction(d, RngStream(9), size=5000)
        assert x.shape == (5000, dim)
        assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)) < 1e-12
        assert np.max(np.abs(np.mean(x, axis=0))) < 0.05


def test_uniform_quadrature_is_a_probability_rule():
    d = DirectionMeasure.uniform(2, quad_nodes=64)
    nodes, w = d.quadrature()
    assert np.allclose(np.linalg.norm(nodes, axis=1), 1.0, atol=1e-14)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    # the rule integrates <k,u>^2 to |k|^2/dim exactly on the circle
    k = np.array([0.7, -1.3])
    val = ((nodes @ k) ** 2 * w).sum()
    assert val == pytest.approx(np.dot(k, k) / 2.0, rel=1e-12)


def test_direction_sampling_is_deterministic():
    d = DirectionMeasure.uniform(3)
    a = sample_direction(d, RngStream(17), size=100)
    b = sample_direction(d, RngStream(17), size=100)
    assert np.array_equal(a, b)
