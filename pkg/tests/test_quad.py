"""tanh-sinh ladder accuracy on smooth and endpoint-singular integrands."""

import math

import numpy as np
import pytest

from levywalks._quad import (
    MAX_LEVEL,
    QuadratureError,
    de_nodes,
    integrate01,
    mixing_integral,
)
from levywalks.sampling import MixingDensity


def test_nodes_cover_both_endpoints_in_full_precision():
    x, omx, w, h = de_nodes(4)
    assert np.all(x > 0.0) and np.all(omx > 0.0)
    assert np.all(w > 0.0)
    # omx is computed directly, not as 1 - x: it resolves the upper
    # endpoint far below float spacing around 1 (x saturates to 1.0
    # there, which is why integrands take omx as a second argument)
    assert omx.min() < 1e-200
    assert x.min() < 1e-200
    assert h == 0.5 / 2.0 ** 4


def test_polynomial():
    val, err = integrate01(lambda x, omx: x ** 2, rtol=1e-12)
    assert val == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert err < 1e-12


def test_log_singularity_at_zero():
    val, _ = integrate01(lambda x, omx: np.log(x), rtol=1e-12)
    assert val == pytest.approx(-1.0, abs=1e-13)


def test_algebraic_singularity_at_both_ends():
    # Beta(1/2, 1/2) mass: int x^-1/2 (1-x)^-1/2 = pi
    val, _ = integrate01(lambda x, omx: 1.0 / np.sqrt(x * omx), rtol=1e-12)
    assert val == pytest.approx(math.pi, rel=1e-13)


def test_vector_valued_integrand():
    val, err = integrate01(lambda x, omx: np.stack([x, x ** 3]), rtol=1e-12)
    assert val.shape == (2,)
    assert np.allclose(val, [0.5, 0.25], atol=1e-14)


def test_ladder_reports_failure():
    # wildly oscillatory integrand: no level up to MAX_LEVEL settles
    with pytest.raises(QuadratureError, match=str(MAX_LEVEL)):
        integrate01(lambda x, omx: np.sin(3000.0 / x), rtol=1e-12)


def test_mixing_integral_expectation():
    m = MixingDensity(0.5, 2.0)
    val, _ = mixing_integral(m, lambda x, omx: np.ones_like(x))
    assert val == pytest.approx(1.0, abs=1e-9)
    val, _ = mixing_integral(m, lambda x, omx: x)
    assert val == pytest.approx(m.mean(), abs=1e-9)


def test_mixing_integral_edge_shift():
    # shift folds one 1/(1-beta) into the weight:
    # E[g/(1-beta)] computed stably even though 1/(1-beta) blows up
    m = MixingDensity(1.0, 3.0)  # density 3(1-x)^2
    val, _ = mixing_integral(m, lambda x, omx: np.ones_like(x), edge_shift=1)
    # int 3(1-x)^2/(1-x) = 3/2
    assert val == pytest.approx(1.5, rel=1e-10)
    with pytest.raises(ValueError, match="b > 1"):
        mixing_integral(MixingDensity(1.0, 1.0), lambda x, omx: x,
                        edge_shift=1)


def test_mixing_integral_uses_omx_not_subtraction():
    # integrand referencing omx stays accurate at the upper endpoint
    m = MixingDensity(1.0, 2.0)
    val, _ = mixing_integral(m, lambda x, omx: omx, rtol=1e-12)
    assert val == pytest.approx(2.0 / 3.0, rel=1e-12)
