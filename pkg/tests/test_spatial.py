import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from otto2q import gme, spatial
from otto2q.core import ParameterError
from otto2q.spatial import SpatialConfig, correlation_function


def closed(x, u=0.0):
    return 1.5 * ((1 - u * u) * math.sin(x) / x
                  + (1 - 3 * u * u) * (math.cos(x) / x**2 - math.sin(x) / x**3))


def test_zero_separation():
    for u in (0, 1 / math.sqrt(3), 1):
        assert abs(correlation_function(0.0, u) - 1) < 1e-15


def test_value_at_pi():
    assert correlation_function(math.pi) == pytest.approx(-3 / (2 * math.pi**2), rel=1e-12)


def test_far_field_decays():
    assert abs(correlation_function(1e6)) < 1e-5


@pytest.mark.parametrize("u", [0.0, 1 / math.sqrt(3), -1 / math.sqrt(3), 1.0, -1.0])
def test_series_crossover(u):
    x = spatial.SERIES_CUTOFF
    below = correlation_function(np.nextafter(x, 0), u)
    assert abs(below - correlation_function(x, u)) < 1e-10
    # the textbook form loses ~6 digits to cancellation here
    assert abs(below - closed(x, u)) < 1e-8


@pytest.mark.parametrize("x", [0.1, 0.5, 2.0, 7.3, 40.0])
def test_bessel_branch_matches_textbook_form(x):
    for u in (0.0, 0.4, 1.0):
        assert correlation_function(x, u) == pytest.approx(closed(x, u), abs=1e-12)


@pytest.mark.parametrize("u", [0.0, 1 / math.sqrt(3), -1 / math.sqrt(3), 1.0, -1.0])
def test_bounded(u):
    xs = np.linspace(1e-4, 100, 20001)
    vals = np.array([correlation_function(x, u) for x in xs])
    assert np.max(np.abs(vals)) <= 1.05
    env = 1.5 * (1 / xs + 2 / xs**2 + 1 / xs**3)
    assert np.all(np.abs(vals) <= env + 1e-12)


def test_config_validation():
    with pytest.raises(ParameterError):
        SpatialConfig(-1.0)
    with pytest.raises(ParameterError):
        SpatialConfig(1.0, k0=0.0)
    with pytest.raises(ParameterError):
        SpatialConfig(1.0, mu_dot_r=1.5)


def test_distance_rates_limits(params):
    base = gme.gme_rates(params)
    at0 = spatial.distance_rates(params, SpatialConfig(0.0))
    assert at0.delta_plus == pytest.approx(base.delta_plus, rel=1e-15)
    far = spatial.distance_rates(params, SpatialConfig(1e7))
    assert far.delta_plus == pytest.approx(base.delta_plus / 2, rel=1e-6)


def test_pure_mode_vanishes_at_first_zero(params):
    x0 = spatial.first_zero()
    rates = spatial.distance_rates(params, SpatialConfig(x0), mode="pure")
    assert abs(rates.delta_plus) < 1e-9 and abs(rates.Omega_plus) < 1e-9


def test_plus_only_scaling_keeps_differences(params):
    base = gme.gme_rates(params)
    r = spatial.distance_rates(params, SpatialConfig(2.0), scale_differences=False)
    assert r.delta_minus == base.delta_minus and r.delta_plus < base.delta_plus


@given(st.floats(0, 5e-3))
def test_rates_continuous_across_crossover(x):
    from otto2q.core import EngineParams
    p = EngineParams()
    a = spatial.distance_rates(p, SpatialConfig(x))
    b = spatial.distance_rates(p, SpatialConfig(x + 1e-12))
    assert abs(a.delta_plus - b.delta_plus) < 1e-8
