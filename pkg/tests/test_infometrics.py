import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from otto2q import core, gme, infometrics as im
from otto2q.core import EngineParams, ParameterError

from conftest import random_density


def random_x_state(rng):
    a, b, c, d = rng.dirichlet(np.ones(4))
    z14 = rng.uniform(0, math.sqrt(a * d)) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    z23 = rng.uniform(0, math.sqrt(b * c)) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    rho = np.diag([a, b, c, d]).astype(complex)
    rho[0, 3], rho[3, 0] = z14, np.conj(z14)
    rho[1, 2], rho[2, 1] = z23, np.conj(z23)
    return rho


def test_l1_coherence():
    assert im.l1_coherence(np.diag([0.5, 0.5, 0, 0])) == 0
    assert im.l1_coherence(core.initial_state_phi(0.5)) == pytest.approx(1.0)
    assert im.l1_coherence(core.initial_state_phi(0.3)) == pytest.approx(2 * math.sqrt(0.21))


def test_coherence_closed_form(params):
    rates = gme.gme_rates(params)
    assert im.coherence_closed_form(0.0, 3.0, rates) == 0
    assert im.coherence_closed_form(1.0, 0.0, rates) == 0
    assert im.coherence_closed_form(0.5, 0.0, rates) == 1.0
    ps = np.linspace(0, 1, 101)
    assert ps[np.argmax([im.coherence_closed_form(p, 0.01, rates) for p in ps])] == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        im.coherence_closed_form(1.2, 0.0, rates)


def test_entropy_values():
    assert im.von_neumann_entropy(np.diag([1.0, 0.0])) == 0
    assert im.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)
    assert im.von_neumann_entropy(np.diag([0.3, 0.7])) == pytest.approx(0.8812908992306927, abs=1e-14)


def test_entropy_invariant_under_local_unitary(rng):
    from scipy.stats import unitary_group
    for _ in range(5):
        rho = random_density(rng)
        u = np.kron(unitary_group.rvs(2, random_state=rng), np.eye(2))  # acts on B
        rotated = u @ rho @ u.conj().T
        for keep in ("A",):
            a = im.von_neumann_entropy(core.partial_trace(rho, keep))
            b = im.von_neumann_entropy(core.partial_trace(rotated, keep))
            assert abs(a - b) < 1e-10


@given(st.floats(0, 1))
def test_pure_state_schmidt_symmetry(p):
    rho = core.initial_state_phi(p)
    sa = im.von_neumann_entropy(core.partial_trace(rho, "A"))
    sb = im.von_neumann_entropy(core.partial_trace(rho, "B"))
    assert abs(sa - sb) < 1e-12 and 0 <= sa <= 1


def test_concurrence_basic():
    assert im.concurrence_xstate(core.initial_state_phi(0.5)) == 1.0
    assert im.concurrence_general(core.initial_state_phi(0.5)) == pytest.approx(1.0, abs=1e-12)
    prod = core.product_state(np.diag([0.2, 0.8]), np.diag([0.6, 0.4]))
    assert im.concurrence_xstate(prod) == 0.0
    assert im.concurrence_general(prod) == 0.0
    assert im.concurrence_xstate(core.initial_state_phi(0.3)) == pytest.approx(0.916515138991168, abs=1e-14)


def test_concurrence_x_shape_check(rng):
    with pytest.raises(ParameterError):
        im.concurrence_xstate(random_density(rng))


def test_concurrence_oracle_agreement(rng):
    for _ in range(300):
        rho = random_x_state(rng)
        assert abs(im.concurrence_xstate(rho) - im.concurrence_general(rho)) < 1e-9


@pytest.mark.parametrize("v", [0.0, 0.2, 1 / 3, 0.5, 0.9, 1.0])
def test_werner_threshold(v):
    bell = np.zeros(4)
    bell[1] = bell[2] = 1 / math.sqrt(2)
    rho = v * np.outer(bell, bell) + (1 - v) * np.eye(4) / 4
    assert im.concurrence_general(rho) == pytest.approx(max(0.0, (3 * v - 1) / 2), abs=1e-9)


def test_subsystem_entropies_report(params):
    ts = np.linspace(0, 0.2, 11)
    states = im.propagate_series(params.with_(p=0.5), ts)
    rep = im.subsystem_entropies(states, ts, 0.5, gme.gme_rates(params, absorption=False))
    assert rep.S_A.values[0] == pytest.approx(1.0) and rep.S_B.values[0] == pytest.approx(1.0)
    assert rep.deviation_A.shape == ts.shape and math.isfinite(rep.max_deviation)
    rep1 = im.subsystem_entropies(im.propagate_series(params, ts[:1]), ts[:1])
    assert rep1.S_A.values[0] == 0 and np.isnan(rep1.printed_A[0])


def test_propagate_series_nonuniform_grid(params):
    a = im.propagate_series(params, [0.0, 0.01, 0.03])
    b = im.propagate_series(params, [0.0, 0.03])
    assert np.allclose(a[-1], b[-1], atol=1e-12)


def test_metric_series_tag():
    with pytest.raises(ParameterError):
        im.MetricSeries(np.zeros(1), np.zeros(1), "purity")


def test_temperature_ratio_study(params):
    study = im.metrics_vs_temperature_ratio(params.with_(p=0.5), np.linspace(0.1, 0.9, 5))
    assert study.coherence.values.shape == (5,)
    assert "normalized_slope" in study.coherence.stats
    with pytest.raises(ParameterError):
        im.metrics_vs_temperature_ratio(params, [1.2])
