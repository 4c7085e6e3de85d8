import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from noma_access.radio import (CoverageOutage, LinkBudget, TwoUserUplink, db_to_linear,
                               estimate_load, linear_to_db, measure_total_power,
                               power_control, shannon_rate)


@pytest.mark.parametrize("db, lin", [(0, 1.0), (10, 10.0), (20, 100.0), (-10, 0.1)])
def test_db_to_linear(db, lin):
    assert db_to_linear(db) == pytest.approx(lin, rel=1e-15)


def test_db_round_trip():
    assert abs(linear_to_db(db_to_linear(7.3)) - 7.3) <= 1e-12


@given(st.floats(-200, 200))
def test_db_round_trip_property(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-9)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_linear_to_db_rejects_non_positive(bad):
    with pytest.raises(ValueError):
        linear_to_db(bad)


def test_db_vectorized():
    np.testing.assert_allclose(db_to_linear(np.array([0.0, 10.0])), [1.0, 10.0])


@pytest.mark.parametrize("w, snr, rate", [(1, 1, 1.0), (1e6, 3, 2e6), (0, 10, 0.0)])
def test_shannon_rate_examples(w, snr, rate):
    assert shannon_rate(w, snr) == pytest.approx(rate)


@pytest.mark.parametrize("w, snr", [(-1, 1), (1, -0.5)])
def test_shannon_rate_rejects_negative(w, snr):
    with pytest.raises(ValueError):
        shannon_rate(w, snr)


def test_shannon_rate_shape():
    snr = np.linspace(0, 50, 501)
    r = shannon_rate(1.0, snr)
    assert np.all(np.diff(r) > 0)
    # concave in snr: second differences are negative
    assert np.all(np.diff(r, 2) < 0)
    # linear in bandwidth
    w = np.linspace(0, 10, 101)
    np.testing.assert_allclose(np.diff(shannon_rate(w, 5.0), 2), 0, atol=1e-12)


def test_two_user_snr():
    link = TwoUserUplink(p1=2.0, p2=1.0, h1=0.5, h2=2.0, noise_power=0.5)
    assert link.snr1 == pytest.approx(1.0)
    assert link.snr2 == pytest.approx(8.0)


@pytest.mark.parametrize("kwargs", [
    dict(p1=0.0, p2=1, h1=1, h2=1, noise_power=1),
    dict(p1=1, p2=1, h1=-1, h2=1, noise_power=1),
    dict(p1=1, p2=1, h1=1, h2=1, noise_power=float("inf")),
])
def test_two_user_invariants(kwargs):
    with pytest.raises(ValueError):
        TwoUserUplink(**kwargs)


@pytest.mark.parametrize("gain, target, expected", [(1.0, 1.0, 1.0), (0.5, 1.0, 2.0)])
def test_power_control(gain, target, expected):
    assert power_control(LinkBudget(gain, 10.0, target)) == expected


def test_power_control_outage():
    link = LinkBudget(channel_gain=1e-9, max_tx_power=1.0, target_rx_power=1.0)
    assert not link.feasible
    with pytest.raises(CoverageOutage):
        power_control(link)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_power_control_hits_target(gain, target):
    link = LinkBudget(gain, max_tx_power=1e20, target_rx_power=target)
    assert power_control(link) * gain == pytest.approx(target, rel=1e-12)


def test_link_budget_validation():
    with pytest.raises(ValueError):
        LinkBudget(0.0, 1.0, 1.0)


def test_estimate_load_examples():
    p, n0 = 3.7, 0.2
    assert estimate_load(10 * p + n0, p, n0) == 10
    assert estimate_load(n0, p, n0) == 0
    # below the noise floor clamps to zero
    assert estimate_load(0.0, p, n0) == 0


@given(st.integers(0, 10_000), st.floats(1e-3, 1e3), st.floats(0, 1e3))
def test_estimate_load_exact_without_noise(n, p, n0):
    assert estimate_load(n * p + n0, p, n0) == n


def test_estimate_load_under_measurement_noise(rng):
    # per-device SNR >= 20 dB; the estimate stays within one device
    noise = 1.0
    for snr_db in (20.0, 25.0, 30.0):
        p = db_to_linear(snr_db) * noise
        n = rng.integers(0, 200, size=20_000)
        observed = measure_total_power(n, p, noise, rng)
        est = np.array([estimate_load(o, p, noise) for o in observed])
        assert np.all(np.abs(est - n) <= 1)


def test_measurement_noise_spread(rng):
    obs = measure_total_power(np.zeros(200_000), 1.0, 2.0, rng, tw_product=400)
    assert obs.mean() == pytest.approx(2.0, abs=3 * 0.1 / math.sqrt(200_000))
    assert obs.std() == pytest.approx(2.0 / 20, rel=0.02)
