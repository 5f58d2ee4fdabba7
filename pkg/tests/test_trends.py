import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robust_inflation import errors
from robust_inflation.indices import InflationSeries
from robust_inflation.trends import (
    BANDPASS, CURRENT, FORWARD, FUTURE, TrendSpec, centered_ma, cf_lowpass, cf_lowpass_weights,
    forward_ma, trend,
)

from oracles import ideal_lowpass_fft, sinusoid_gain, windowed_mean


def infl(values, start="1960-01"):
    first = np.datetime64(start, "M")
    return InflationSeries(np.arange(first, first + np.timedelta64(len(values), "M")), values, "headline")


def as_dict(tr, headline):
    idx = ((tr.months - headline.months[0]).astype(int)).tolist()
    return dict(zip(idx, tr.values.tolist()))


def test_presets():
    assert (CURRENT.kind, CURRENT.window, CURRENT.name) == ("centered", 36, "current")
    assert (FUTURE.lead, FUTURE.window) == (12, 12)
    assert (FORWARD.lead, FORWARD.window) == (0, 24)
    assert BANDPASS.cutoff_period == 39
    assert [s.default_bandwidth for s in (CURRENT, FUTURE, FORWARD, BANDPASS)] == [35, 11, 23, 38]


def test_spec_from_dict():
    assert TrendSpec.from_dict({"preset": "future"}) == FUTURE
    spec = TrendSpec.from_dict({"kind": "bandpass", "cutoff_period": 29})
    assert spec.cutoff_period == 29 and spec.default_bandwidth == 28
    assert TrendSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(errors.ConfigError):
        TrendSpec("weekly")
    with pytest.raises(errors.ConfigError):
        TrendSpec.from_dict({})


def test_centered_constant_and_alignment():
    h = infl(np.full(100, 2.5))
    tr = centered_ma(h, 36)
    assert np.all(tr.values == 2.5)
    # window t-18 .. t+17 is defined from index 18 through n-18
    assert tr.months[0] == h.months[18] and tr.months[-1] == h.months[100 - 18]


def test_centered_linear_odd_window():
    t = np.arange(60.0)
    h = infl(1.0 + 0.3 * t)
    tr = centered_ma(h, 7)
    for k, v in as_dict(tr, h).items():
        assert v == pytest.approx(1.0 + 0.3 * k, abs=1e-12)


def test_centered_spike():
    x = np.zeros(120)
    x[60] = 12.0
    h = infl(x)
    for k, v in as_dict(centered_ma(h, 36), h).items():
        covers = k - 18 <= 60 <= k + 17
        assert v == pytest.approx(12 / 36 if covers else 0.0, abs=1e-15)


def test_forward_examples():
    h = infl(np.arange(1.0, 41.0))
    d = as_dict(forward_ma(h, 1, 2), h)
    assert all(v == pytest.approx(h.values[k] + 2.5, abs=1e-12) for k, v in d.items())
    d = as_dict(forward_ma(h, 0, 1), h)
    assert all(v == h.values[k + 1] for k, v in d.items())
    assert np.all(forward_ma(infl(np.full(40, 4.0)), 12, 12).values == 4.0)


def test_future_window_months():
    x = np.zeros(60)
    x[30] = 12.0
    h = infl(x)
    d = as_dict(trend(h, FUTURE), h)
    for k, v in d.items():
        assert v == pytest.approx(1.0 if k + 13 <= 30 <= k + 24 else 0.0)


def test_window_too_large():
    with pytest.raises(errors.WindowTooLarge):
        centered_ma(infl(np.ones(10)), 36)
    with pytest.raises(errors.WindowTooLarge):
        forward_ma(infl(np.ones(20)), 12, 12)


@pytest.mark.parametrize("window", [1, 2, 7, 36])
def test_centered_matches_bruteforce(window):
    x = np.random.default_rng(window).normal(3, 2, 300)
    h = infl(x)
    got = as_dict(centered_ma(h, window), h)
    ref = windowed_mean(x.tolist(), -(window // 2), window)
    assert got.keys() == ref.keys()
    assert max(abs(got[k] - ref[k]) for k in ref) <= 1e-12


def test_cf_weights_rows_sum_to_one():
    for n in (40, 41, 100, 500):
        W = cf_lowpass_weights(n, 39)
        assert np.max(np.abs(W.sum(axis=1) - 1.0)) <= 1e-12


def test_cf_constant_and_short():
    h = infl(np.full(200, 3.3))
    assert np.max(np.abs(cf_lowpass(h).values - 3.3)) <= 1e-10
    with pytest.raises(errors.SeriesTooShort):
        cf_lowpass(infl(np.ones(39)), 39)


def test_cf_keeps_linear_drift():
    t = np.arange(240.0)
    h = infl(2 + 0.01 * t)
    assert np.max(np.abs(cf_lowpass(h).values - h.values)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.floats(0.1, 5))
def test_cf_affine_equivariance(seed, shift, scale):
    x = np.random.default_rng(seed).normal(3, 2, 120)
    a = cf_lowpass(infl(x)).values
    b = cf_lowpass(infl(scale * x + shift)).values
    np.testing.assert_allclose(b, scale * a + shift, atol=1e-9)


@pytest.mark.parametrize("period, lo, hi", [(120, 0.9, 1.1), (12, 0.0, 0.1)])
def test_cf_gain_vs_ideal(period, lo, hi):
    n = 1200
    t = np.arange(n, dtype=float)
    x = np.sin(2 * np.pi * t / period)
    mid = slice(n // 4, 3 * n // 4)
    ideal = sinusoid_gain(ideal_lowpass_fft(x, 39)[mid], period, t[mid])
    got = sinusoid_gain(cf_lowpass(infl(x)).values[mid], period, t[mid])
    assert lo <= ideal <= hi
    assert lo <= got <= hi
