import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robust_inflation import errors
from robust_inflation.indices import (
    CrossSection, TrimSpec, annualize, chain_12m, cross_sections, fisher, laspeyres, paasche,
    series, trimmed_monthly, weighted_median_monthly, weighted_percentile,
)
from robust_inflation.panel import MonthlyRateSeries

from conftest import make_panel, random_panel
from oracles import trimmed_oracle


def two_month(p_prev, p_cur, q_prev, q_cur):
    p_prev, p_cur = np.asarray(p_prev, float), np.asarray(p_cur, float)
    return make_panel([p_prev, p_cur], [p_prev * np.asarray(q_prev), p_cur * np.asarray(q_cur)])


# --- TrimSpec ----------------------------------------------------------------

def test_trimspec_parse_and_validate():
    assert TrimSpec.parse("24,31") == TrimSpec(24, 31)
    assert TrimSpec(50, 50).is_median
    assert TrimSpec(24, 31).lower == 0.24 and TrimSpec(24, 31).upper == pytest.approx(0.69)
    for bad in ((-1, 0), (0, 51), (1.5, 2)):
        with pytest.raises(errors.ConfigError):
            TrimSpec(*bad)
    with pytest.raises(errors.ConfigError):
        TrimSpec.parse("24")


# --- aggregate indices ----------------------------------------------------------

def test_single_category_indices():
    panel = make_panel([1.0, 1.1], [1.0, 1.0])
    for f in (laspeyres, paasche, fisher):
        assert f(panel, "2000-02") == pytest.approx(1.1, abs=1e-15)


def test_laspeyres_paasche_fisher_examples():
    panel = two_month([1, 1], [1.1, 1.0], [1, 1], [0.9, 1.1])
    lp = laspeyres(panel, "2000-02")
    pp = paasche(panel, "2000-02")
    assert lp == pytest.approx(1.05, abs=1e-15)
    assert pp == pytest.approx(1.045, abs=1e-15)
    assert fisher(panel, "2000-02") == pytest.approx(1.047497, abs=5e-7)


def test_constant_prices_indices():
    panel = two_month([3, 4], [3, 4], [1, 2], [5, 1])
    for f in (laspeyres, paasche, fisher):
        assert f(panel, "2000-02") == 1.0


def test_index_errors():
    panel = two_month([1, 1], [1, np.nan], [1, 1], [1, 1])
    with pytest.raises(errors.NoPredecessor):
        fisher(panel, "2000-01")
    with pytest.raises(errors.MissingCell):
        fisher(panel, "2000-02")


# --- cross-section statistics ------------------------------------------------------

@pytest.mark.parametrize("trim, expected", [((20, 30), 1.002), ((10, 0), 1.0045556), ((0, 0), 1.0042)])
def test_trimmed_examples(fixture3, trim, expected):
    rates, weights = fixture3
    assert trimmed_monthly(rates, weights, TrimSpec(*trim)) == pytest.approx(expected, abs=5e-8)


def test_trimmed_accepts_weight_vector_and_batch(fixture3):
    rates, weights = fixture3
    trims = [TrimSpec(20, 30), TrimSpec(0, 0), TrimSpec(50, 50)]
    out = trimmed_monthly(rates, weights, trims)
    assert out.shape == (3,)
    assert out[2] == 1.002


def test_median_examples(fixture3):
    assert weighted_median_monthly(*fixture3) == (1.002, "cat2")
    assert weighted_median_monthly({"x": 1.3}, {"x": 1.0}) == (1.3, "x")
    # boundary at exactly one half goes to the upper category
    assert weighted_median_monthly({"cat1": 1.0, "cat2": 1.1}, {"cat1": 0.5, "cat2": 0.5}) == (1.1, "cat2")


def test_median_skips_zero_weight_top():
    rates = {"a": 1.0, "b": 1.1, "c": 1.5}
    weights = {"a": 0.5, "b": 0.5, "c": 0.0}
    assert weighted_median_monthly(rates, weights) == (1.1, "b")


def test_percentile_examples(fixture3):
    assert weighted_percentile(*fixture3, 0.9) == 1.010
    assert weighted_percentile(*fixture3, 0.05) == 1.001
    assert weighted_percentile(*fixture3, 0.5) == weighted_median_monthly(*fixture3)[0]
    for p in (0.0, 1.0, -0.1):
        with pytest.raises(errors.PercentileOutOfRange):
            weighted_percentile(*fixture3, p)


def test_empty_cross_section():
    with pytest.raises(errors.EmptyCrossSection):
        trimmed_monthly({}, {}, TrimSpec(0, 0))
    with pytest.raises(errors.EmptyCrossSection):
        CrossSection(["a"], [1.0], [0.0])


def test_ties_broken_by_id():
    xs = CrossSection(["b", "a"], [1.0, 1.0], [0.5, 0.5])
    assert list(xs.ids) == ["a", "b"]
    assert xs.median() == (1.0, "b")


cross_section = st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0.9, 1.1), min_size=n, max_size=n),
    st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda w: sum(w) > 1e-3),
))


@settings(max_examples=200, deadline=None)
@given(cross_section, st.integers(0, 50), st.integers(0, 50))
def test_trimmed_matches_oracle(xs, alpha, beta):
    rates, weights = xs
    ids = [f"c{i}" for i in range(len(rates))]
    got = trimmed_monthly(dict(zip(ids, rates)), dict(zip(ids, weights)), TrimSpec(alpha, beta))
    assert abs(got - trimmed_oracle(ids, rates, weights, alpha, beta)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(cross_section, st.randoms(use_true_random=False), st.integers(0, 50), st.integers(0, 50))
def test_permutation_invariance(xs, rnd, alpha, beta):
    rates, weights = xs
    ids = [f"c{i}" for i in range(len(rates))]
    order = list(range(len(ids)))
    rnd.shuffle(order)
    a = CrossSection(ids, rates, weights).trimmed(TrimSpec(alpha, beta))
    b = CrossSection([ids[k] for k in order], [rates[k] for k in order],
                     [weights[k] for k in order]).trimmed(TrimSpec(alpha, beta))
    assert a == b


@settings(max_examples=100, deadline=None)
@given(cross_section, st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_percentile_monotone(xs, p, q):
    rates, weights = xs
    ids = [f"c{i}" for i in range(len(rates))]
    r, w = dict(zip(ids, rates)), dict(zip(ids, weights))
    lo, hi = sorted((p, q))
    assert weighted_percentile(r, w, lo) <= weighted_percentile(r, w, hi)


@settings(max_examples=50, deadline=None)
@given(cross_section)
def test_trimmed_grid_matches_scalar(xs):
    rates, weights = xs
    cs = CrossSection([f"c{i}" for i in range(len(rates))], rates, weights)
    lower = np.arange(51) / 100
    upper = 1 - np.arange(51) / 100
    grid = cs.trimmed_grid(lower, upper)
    for a in range(0, 51, 5):
        for b in range(0, 51, 5):
            assert abs(grid[a, b] - cs.trimmed(TrimSpec(a, b))) <= 1e-12


# --- chaining --------------------------------------------------------------------

def _monthly(values):
    first = np.datetime64("2000-01", "M")
    return MonthlyRateSeries(np.arange(first, first + np.timedelta64(len(values), "M")), values)


def test_chain_constant_and_identity():
    out = chain_12m(_monthly([1.0] * 15))
    assert len(out) == 4 and np.all(out.values == 0.0)
    assert out.months[0] == np.datetime64("2000-12")


def test_chain_step_example():
    out = chain_12m(_monthly([1.001] * 12 + [1.002] * 12))
    assert out.values[0] == pytest.approx(1.2066, abs=5e-5)
    assert out.values[-1] == pytest.approx(2.4266, abs=5e-5)
    assert np.all(np.diff(out.values) > 0)


def test_chain_errors():
    with pytest.raises(errors.InsufficientHistory):
        chain_12m(_monthly([1.0] * 11))
    with pytest.raises(errors.MissingCell):
        chain_12m(_monthly([1.0] * 5 + [np.nan] + [1.0] * 10))


def test_annualize():
    assert annualize(1.0) == 0.0
    assert annualize(1.01) == pytest.approx((1.01 ** 12 - 1) * 100)


# --- pipelines ---------------------------------------------------------------------

def test_series_nesting():
    rng = np.random.default_rng(3)
    panel = random_panel(rng, 7, 30)
    sections = cross_sections(panel)
    trimmed0 = series(panel, "trimmed", TrimSpec(0, 0), sections=sections)
    mean = chain_12m(_monthly([xs.mean() for xs in sections]))
    np.testing.assert_allclose(trimmed0.values, mean.values, rtol=0, atol=1e-10)
    med = series(panel, "median", sections=sections)
    trimmed50 = series(panel, "trimmed", TrimSpec(50, 50), sections=sections)
    np.testing.assert_array_equal(med.values, trimmed50.values)
    assert trimmed0.months[0] == panel.months[12]


def test_headline_single_category():
    price = 100 * np.cumprod(np.linspace(1.0, 1.01, 24))
    panel = make_panel(price, np.ones(24))
    out = series(panel, "headline")
    rel = price[1:] / price[:-1]
    expected = [(np.prod(rel[t - 11:t + 1]) - 1) * 100 for t in range(11, len(rel))]
    np.testing.assert_allclose(out.values, expected, rtol=1e-12)


def test_core_and_percentile():
    panel = make_panel(np.column_stack([np.linspace(1, 2, 14), np.ones(14), np.linspace(1, 1.2, 14)]),
                       np.ones((14, 3)), tags={"cat1": {"energy"}, "cat2": {"food"}})
    core = series(panel, "core")
    single = series(panel.subset(["cat3"]), "headline")
    np.testing.assert_allclose(core.values, single.values, rtol=1e-13)
    pct = series(panel, "percentile", p=0.9)
    assert pct.label == "percentile(0.9)"
    with pytest.raises(errors.PercentileOutOfRange):
        series(panel, "percentile")
    with pytest.raises(errors.ConfigError):
        series(panel, "bogus")
    with pytest.raises(errors.UnknownTag):
        series(make_panel(np.ones((14, 1)), np.ones((14, 1))), "core")


def test_series_drops_missing_cells():
    price = np.ones((14, 2))
    price[:, 1] = np.linspace(1, 1.3, 14)
    price[5, 1] = np.nan
    panel = make_panel(price, np.ones((14, 2)))
    xs = cross_sections(panel)
    assert len(xs[4]) == 1 and len(xs[5]) == 1 and len(xs[6]) == 2
