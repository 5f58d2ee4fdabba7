import math

import numpy as np
import pytest

from robust_inflation import errors
from robust_inflation.gridsearch import (
    GridBounds, avg_rate_range_by_trim, best_trim, chained_grid, equivalence_set,
    inclusion_stats, official_comparison, percentile_span, prediction_range, sweep, top_k,
)
from robust_inflation.indices import CrossSection, TrimSpec, cross_sections, series
from robust_inflation.stats import FULL_SAMPLE, SampleSpec
from robust_inflation.trends import TrendSeries, TrendSpec, centered_ma

from conftest import make_panel, random_panel
from oracles import trimmed_oracle_many

TRIMS = [(a, b) for a in range(51) for b in range(51)]


def oracle_sweep(panel, target):
    """RMSE per trim from per-month oracle trimmed means, chained by hand."""
    monthly = []
    for i in range(1, panel.n_months):
        p0, p1 = panel.price[i - 1].tolist(), panel.price[i].tolist()
        e0, e1 = panel.expenditure[i - 1].tolist(), panel.expenditure[i].tolist()
        w = [0.5 * e0[k] / sum(e0) + 0.5 * (p0[k] * e1[k] / p1[k]) / sum(e1) for k in range(len(p0))]
        monthly.append(trimmed_oracle_many(panel.categories, [b / a for a, b in zip(p0, p1)], w, TRIMS))
    months = panel.months[12:]
    tgt = dict(zip(target.months.tolist(), target.values.tolist()))
    out = {}
    for c, trim in enumerate(TRIMS):
        sq = []
        for t in range(11, len(monthly)):
            prod = 1.0
            for s in range(t - 11, t + 1):
                prod *= monthly[s][c]
            m = months[t - 11].tolist()
            if m in tgt:
                sq.append(((prod - 1) * 100 - tgt[m]) ** 2)
        out[trim] = math.sqrt(math.fsum(sq) / len(sq))
    return out


@pytest.fixture(scope="module")
def small():
    rng = np.random.default_rng(11)
    panel = random_panel(rng, 3, 40, spread=0.01)
    target = centered_ma(series(panel, "headline"), 5)
    return panel, target, sweep(panel, target, FULL_SAMPLE)


@pytest.fixture(scope="module")
def medium():
    rng = np.random.default_rng(5)
    panel = random_panel(rng, 12, 80, spread=0.02)
    target = centered_ma(series(panel, "headline"), 12)
    chained = chained_grid(panel)
    return panel, target, chained, sweep(panel, target, FULL_SAMPLE, chained=chained)


def test_grid_cardinality(small):
    _, _, grid = small
    assert grid.rmse.shape == (51, 51) and grid.size == 2601
    assert grid.errors.shape == (len(grid.months), 51, 51)


def test_sweep_matches_oracle(small):
    panel, target, grid = small
    ref = oracle_sweep(panel, target)
    worst = max(abs(grid.cell(TrimSpec(*t))[0] - v) for t, v in ref.items())
    assert worst <= 1e-9


def test_top50_matches_oracle_ranking(small):
    panel, target, grid = small
    ref = oracle_sweep(panel, target)
    top = top_k(grid, 50)
    ranked = sorted(TRIMS, key=lambda t: (ref[t], t[0] + t[1], t[0]))
    cutoff = ref[ranked[49]]
    assert all(ref[(t.alpha, t.beta)] <= cutoff + 1e-9 for t in top)
    impl_sorted = [grid.cell(t)[0] for t in top]
    assert np.allclose(impl_sorted, [ref[t] for t in ranked[:50]], rtol=0, atol=1e-9)


def test_identical_rates_panel():
    price = np.outer(np.cumprod(np.full(30, 1.003)), np.ones(4))
    panel = make_panel(price, np.random.default_rng(0).uniform(1, 5, (30, 4)))
    target = centered_ma(series(panel, "headline"), 3)
    grid = sweep(panel, target, FULL_SAMPLE)
    assert np.all(grid.rmse == grid.rmse[0, 0])
    assert best_trim(grid)[0] == TrimSpec(0, 0)
    assert len(equivalence_set(grid)) == 2601
    spans = avg_rate_range_by_trim(panel, FULL_SAMPLE)
    assert set(spans.values()) == {0.0}


def test_best_is_minimum(medium):
    _, _, _, grid = medium
    best, r = best_trim(grid)
    assert r == grid.rmse.min()
    assert grid.cell(best)[0] == r


def test_tie_break_rule():
    rng = np.random.default_rng(2)
    panel = random_panel(rng, 3, 30)
    target = centered_ma(series(panel, "headline"), 3)
    grid = sweep(panel, target, FULL_SAMPLE)
    flat = grid.rmse.ravel()
    best, r = best_trim(grid)
    ties = [t for t, v in zip(grid.trims(), flat) if v == r]
    assert best == min(ties, key=lambda t: (t.alpha + t.beta, t.alpha))


def test_top_k(medium):
    _, _, _, grid = medium
    assert list(top_k(grid, 1)) == [best_trim(grid)[0]]
    assert set(top_k(grid, 2601)) == set(grid.trims())
    prev = set()
    for k in (1, 10, 50, 2601):
        cur = set(top_k(grid, k))
        assert prev <= cur and len(cur) == k
        prev = cur
    with pytest.raises(errors.KTooLarge):
        top_k(grid, 2602)


def test_equivalence_monotone(medium):
    _, _, _, grid = medium
    best = best_trim(grid)[0]
    sizes = []
    for level in (0.2, 0.1, 0.05, 0.01, 0.001):
        s = equivalence_set(grid, level)
        assert best in s and s.members[0] == best
        sizes.append(set(s))
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))


def test_equivalence_bandwidth_capped():
    rng = np.random.default_rng(4)
    panel = random_panel(rng, 5, 30)
    target = centered_ma(series(panel, "headline"), 3)
    grid = sweep(panel, target, SampleSpec.parse("2001-03:2001-08"))
    assert len(grid.months) == 6
    assert grid.effective_bandwidth(35) == 5
    assert best_trim(grid)[0] in equivalence_set(grid, 0.05, bandwidth=35)


def test_workers_identical(medium):
    panel, _, chained, _ = medium
    again = chained_grid(panel, workers=3)
    assert chained.values.tobytes() == again.values.tobytes()


def test_chained_grid_matches_series(medium):
    panel, _, chained, _ = medium
    sections = cross_sections(panel)
    for trim in (TrimSpec(0, 0), TrimSpec(24, 31), TrimSpec(50, 50), TrimSpec(7, 43)):
        direct = series(panel, "trimmed", trim, sections=sections)
        np.testing.assert_allclose(chained.series(trim), direct.values, rtol=0, atol=1e-10)


def test_bounds_subset(medium):
    panel, target, _, _ = medium
    bounds = GridBounds(20, 30, 20, 40)
    grid = sweep(panel, target, FULL_SAMPLE, bounds)
    assert grid.rmse.shape == (11, 21)
    assert TrimSpec(0, 0) not in grid
    with pytest.raises(errors.ConfigError):
        GridBounds(30, 20, 0, 50)


def test_official_comparison(medium):
    _, _, _, grid = medium
    out = official_comparison(grid)
    assert out["best_rmse"] <= out["official_rmse"]
    assert out["official"] in (TrimSpec(24, 31), TrimSpec(50, 50))
    assert 0 <= out["dm"].p_value <= 1


def test_prediction_range(medium):
    panel, _, chained, grid = medium
    single = prediction_range(chained, top_k(grid, 1), FULL_SAMPLE)
    assert np.all(single.low == single.high) and single.average == 0.0
    pr = prediction_range(chained, top_k(grid, 50), FULL_SAMPLE)
    assert np.all(pr.low <= pr.high)
    from_panel = prediction_range(panel, top_k(grid, 50), FULL_SAMPLE)
    np.testing.assert_allclose(from_panel.high, pr.high, rtol=0, atol=1e-12)
    with pytest.raises(errors.EmptyOverlap):
        prediction_range(chained, top_k(grid, 1), SampleSpec.parse("1900-1901"))


def test_rate_range(fixture3, medium):
    rates, weights = fixture3
    xs = CrossSection.from_mappings(rates, weights)
    assert percentile_span(xs, TrimSpec(10, 10)) == pytest.approx(0.009, abs=1e-15)
    assert percentile_span(xs, TrimSpec(50, 50)) == 0.0
    panel = medium[0]
    spans = avg_rate_range_by_trim(panel, FULL_SAMPLE)
    assert spans[TrimSpec(50, 50)] == 0.0
    assert spans[TrimSpec(0, 0)] >= spans[TrimSpec(10, 10)] >= spans[TrimSpec(40, 40)] >= 0


def test_inclusion(fixture3):
    rates, weights = fixture3
    xs = CrossSection.from_mappings(rates, weights, month=np.datetime64("2000-02", "M"))
    stats = inclusion_stats([xs], TrimSpec(20, 30), FULL_SAMPLE)
    assert (stats["cat1"].excl_low_frac, stats["cat1"].included_frac) == (1.0, 0.0)
    assert stats["cat2"].included_frac == 1.0
    assert (stats["cat3"].excl_high_frac, stats["cat3"].included_frac) == (1.0, 0.0)
    stats = inclusion_stats([xs], TrimSpec(50, 50), FULL_SAMPLE)
    assert [stats[c].included_frac for c in ("cat1", "cat2", "cat3")] == [0.0, 1.0, 0.0]


def test_inclusion_full_and_single(medium):
    panel = medium[0]
    stats = inclusion_stats(panel, TrimSpec(0, 0), FULL_SAMPLE)
    assert all(s.included_frac == 1.0 for s in stats.values())
    solo = panel.subset([panel.categories[0]])
    for trim in (TrimSpec(0, 0), TrimSpec(24, 31), TrimSpec(50, 50)):
        assert inclusion_stats(solo, trim, FULL_SAMPLE)[panel.categories[0]].included_frac == 1.0


def test_inclusion_fractions_sum(medium):
    panel = medium[0]
    stats = inclusion_stats(panel, TrimSpec(24, 31), FULL_SAMPLE)
    for s in stats.values():
        assert s.included_frac + s.excl_low_frac + s.excl_high_frac == pytest.approx(1.0)


def test_sweep_empty_overlap(small):
    panel, target, _ = small
    with pytest.raises(errors.EmptyOverlap):
        sweep(panel, target, SampleSpec.parse("1900-1901"))
    short = TrendSeries(target.months[:0], target.values[:0], TrendSpec("centered"))
    with pytest.raises(errors.EmptyOverlap):
        sweep(panel, short, FULL_SAMPLE)
