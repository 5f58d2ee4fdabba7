import numpy as np
import pytest

from robust_inflation.panel import CategoryPanel

_RESULTS = {}


def make_panel(price, expenditure, ids=None, start="2000-01", tags=None):
    price = np.asarray(price, dtype=float)
    expenditure = np.asarray(expenditure, dtype=float)
    if price.ndim == 1:
        price = price[:, None]
        expenditure = expenditure[:, None]
    n, k = price.shape
    ids = ids or [f"cat{i + 1}" for i in range(k)]
    first = np.datetime64(start, "M")
    months = np.arange(first, first + np.timedelta64(n, "M"))
    return CategoryPanel(ids, months, price, expenditure, tags or {})


def random_panel(rng, n_categories, n_months, spread=0.01):
    rel = rng.lognormal(0.002, spread, (n_months, n_categories))
    rel[0] = 1.0
    price = 100 * np.cumprod(rel, axis=0)
    expenditure = rng.uniform(0.0, 10.0, (n_months, n_categories))
    expenditure[:, 0] += 1.0  # keep totals positive
    return make_panel(price, expenditure)


@pytest.fixture
def fixture3():
    """The 3-category cross-section used throughout the examples."""
    rates = {"cat1": 1.001, "cat2": 1.002, "cat3": 1.010}
    weights = {"cat1": 0.2, "cat2": 0.5, "cat3": 0.3}
    return rates, weights


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        prev = _RESULTS.get(key)
        if prev is None or prev[0] == "PASS" or status == "FAIL":
            _RESULTS[key] = (status, marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS):
        status, text = _RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {status}  {text}")
