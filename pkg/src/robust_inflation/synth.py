"""Deterministic synthetic panels for tests and demos.

Generator
---------
* Aggregate trend inflation ``3 + 2.5 sin(2 pi t / 120)`` percent a year sets
  the common monthly log relative ``m_t``.
* Category ``i`` draws a fixed drift ``d_i ~ N(0, 0.001)`` and volatility
  ``s_i = 0.004 * LogNormal(0, 0.5)``; its log relative is
  ``m_t + dispersion * (d_i + s_i * e_it)`` with ``e_it ~ N(0, 1)``.  With
  ``dispersion = 0`` every category follows the same rate path.
* Prices start at 100 and compound the relatives.
* Base expenditure shares are ``Dirichlet(2, ..., 2)``; each month they are
  jittered by ``LogNormal(0, 0.02)`` and renormalized, then scaled by total
  spending ``1000 * exp(0.004 t)``.
* Tags: categories 0, 10, 20, ... are ``food``; 1, 11, 21, ... are
  ``energy``; the largest remaining category is ``owner_occ_housing``.
  Panels with fewer than 3 categories carry no tags.
"""

from __future__ import annotations

import numpy as np

from .panel import CategoryPanel, parse_month


def gen_synthetic(n_categories: int, n_months: int, seed: int, dispersion: float = 1.0,
                  start: str = "1960-01"):
    """Build a synthetic panel.

    Returns
    -------
    panel : CategoryPanel
    tags : dict
        Category id -> frozenset of tags (also attached to ``panel``).
    """
    if n_categories < 1 or n_months < 1:
        raise ValueError("n_categories and n_months must be >= 1")
    rng = np.random.default_rng(int(seed) & (2**64 - 1))
    t = np.arange(n_months)
    annual = 3.0 + 2.5 * np.sin(2 * np.pi * t / 120)
    m = np.log1p(annual / 100) / 12

    drift = rng.normal(0.0, 0.001, n_categories)
    vol = 0.004 * rng.lognormal(0.0, 0.5, n_categories)
    shocks = rng.normal(0.0, 1.0, (n_months, n_categories))
    log_rel = m[:, None] + dispersion * (drift + vol * shocks)
    log_rel[0] = 0.0
    price = 100.0 * np.exp(np.cumsum(log_rel, axis=0))

    base = rng.dirichlet(np.full(n_categories, 2.0))
    shares = base * rng.lognormal(0.0, 0.02, (n_months, n_categories))
    shares /= shares.sum(axis=1, keepdims=True)
    expenditure = 1000.0 * np.exp(0.004 * t)[:, None] * shares

    # round-trip through the CSV precision so files and in-memory panels agree
    price = np.array([[float(f"{x:.10g}") for x in row] for row in price])
    expenditure = np.array([[float(f"{x:.10g}") for x in row] for row in expenditure])

    ids = [f"cat{i + 1:03d}" for i in range(n_categories)]
    tags = {}
    if n_categories >= 3:
        for i, c in enumerate(ids):
            if i % 10 == 0:
                tags[c] = frozenset({"food"})
            elif i % 10 == 1:
                tags[c] = frozenset({"energy"})
        free = [i for i in range(n_categories) if ids[i] not in tags]
        if free:
            big = max(free, key=lambda i: base[i])
            tags[ids[big]] = frozenset({"owner_occ_housing"})

    first = parse_month(start)
    months = np.arange(first, first + np.timedelta64(n_months, "M"), dtype="datetime64[M]")
    return CategoryPanel(ids, months, price, expenditure, tags), tags


def write_tags(tags: dict, fh) -> None:
    fh.write("category_id,tag\n")
    for cat in sorted(tags):
        for tag in sorted(tags[cat]):
            fh.write(f"{cat},{tag}\n")
