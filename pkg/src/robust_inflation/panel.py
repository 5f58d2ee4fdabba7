"""Category panel: ingestion, validation, monthly relatives and trim weights.

The panel is a dense ``months x categories`` grid of price indices and nominal
expenditures.  Missing cells are stored as NaN.  Months are numpy
``datetime64[M]`` values and must be contiguous.

Quantities never appear in the input.  Wherever a formula needs ``p * q`` the
nominal expenditure is used directly, and ``q = expenditure / price`` is
recovered cell-wise when a quantity is genuinely needed.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    AllCategoriesExcluded,
    EmptyActiveSet,
    InsufficientHistory,
    MalformedRow,
    DuplicateCell,
    MissingCell,
    NoPredecessor,
    NonContiguousMonths,
    NonPositivePrice,
    UnknownCategory,
    UnknownTag,
)

logger = logging.getLogger(__name__)

PANEL_HEADER = ("date", "category_id", "price_index", "nominal_expenditure")
TAGS_HEADER = ("category_id", "tag")

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(text: str) -> np.datetime64:
    """Parse an ISO ``YYYY-MM`` string into a ``datetime64[M]``."""
    m = _MONTH_RE.match(text.strip())
    if m is None or not 1 <= int(m.group(2)) <= 12:
        raise ValueError(f"bad month {text!r}, expected YYYY-MM")
    return np.datetime64(text.strip(), "M")


def format_month(month) -> str:
    return str(np.datetime64(month, "M"))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CategoryPanel:
    """Monthly panel of category price indices and nominal expenditures.

    Attributes
    ----------
    categories : tuple of str
        Category identifiers, sorted.
    months : ndarray of datetime64[M]
        Contiguous ascending months.
    price : ndarray, shape (n_months, n_categories)
        Price indices; NaN marks a missing cell.
    expenditure : ndarray, shape (n_months, n_categories)
        Nominal expenditures; NaN marks a missing cell.
    tags : dict
        Category id -> frozenset of tag strings.
    """

    categories: tuple
    months: np.ndarray
    price: np.ndarray
    expenditure: np.ndarray
    tags: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        months = np.asarray(self.months, dtype="datetime64[M]").copy()
        months.flags.writeable = False
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "price", _frozen(self.price))
        object.__setattr__(self, "expenditure", _frozen(self.expenditure))
        tags = {c: frozenset(self.tags.get(c, ())) for c in self.categories}
        object.__setattr__(self, "tags", tags)

        shape = (len(months), len(self.categories))
        if self.price.shape != shape or self.expenditure.shape != shape:
            raise ValueError(f"price/expenditure must have shape {shape}")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("duplicate category ids")
        if len(months) > 1 and np.any(np.diff(months).astype(int) != 1):
            raise NonContiguousMonths("months are not contiguous")
        p = self.price[np.isfinite(self.price)]
        if np.any(p <= 0):
            raise NonPositivePrice("prices must be strictly positive")
        e = self.expenditure[np.isfinite(self.expenditure)]
        if np.any(e < 0):
            raise MalformedRow("expenditures must be nonnegative")

    @property
    def n_months(self) -> int:
        return len(self.months)

    @property
    def tag_vocabulary(self) -> frozenset:
        return frozenset().union(*self.tags.values()) if self.tags else frozenset()

    def category_index(self, category: str) -> int:
        try:
            return self.categories.index(category)
        except ValueError:
            raise UnknownCategory(f"unknown category {category!r}") from None

    def month_index(self, month) -> int:
        month = np.datetime64(month, "M")
        i = int((month - self.months[0]).astype(int)) if self.n_months else -1
        if not 0 <= i < self.n_months:
            raise InsufficientHistory(f"month {format_month(month)} outside panel")
        return i

    def subset(self, categories: Iterable[str]) -> "CategoryPanel":
        """Panel restricted to ``categories`` (original order kept)."""
        keep = set(categories)
        idx = [i for i, c in enumerate(self.categories) if c in keep]
        return CategoryPanel(
            categories=[self.categories[i] for i in idx],
            months=self.months,
            price=self.price[:, idx],
            expenditure=self.expenditure[:, idx],
            tags={self.categories[i]: self.tags[self.categories[i]] for i in idx},
        )


@dataclass(frozen=True)
class MonthlyRateSeries:
    """Gross monthly price relatives on a contiguous month range.

    ``values[k]`` is the relative for ``months[k]``; NaN marks a missing rate.
    """

    months: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "months", np.asarray(self.months, dtype="datetime64[M]"))
        object.__setattr__(self, "values", _frozen(self.values))
        v = self.values[np.isfinite(self.values)]
        if np.any(v <= 0):
            raise ValueError("price relatives must be strictly positive")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class WeightVector:
    """Trim weights for one month.

    ``weights`` are normalized over the active set; ``raw`` holds the weights
    exactly as the two-term expenditure formula produces them.
    """

    month: np.datetime64
    weights: dict
    raw: dict = field(default_factory=dict)

    def __getitem__(self, category):
        return self.weights[category]

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def items(self):
        return self.weights.items()


# --- ingestion -------------------------------------------------------------

def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return data


def _parse_float(text: str, name: str, line: int):
    text = text.strip()
    if text == "":
        return np.nan
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(f"non-numeric {name} {text!r}", line) from None
    if not np.isfinite(value):
        raise MalformedRow(f"non-finite {name} {text!r}", line)
    return value


def load_panel(source, tags=None) -> CategoryPanel:
    """Load and validate a panel CSV.

    Parameters
    ----------
    source : path or file-like
        CSV with header ``date,category_id,price_index,nominal_expenditure``.
        An empty field marks a missing cell.
    tags : path, file-like or mapping, optional
        Category tags, either a ``category_id,tag`` CSV or a mapping of
        category id to an iterable of tags.

    Returns
    -------
    CategoryPanel
        Categories sorted by id, months ascending.  Leading months before a
        category's first observation get expenditure exactly zero.
    """
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty panel file", 1) from None
    if tuple(h.strip() for h in header) != PANEL_HEADER:
        raise MalformedRow(f"header must be {','.join(PANEL_HEADER)}", 1)

    cells = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 4:
            raise MalformedRow(f"expected 4 fields, got {len(row)}", line)
        date, cat, price_s, exp_s = row
        try:
            month = parse_month(date)
        except ValueError as exc:
            raise MalformedRow(str(exc), line) from None
        cat = cat.strip()
        if not cat:
            raise MalformedRow("empty category_id", line)
        price = _parse_float(price_s, "price_index", line)
        exp = _parse_float(exp_s, "nominal_expenditure", line)
        if price <= 0:
            raise NonPositivePrice(f"non-positive price_index {price_s.strip()!r}", line)
        if exp < 0:
            raise MalformedRow(f"negative nominal_expenditure {exp_s.strip()!r}", line)
        key = (cat, month)
        if key in cells:
            raise DuplicateCell(f"duplicate row for {cat} {format_month(month)}", line)
        cells[key] = (price, exp)

    if not cells:
        raise MalformedRow("panel has no data rows", 1)

    categories = sorted({c for c, _ in cells})
    present = sorted({m for _, m in cells})
    months = np.arange(present[0], present[-1] + np.timedelta64(1, "M"), dtype="datetime64[M]")
    if len(months) != len(present):
        gaps = sorted(set(months.tolist()) - set(np.array(present).tolist()))
        raise NonContiguousMonths(
            "months missing entirely: " + ", ".join(format_month(g) for g in gaps[:5])
        )

    col = {c: j for j, c in enumerate(categories)}
    price = np.full((len(months), len(categories)), np.nan)
    exp = np.full_like(price, np.nan)
    for (cat, month), (p, e) in cells.items():
        i = int((month - months[0]).astype(int))
        price[i, col[cat]] = p
        exp[i, col[cat]] = e

    # retroactive zero weight before a category's first observation
    for j in range(len(categories)):
        seen = np.isfinite(price[:, j]) | np.isfinite(exp[:, j])
        first = int(np.argmax(seen))
        exp[:first, j] = 0.0

    tag_map = {}
    if tags is not None:
        tag_map = tags if isinstance(tags, Mapping) else load_tags(tags)
    return CategoryPanel(categories, months, price, exp, tag_map)


def load_tags(source) -> dict:
    """Read a ``category_id,tag`` CSV into ``{category: frozenset(tags)}``."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != TAGS_HEADER:
        raise MalformedRow(f"tag file header must be {','.join(TAGS_HEADER)}", 1)
    out = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise MalformedRow("expected category_id,tag", line)
        out.setdefault(row[0].strip(), set()).add(row[1].strip())
    return {k: frozenset(v) for k, v in out.items()}


def write_panel(panel: CategoryPanel, fh) -> None:
    """Write ``panel`` in the panel-CSV format (10 significant digits)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(PANEL_HEADER)
    for i, month in enumerate(panel.months):
        for j, cat in enumerate(panel.categories):
            p, e = panel.price[i, j], panel.expenditure[i, j]
            w.writerow([
                format_month(month), cat,
                "" if np.isnan(p) else f"{p:.10g}",
                "" if np.isnan(e) else f"{e:.10g}",
            ])


# --- derived quantities ----------------------------------------------------

def monthly_rates(panel: CategoryPanel, category: str) -> MonthlyRateSeries:
    """Gross monthly relatives ``p_t / p_{t-1}`` for one category.

    The first panel month has no rate; a missing price at ``t`` or ``t-1``
    leaves the rate at ``t`` missing (NaN).
    """
    j = panel.category_index(category)
    if panel.n_months < 2:
        raise InsufficientHistory("need at least 2 months of prices")
    p = panel.price[:, j]
    return MonthlyRateSeries(panel.months[1:], p[1:] / p[:-1], label=category)


def _raw_weights(p_prev, p_cur, e_prev, e_cur) -> np.ndarray:
    # p_{t-1} q_t = p_{t-1} * e_t / p_t
    tot_prev = e_prev.sum()
    tot_cur = e_cur.sum()
    if tot_prev <= 0 or tot_cur <= 0:
        raise EmptyActiveSet("active set has zero total expenditure")
    return 0.5 * e_prev / tot_prev + 0.5 * (p_prev * e_cur / p_cur) / tot_cur


def trim_weights(panel: CategoryPanel, month, active=None) -> WeightVector:
    """Expenditure weights used to trim and average the cross-section.

    Each weight averages the previous-period expenditure share and the
    current-period quantity valued at previous-period prices, relative to
    current total expenditure.  The raw weights need not sum to one, so they
    are renormalized over ``active``.

    Parameters
    ----------
    panel : CategoryPanel
    month : month-like
        Month ``t``; ``t-1`` must be in the panel.
    active : iterable of str, optional
        Categories in the cross-section.  Defaults to all categories.
    """
    i = panel.month_index(month)
    if i == 0:
        raise NoPredecessor(f"{format_month(month)} is the first panel month")
    active = panel.categories if active is None else tuple(active)
    if not active:
        raise EmptyActiveSet("no active categories")
    idx = [panel.category_index(c) for c in active]
    p_prev, p_cur = panel.price[i - 1, idx], panel.price[i, idx]
    e_prev, e_cur = panel.expenditure[i - 1, idx], panel.expenditure[i, idx]
    bad = ~(np.isfinite(p_prev) & np.isfinite(p_cur) & np.isfinite(e_prev) & np.isfinite(e_cur))
    if bad.any():
        missing = [active[k] for k in np.flatnonzero(bad)]
        raise MissingCell(f"{format_month(month)}: missing cells for {missing[:5]}")
    raw = _raw_weights(p_prev, p_cur, e_prev, e_cur)
    norm = raw / raw.sum()
    return WeightVector(
        month=np.datetime64(month, "M"),
        weights=dict(zip(active, norm.tolist())),
        raw=dict(zip(active, raw.tolist())),
    )


def apply_exclusions(panel: CategoryPanel, excluded_tags: Iterable[str]) -> CategoryPanel:
    """Drop every category carrying any of ``excluded_tags``."""
    excluded = frozenset(excluded_tags)
    if not excluded:
        return panel
    unknown = excluded - panel.tag_vocabulary
    if unknown:
        raise UnknownTag(f"unknown tags: {sorted(unknown)}")
    keep = [c for c in panel.categories if not (panel.tags[c] & excluded)]
    if not keep:
        raise AllCategoriesExcluded(f"tags {sorted(excluded)} exclude every category")
    return panel.subset(keep)


def month_inputs(panel: CategoryPanel, i: int):
    """Arrays for the cross-section at month index ``i`` (``i >= 1``).

    Categories with a missing price or expenditure at ``t`` or ``t-1`` are
    dropped; a warning is logged when a dropped category carries positive
    expenditure.

    Returns
    -------
    idx, p_prev, p_cur, e_prev, e_cur : ndarray
    """
    p_prev, p_cur = panel.price[i - 1], panel.price[i]
    e_prev, e_cur = panel.expenditure[i - 1], panel.expenditure[i]
    ok = np.isfinite(p_prev) & np.isfinite(p_cur) & np.isfinite(e_prev) & np.isfinite(e_cur)
    if not ok.all():
        dropped = np.flatnonzero(~ok)
        spend = np.nan_to_num(e_prev[dropped], nan=1.0) + np.nan_to_num(e_cur[dropped], nan=1.0)
        loud = [panel.categories[k] for k, s in zip(dropped, spend) if s > 0]
        if loud:
            logger.warning(
                "%s: dropping %d categories with missing cells (%s)",
                format_month(panel.months[i]), len(loud), ", ".join(loud[:5]),
            )
    idx = np.flatnonzero(ok)
    return idx, p_prev[idx], p_cur[idx], e_prev[idx], e_cur[idx]


# --- diagnostics -----------------------------------------------------------

@dataclass(frozen=True)
class MonthDiagnostics:
    month: np.datetime64
    n_positive_expenditure: int
    n_zero_change: int | None
    zero_change_share: float | None


@dataclass(frozen=True)
class ValidationReport:
    rows: tuple
    missing_cells: tuple  # (category, month, field)

    def row(self, month) -> MonthDiagnostics:
        month = np.datetime64(month, "M")
        for r in self.rows:
            if r.month == month:
                return r
        raise KeyError(format_month(month))


def validate(panel: CategoryPanel) -> ValidationReport:
    """Per-month counts of spending and zero-price-change categories.

    Zero change means a relative of exactly 1.0.  Its expenditure share uses
    current-month expenditure over categories with a known expenditure.  The
    first month has no relatives, so its zero-change fields are None.
    """
    rows = []
    for i, month in enumerate(panel.months):
        e = panel.expenditure[i]
        n_pos = int(np.sum(np.nan_to_num(e, nan=0.0) > 0))
        if i == 0:
            rows.append(MonthDiagnostics(month, n_pos, None, None))
            continue
        with np.errstate(invalid="ignore"):
            flat = panel.price[i] / panel.price[i - 1] == 1.0
        known = np.isfinite(e)
        total = e[known].sum()
        share = float(e[flat & known].sum() / total) if total > 0 else 0.0
        rows.append(MonthDiagnostics(month, n_pos, int(flat.sum()), share))

    missing = []
    for name, arr in (("price_index", panel.price), ("nominal_expenditure", panel.expenditure)):
        for i, j in zip(*np.nonzero(np.isnan(arr))):
            missing.append((panel.categories[j], panel.months[i], name))
    missing.sort(key=lambda m: (m[1], m[0], m[2]))
    return ValidationReport(tuple(rows), tuple(missing))
