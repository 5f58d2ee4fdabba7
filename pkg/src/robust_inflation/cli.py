"""Command-line entry point.

Every subcommand reads a JSON run configuration (``--config``) whose fields
can be overridden by flags, writes plot-ready CSVs to the output directory
and finishes with a ``manifest_<subcommand>.json`` that echoes the effective
configuration and the row count of every file written.  A manifest can be
passed back as ``--config`` to repeat the run.

Exit codes: 0 success, 2 configuration or I/O error, 3 data error,
4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, InflationError
from .gridsearch import (
    FULL_GRID,
    GridBounds,
    avg_rate_range_by_trim,
    chained_grid,
    dm_pvalues_vs_best,
    equivalence_set,
    evaluate_grid,
    inclusion_stats,
    official_comparison,
    prediction_range,
    top_k,
)
from .indices import (
    CORE_EXCLUDED_TAGS,
    MEDIAN_TRIM,
    OFFICIAL_TRIM,
    OFFICIAL_TRIM_ALT,
    SERIES_KINDS,
    InflationSeries,
    TrimSpec,
    annualize,
    cross_sections,
    series,
)
from .panel import apply_exclusions, format_month, load_panel, parse_month, validate, write_panel
from .stats import (
    SampleSpec,
    dm_summary,
    forecast_errors,
    regime_summary,
    rmse,
    rolling_std,
    sign_match,
)
from .synth import gen_synthetic, write_tags
from .trends import PRESETS, TrendSpec, trend

logger = logging.getLogger("robust_inflation")

OUTPUT_DIR_ENV = "ROBUST_INFLATION_OUTPUT_DIR"
DEFAULT_TARGETS = ("current", "future", "forward", "bandpass")
DEFAULT_SAMPLES = ("1970-2022", "1970-1989", "2000-2022")
DIAGNOSTIC_TRIMS = (OFFICIAL_TRIM, MEDIAN_TRIM, TrimSpec(10, 10))
PERCENTILES = (0.10, 0.24, 0.50, 0.69, 0.90)


def fmt(x) -> str:
    """10 significant digits; empty for missing."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return ""
    return f"{x:.10g}"


@dataclass
class RunConfig:
    input_path: str | None = None
    tags_path: str | None = None
    official_series_path: str | None = None
    targets: list = field(default_factory=lambda: [PRESETS[n] for n in DEFAULT_TARGETS])
    samples: list = field(default_factory=lambda: [SampleSpec.parse(s) for s in DEFAULT_SAMPLES])
    grid: GridBounds = FULL_GRID
    dm_level: float = 0.05
    dm_bandwidth: dict = field(default_factory=dict)
    exclusions: list = field(default_factory=list)
    top_k: list = field(default_factory=lambda: [50, 100])
    workers: int = 1
    output_dir: str = "."

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "RunConfig":
        if "config" in d and "subcommand" in d:
            d = d["config"]  # a run manifest
        cfg = cls()
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")

        def path(v):
            if v is None or base_dir is None or os.path.isabs(v):
                return v
            return str(base_dir / v)

        for key in ("input_path", "tags_path", "official_series_path"):
            if key in d:
                setattr(cfg, key, path(d[key]))
        if "output_dir" in d:
            cfg.output_dir = path(d["output_dir"])
        if "targets" in d:
            cfg.targets = [parse_target(t) for t in d["targets"]]
        if "samples" in d:
            cfg.samples = [parse_sample(s) for s in d["samples"]]
        if "grid" in d:
            try:
                cfg.grid = GridBounds(**d["grid"])
            except TypeError as exc:
                raise ConfigError(f"bad grid bounds: {exc}") from None
        if "dm_level" in d:
            cfg.dm_level = float(d["dm_level"])
        if "dm_bandwidth" in d:
            cfg.dm_bandwidth = {str(k): int(v) for k, v in d["dm_bandwidth"].items()}
        if "exclusions" in d:
            cfg.exclusions = [str(x) for x in d["exclusions"]]
        if "top_k" in d:
            cfg.top_k = [int(k) for k in d["top_k"]]
        if "workers" in d:
            cfg.workers = int(d["workers"])
        cfg.check()
        return cfg

    def check(self):
        if not self.targets:
            raise ConfigError("at least one target is required")
        if not self.samples:
            raise ConfigError("at least one sample is required")
        if not 0 < self.dm_level < 1:
            raise ConfigError("dm_level must lie in (0, 1)")
        names = [t.name for t in self.targets]
        if len(set(names)) != len(names):
            raise ConfigError(f"target names must be unique: {names}")

    def to_dict(self) -> dict:
        def absolute(v):
            return None if v is None else os.path.abspath(v)

        return {
            "input_path": absolute(self.input_path),
            "tags_path": absolute(self.tags_path),
            "official_series_path": absolute(self.official_series_path),
            "targets": [t.to_dict() for t in self.targets],
            "samples": [{"start": format_month(s.start), "end": format_month(s.end)}
                        for s in self.samples],
            "grid": self.grid.to_dict(),
            "dm_level": self.dm_level,
            "dm_bandwidth": dict(sorted(self.dm_bandwidth.items())),
            "exclusions": list(self.exclusions),
            "top_k": list(self.top_k),
            "workers": self.workers,
            "output_dir": absolute(self.output_dir),
        }


def parse_target(t) -> TrendSpec:
    if isinstance(t, str):
        if t not in PRESETS:
            raise ConfigError(f"unknown target preset {t!r}; choose from {sorted(PRESETS)}")
        return PRESETS[t]
    if isinstance(t, dict):
        return TrendSpec.from_dict(t)
    raise ConfigError(f"bad target {t!r}")


def parse_sample(s) -> SampleSpec:
    if isinstance(s, str):
        return SampleSpec.parse(s)
    if isinstance(s, dict) and {"start", "end"} <= set(s):
        try:
            return SampleSpec(parse_month(s["start"]), parse_month(s["end"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"bad sample {s!r}")


# --- output helpers --------------------------------------------------------

class Outputs:
    """Tracks files written during a run for the manifest."""

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.rows = {}

    def write(self, name: str, header, rows) -> Path:
        path = self.dir / name
        n = 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
                n += 1
        self.rows[name] = n
        return path

    def manifest(self, subcommand: str, cfg: RunConfig, extra=None) -> Path:
        doc = {
            "subcommand": subcommand,
            "version": __version__,
            "config": cfg.to_dict(),
            "outputs": dict(sorted(self.rows.items())),
        }
        if extra:
            doc.update(extra)
        path = self.dir / f"manifest_{subcommand}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path


def _slug(target: TrendSpec, sample: SampleSpec) -> str:
    return f"{target.name}_{format_month(sample.start)}_{format_month(sample.end)}"


def _series_rows(s: InflationSeries):
    a = b = ""
    if s.trim is not None:
        a, b = str(s.trim.alpha), str(s.trim.beta)
    kind = s.kind if s.kind != "percentile" else s.label
    for m, v in zip(s.months, s.values):
        yield format_month(m), kind, a, b, v


# --- pipeline pieces -------------------------------------------------------

class Context:
    """Loaded panel plus cached intermediate results for one run."""

    def __init__(self, cfg: RunConfig):
        if not cfg.input_path:
            raise ConfigError("no input panel given (--input or input_path)")
        self.cfg = cfg
        self.panel = load_panel(cfg.input_path, tags=cfg.tags_path)
        self.robust_panel = apply_exclusions(self.panel, cfg.exclusions)
        self._sections = None
        self._headline = None
        self._trends = {}

    @property
    def sections(self):
        if self._sections is None:
            self._sections = cross_sections(self.robust_panel)
        return self._sections

    @property
    def headline(self) -> InflationSeries:
        if self._headline is None:
            self._headline = series(self.panel, "headline")
        return self._headline

    def target(self, spec: TrendSpec):
        if spec.name not in self._trends:
            self._trends[spec.name] = trend(self.headline, spec)
        return self._trends[spec.name]

    def robust(self, kind, trim=None, p=None) -> InflationSeries:
        return series(self.robust_panel, kind, trim, p, sections=self.sections)

    def bandwidth(self, spec: TrendSpec, n: int) -> int:
        bw = self.cfg.dm_bandwidth.get(spec.name, spec.default_bandwidth)
        if bw > n - 1:
            logger.warning("%s: bandwidth %d capped at %d for %d months", spec.name, bw, n - 1, n)
        return max(0, min(bw, n - 1))


def cmd_series(cfg: RunConfig, args, out: Outputs):
    ctx = Context(cfg)
    kinds = args.kind or ["headline"]
    trim = TrimSpec.parse(args.trim) if args.trim else None
    rows = []
    for kind in kinds:
        if kind in ("headline", "core"):
            panel = ctx.panel
            s = series(panel, kind, core_tags=tuple(args.core_tags or CORE_EXCLUDED_TAGS))
        elif kind == "trimmed":
            s = ctx.robust("trimmed", trim or OFFICIAL_TRIM)
        elif kind == "median":
            s = ctx.robust("median")
        else:
            s = ctx.robust("percentile", p=args.p)
        rows.extend(_series_rows(s))
    out.write(args.output_name or "series.csv", ("date", "kind", "alpha", "beta", "value_pct"), rows)


def cmd_trend(cfg: RunConfig, args, out: Outputs):
    ctx = Context(cfg)
    rows = []
    for spec in cfg.targets:
        tr = ctx.target(spec)
        rows.extend((format_month(m), spec.name, v) for m, v in zip(tr.months, tr.values))
    out.write("trends.csv", ("date", "kind", "value_pct"), rows)


def _read_official(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["date", "kind", "value_pct"]:
            raise DataError(f"{path}: line 1: header must be date,kind,value_pct")
        out = {}
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                month = parse_month(row[0])
                out.setdefault(row[1].strip(), {})[month] = float(row[2])
            except (ValueError, IndexError):
                raise DataError(f"{path}: line {line}: malformed row {row!r}") from None
    return out


def cmd_evaluate(cfg: RunConfig, args, out: Outputs):
    ctx = Context(cfg)
    measures = [
        ("headline", None, ctx.headline),
        ("trimmed", OFFICIAL_TRIM, ctx.robust("trimmed", OFFICIAL_TRIM)),
        ("trimmed", OFFICIAL_TRIM_ALT, ctx.robust("trimmed", OFFICIAL_TRIM_ALT)),
        ("median", MEDIAN_TRIM, ctx.robust("median")),
    ]
    median = measures[-1][2]
    rows = []
    for spec in cfg.targets:
        target = ctx.target(spec)
        for sample in cfg.samples:
            try:
                _, med_err = forecast_errors(median, target, sample)
            except DataError as exc:
                logger.warning("skipping %s %s: %s", spec.name, sample.label, exc)
                continue
            bw = ctx.bandwidth(spec, len(med_err))
            for kind, trim, s in measures:
                _, err = forecast_errors(s, target, sample)
                dm = None if kind == "median" else dm_summary(err, med_err, bw)
                rows.append((spec.name, format_month(sample.start), format_month(sample.end), kind,
                             "" if trim is None or kind == "median" else str(trim.alpha),
                             "" if trim is None or kind == "median" else str(trim.beta),
                             rmse(s, target, sample),
                             None if dm is None else dm.statistic,
                             None if dm is None else dm.p_value))
    out.write("evaluation.csv", ("target", "sample_start", "sample_end", "series_kind",
                                 "alpha", "beta", "rmse", "dm_stat", "dm_p"), rows)

    extra = {}
    if cfg.official_series_path:
        official = _read_official(cfg.official_series_path)
        computed = {"headline": ctx.headline, "trimmed": measures[1][2], "median": median}
        if "core" in official:
            computed["core"] = series(ctx.panel, "core")
        gaps, max_gap = [], {}
        for kind in sorted(official):
            if kind not in computed:
                logger.warning("official series kind %r not computed; skipped", kind)
                continue
            s = computed[kind]
            for m, v in zip(s.months, s.values):
                if m in official[kind]:
                    o = official[kind][m]
                    gaps.append((format_month(m), kind, v, o, abs(v - o)))
                    max_gap[kind] = max(max_gap.get(kind, 0.0), abs(v - o))
        out.write("official_gaps.csv", ("date", "kind", "computed_pct", "official_pct", "abs_gap"), gaps)
        extra["official_max_gap"] = {k: float(fmt(v)) for k, v in sorted(max_gap.items())}
    return extra


def _grids(ctx: Context, cfg: RunConfig):
    chained = chained_grid(ctx.robust_panel, cfg.grid, cfg.workers, sections=ctx.sections)
    for spec in cfg.targets:
        target = ctx.target(spec)
        for sample in cfg.samples:
            try:
                grid = evaluate_grid(chained, target, sample)
            except DataError as exc:
                logger.warning("skipping %s %s: %s", spec.name, sample.label, exc)
                continue
            yield spec, sample, chained, grid


def cmd_grid(cfg: RunConfig, args, out: Outputs):
    ctx = Context(cfg)
    best_rows, set_rows = [], []
    for spec, sample, _, grid in _grids(ctx, cfg):
        bw = ctx.bandwidth(spec, len(grid.months))
        pv = dm_pvalues_vs_best(grid, bw)
        comp = official_comparison(grid, bandwidth=bw)
        best_rmse = comp["best_rmse"]
        rel = grid.rmse / best_rmse if best_rmse > 0 else np.ones_like(grid.rmse)
        heat = ((int(a), int(b), grid.rmse[i, j], rel[i, j], pv[i, j])
                for i, a in enumerate(grid.alphas) for j, b in enumerate(grid.betas))
        out.write(f"heatmap_{_slug(spec, sample)}.csv",
                  ("alpha", "beta", "rmse", "relative_rmse", "dm_p_vs_best"), heat)
        dm = comp["dm"]
        off = comp["official"]
        best_rows.append((spec.name, format_month(sample.start), format_month(sample.end),
                          comp["best"].alpha, comp["best"].beta, best_rmse,
                          "" if off is None else f"{off.alpha}/{off.beta}",
                          comp["official_rmse"],
                          None if dm is None else dm.statistic,
                          None if dm is None else dm.p_value))
        eq = equivalence_set(grid, cfg.dm_level, pvalues=pv)
        set_rows.extend((spec.name, format_month(sample.start), format_month(sample.end),
                         eq.criterion, t.alpha, t.beta) for t in eq)
    out.write("best_trims.csv", ("target", "sample_start", "sample_end", "alpha", "beta", "rmse",
                                 "official_trim", "official_rmse", "dm_stat", "dm_p"), best_rows)
    out.write("equivalence_sets.csv", ("target", "sample_start", "sample_end", "set_criterion",
                                       "alpha", "beta"), set_rows)


def cmd_ranges(cfg: RunConfig, args, out: Outputs):
    ctx = Context(cfg)
    summary = []
    for spec, sample, chained, grid in _grids(ctx, cfg):
        bw = ctx.bandwidth(spec, len(grid.months))
        sets = [equivalence_set(grid, cfg.dm_level, bw)]
        sets += [top_k(grid, min(k, grid.size)) for k in cfg.top_k]
        rows = []
        for trims in sets:
            pr = prediction_range(chained, trims, sample)
            rows.extend((format_month(m), lo, hi, trims.criterion)
                        for m, lo, hi in zip(pr.months, pr.low, pr.high))
            summary.append((spec.name, format_month(sample.start), format_month(sample.end),
                            trims.criterion, len(trims), pr.average, float(np.max(pr.high - pr.low))))
        out.write(f"range_{_slug(spec, sample)}.csv", ("date", "min_pct", "max_pct", "set_criterion"), rows)
    out.write("ranges_summary.csv", ("target", "sample_start", "sample_end", "set_criterion",
                                     "n_trims", "avg_range_pct", "max_range_pct"), summary)
    for sample in cfg.samples:
        try:
            spans = avg_rate_range_by_trim(ctx.sections, sample, cfg.grid)
        except DataError as exc:
            logger.warning("skipping rate ranges for %s: %s", sample.label, exc)
            continue
        out.write(f"rate_range_{format_month(sample.start)}_{format_month(sample.end)}.csv",
                  ("alpha", "beta", "avg_range_pct"),
                  ((t.alpha, t.beta, v) for t, v in sorted(spans.items())))


def cmd_diagnostics(cfg: RunConfig, args, out: Outputs):
    ctx = Context(cfg)
    report = validate(ctx.panel)
    out.write("validation.csv", ("date", "n_positive_expenditure", "n_zero_change", "zero_change_share"),
              ((format_month(r.month), r.n_positive_expenditure, r.n_zero_change, r.zero_change_share)
               for r in report.rows))
    out.write("missing_cells.csv", ("date", "category_id", "field"),
              ((format_month(m), c, f) for c, m, f in report.missing_cells))

    measures = {"headline": ctx.headline}
    if set(CORE_EXCLUDED_TAGS) <= ctx.panel.tag_vocabulary:
        measures["core"] = series(ctx.panel, "core")
    else:
        logger.info("no food/energy tags; core inflation skipped")
    measures["median"] = ctx.robust("median")
    measures["trimmed"] = ctx.robust("trimmed", OFFICIAL_TRIM)

    reg_rows, sd_rows, sign_rows = [], [], []
    for name, s in measures.items():
        for r in regime_summary(s, ctx.headline):
            reg_rows.append((name, r.regime, r.mean, r.sd, r.cov, r.month_count))
        if len(s) >= 24:
            months, sd = rolling_std(s, 24)
            sd_rows.extend((format_month(m), name, v) for m, v in zip(months, sd))
        if name != "headline":
            sign_rows.append((name, sign_match(s, ctx.headline)))
    out.write("regimes.csv", ("series_kind", "regime", "mean", "sd", "cov", "month_count"), reg_rows)
    out.write("rolling_sd.csv", ("date", "series_kind", "sd"), sd_rows)
    out.write("sign_match.csv", ("series_kind", "fraction"), sign_rows)

    pct_rows = []
    for xs in ctx.sections:
        for p in PERCENTILES:
            pct_rows.append((format_month(xs.month), p, float(annualize(xs.quantile(p)))))
    out.write("percentiles.csv", ("date", "p", "annualized_pct"), pct_rows)

    sample = cfg.samples[0]
    for trim in DIAGNOSTIC_TRIMS:
        try:
            inc = inclusion_stats(ctx.sections, trim, sample, ctx.robust_panel.categories)
        except DataError as exc:
            logger.warning("skipping inclusion stats for %s: %s", sample.label, exc)
            break
        out.write(f"inclusion_{trim.alpha}_{trim.beta}.csv",
                  ("category_id", "included_frac", "excl_low_frac", "excl_high_frac"),
                  ((c, v.included_frac, v.excl_low_frac, v.excl_high_frac) for c, v in inc.items()))


def cmd_synth(cfg: RunConfig, args, out: Outputs):
    panel, tags = gen_synthetic(args.categories, args.months, args.seed, args.dispersion, args.start)
    panel_path = out.dir / args.output_name
    with open(panel_path, "w", newline="") as fh:
        write_panel(panel, fh)
    out.rows[args.output_name] = panel.n_months * len(panel.categories)
    if tags:
        with open(out.dir / args.tags_name, "w", newline="") as fh:
            write_tags(tags, fh)
        out.rows[args.tags_name] = sum(len(v) for v in tags.values())
    return {"synth": {"categories": args.categories, "months": args.months, "seed": args.seed,
                      "dispersion": args.dispersion, "start": args.start}}


COMMANDS = {
    "series": cmd_series,
    "trend": cmd_trend,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "ranges": cmd_ranges,
    "diagnostics": cmd_diagnostics,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-inflation", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration or manifest")
        p.add_argument("--input", dest="input_path", help="panel CSV")
        p.add_argument("--tags", dest="tags_path", help="category_id,tag CSV")
        p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
        p.add_argument("--target", action="append", help="trend preset name (repeatable)")
        p.add_argument("--sample", action="append", help="YYYY-YYYY or YYYY-MM:YYYY-MM (repeatable)")
        p.add_argument("--exclude", action="append", help="exclude categories with this tag")
        p.add_argument("--workers", type=int)
        return p

    p = common(sub.add_parser("series", help="headline/core/trimmed/median/percentile series"))
    p.add_argument("--kind", action="append", choices=SERIES_KINDS)
    p.add_argument("--trim", help="ALPHA,BETA for --kind trimmed (default 24,31)")
    p.add_argument("--p", type=float, help="percentile in (0,1) for --kind percentile")
    p.add_argument("--core-tags", action="append", help="tags excluded from core")
    p.add_argument("--output-name", default="series.csv")

    common(sub.add_parser("trend", help="trend-inflation targets"))
    p = common(sub.add_parser("evaluate", help="RMSE and DM tests of the official measures"))
    p.add_argument("--official", dest="official_series_path", help="official series CSV")
    p = common(sub.add_parser("grid", help="RMSE heatmaps, best trims, equivalence sets"))
    p.add_argument("--level", dest="dm_level", type=float)
    p = common(sub.add_parser("ranges", help="prediction ranges of trim sets"))
    p.add_argument("--level", dest="dm_level", type=float)
    common(sub.add_parser("diagnostics", help="validation, regimes, rolling sd, inclusion"))

    p = sub.add_parser("synth", help="write a deterministic synthetic panel")
    p.add_argument("--categories", type=int, default=50)
    p.add_argument("--months", type=int, default=360)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--dispersion", type=float, default=1.0)
    p.add_argument("--start", default="1960-01")
    p.add_argument("--output-dir")
    p.add_argument("--output-name", default="panel.csv")
    p.add_argument("--tags-name", default="tags.csv")
    return parser


def resolve_config(args) -> RunConfig:
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        cfg = RunConfig.from_dict(doc, base_dir=path.parent)
        if "output_dir" not in doc.get("config", doc):
            cfg.output_dir = os.environ.get(OUTPUT_DIR_ENV, cfg.output_dir)
    else:
        cfg = RunConfig()
        cfg.output_dir = os.environ.get(OUTPUT_DIR_ENV, ".")
    for key in ("input_path", "tags_path", "official_series_path", "dm_level", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    if getattr(args, "target", None):
        cfg.targets = [parse_target(t) for t in args.target]
    if getattr(args, "sample", None):
        cfg.samples = [parse_sample(s) for s in args.sample]
    if getattr(args, "exclude", None):
        cfg.exclusions = list(args.exclude)
    cfg.check()
    return cfg


def run(argv=None) -> int:
    """Run the CLI and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args)
        out = Outputs(cfg.output_dir)
        extra = COMMANDS[args.command](cfg, args, out)
        out.manifest(args.command, cfg, extra)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    except InflationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        logger.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    return 0


def main():
    sys.exit(run())
