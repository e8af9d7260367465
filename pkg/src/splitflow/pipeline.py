"""End-to-end analysis of order-flow datapoints.

For each datapoint: measure the sign correlation by both routes, debias
against the calibration table, estimate the splitting-trader count,
classify traders, and fit the metaorder length tail of the splitting
class. Results aggregate into a deterministic scatter table and summary
statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import (
    ClusteringConfig,
    ClusteringSummary,
    classify_traders,
    market_clustering_summary,
    reconstruct_metaorders,
)
from .correlation import (
    BiasTable,
    BiasTableConfig,
    FitRangeConfig,
    PsdConfig,
    load_or_build_bias_table,
)
from .errors import (
    CellUnusable,
    DegenerateSample,
    FitDiverged,
    InsufficientData,
    NoLrcDetected,
    NonPositiveValue,
    NoPowerLawRegion,
    OutOfCalibration,
    SeriesTooShort,
)
from .inference import MicroEstimate, estimate_from_acf, estimate_from_psd
from .io import IngestionConfig, read_order_csv, read_truth_sidecar, truth_path_for
from .powerlaw import TailFit, clauset_fit
from .types import MarketDatapoint

__all__ = [
    "PipelineConfig",
    "DatapointResult",
    "analyze_datapoint",
    "run_pipeline",
    "scatter_rows",
    "write_scatter_csv",
    "summary_stats",
    "SCATTER_COLUMNS",
]

_ANALYSIS_ERRORS = (
    NoPowerLawRegion,
    FitDiverged,
    NonPositiveValue,
    OutOfCalibration,
    CellUnusable,
    NoLrcDetected,
    SeriesTooShort,
    InsufficientData,
    DegenerateSample,
)


@dataclass(frozen=True)
class PipelineConfig:
    fit_range: FitRangeConfig = field(default_factory=FitRangeConfig)
    psd: PsdConfig = field(default_factory=PsdConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    bias: BiasTableConfig = field(default_factory=BiasTableConfig)
    ingestion: IngestionConfig = field(default_factory=IngestionConfig)
    run_psd: bool = True
    run_clustering: bool = True
    run_tail_fit: bool = True


@dataclass
class DatapointResult:
    label: str
    n_eps: int
    acf: MicroEstimate | None = None
    psd: MicroEstimate | None = None
    clustering: ClusteringSummary | None = None
    tail: TailFit | None = None
    truth: dict | None = None
    flags: list[str] = field(default_factory=list)


def analyze_datapoint(
    dp: MarketDatapoint,
    table: BiasTable,
    config: PipelineConfig | None = None,
    truth: dict | None = None,
) -> DatapointResult:
    """Run every stage on one datapoint, recording failures as flags.

    A series below the ingestion length floor is still analyzed but
    flagged; each stage that raises a recognized analysis error is
    skipped with a flag naming the error.
    """
    cfg = config or PipelineConfig()
    res = DatapointResult(label=dp.label, n_eps=dp.n_events, truth=truth)
    if dp.n_events < cfg.ingestion.min_transactions:
        res.flags.append("short_series")

    try:
        res.acf = estimate_from_acf(dp, table, cfg.fit_range)
        if res.acf.clipped:
            res.flags.append("acf_clipped")
    except _ANALYSIS_ERRORS as exc:
        res.flags.append(f"acf_failed:{type(exc).__name__}")

    if cfg.run_psd:
        hint = res.acf.n_st if res.acf is not None else None
        try:
            res.psd = estimate_from_psd(dp, table, n_st_hint=hint, psd_config=cfg.psd)
            if res.psd.clipped:
                res.flags.append("psd_clipped")
        except _ANALYSIS_ERRORS as exc:
            res.flags.append(f"psd_failed:{type(exc).__name__}")

    if cfg.run_clustering:
        labels = classify_traders(dp, cfg.clustering)
        res.clustering = market_clustering_summary(dp, labels)
        if cfg.run_tail_fit:
            st_ids = [lb.trader_id for lb in labels if lb.cls == "ST"]
            if st_ids:
                records = reconstruct_metaorders(dp, st_ids, cfg.clustering)
                lengths = np.array([r.length for r in records], dtype=np.int64)
                try:
                    res.tail = clauset_fit(lengths)
                except _ANALYSIS_ERRORS as exc:
                    res.flags.append(f"tail_failed:{type(exc).__name__}")
            else:
                res.flags.append("no_splitting_traders")
    return res


def run_pipeline(
    inputs,
    config: PipelineConfig | None = None,
    table: BiasTable | None = None,
    cache_dir=None,
) -> list[DatapointResult]:
    """Analyze datapoints or CSV paths in order.

    Paths are loaded with the ingestion config; a truth sidecar found next
    to a CSV rides along into the result.
    """
    cfg = config or PipelineConfig()
    if table is None:
        table = load_or_build_bias_table(cfg.bias, cache_dir=cache_dir)
    results = []
    for item in inputs:
        if isinstance(item, MarketDatapoint):
            dp, truth = item, getattr(item, "truth", None)
            if truth is not None and not isinstance(truth, dict):
                truth = {
                    "alpha": truth.alpha,
                    "n_st": truth.n_st,
                    "rt_fraction": truth.rt_fraction,
                    "seed": truth.seed,
                }
        else:
            dp = read_order_csv(item, cfg.ingestion)
            tp = truth_path_for(item)
            truth = read_truth_sidecar(tp) if tp.exists() else None
        results.append(analyze_datapoint(dp, table, cfg, truth))
    return results


SCATTER_COLUMNS = [
    "label",
    "n_eps",
    "gamma_meas_acf",
    "gamma_acf",
    "gamma_psd",
    "c0_acf",
    "n_st_hat",
    "alpha_tail",
    "st_trader_fraction",
    "st_event_fraction",
    "alpha_true",
    "n_st_true",
    "log10_nst_ratio",
    "flags",
]


def scatter_rows(results: list[DatapointResult]) -> list[dict]:
    """Flatten results into scatter-table records, one per datapoint."""
    rows = []
    for r in results:
        truth = r.truth or {}
        n_true = truth.get("n_st")
        n_hat = r.acf.n_st if r.acf else float("nan")
        ratio = (
            math.log10(n_hat / n_true)
            if n_true and n_hat and math.isfinite(n_hat)
            else float("nan")
        )
        rows.append(
            {
                "label": r.label,
                "n_eps": r.n_eps,
                "gamma_meas_acf": r.acf.gamma_meas if r.acf else float("nan"),
                "gamma_acf": r.acf.gamma if r.acf else float("nan"),
                "gamma_psd": r.psd.gamma if r.psd else float("nan"),
                "c0_acf": r.acf.c0 if r.acf else float("nan"),
                "n_st_hat": n_hat,
                "alpha_tail": r.tail.alpha if r.tail else float("nan"),
                "st_trader_fraction": (
                    r.clustering.st_trader_fraction if r.clustering else float("nan")
                ),
                "st_event_fraction": (
                    r.clustering.st_event_fraction if r.clustering else float("nan")
                ),
                "alpha_true": truth.get("alpha", float("nan")),
                "n_st_true": n_true if n_true is not None else float("nan"),
                "log10_nst_ratio": ratio,
                "flags": ";".join(r.flags),
            }
        )
    return rows


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.10g" % float(value)


def write_scatter_csv(rows: list[dict], path) -> None:
    """Write the scatter table with fixed column order and float format.

    Output is byte-reproducible for identical inputs: %.10g floats, rows
    in input order, no quoting.
    """
    lines = [",".join(SCATTER_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in SCATTER_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def summary_stats(rows: list[dict]) -> dict:
    """Aggregate the scatter table.

    Groups rows by the true exponent where present: quartiles of the
    debiased exponent per group, the regression slope of exponent against
    alpha - 1, and the spread of the trader-count ratio.
    """
    out: dict = {"n_datapoints": len(rows)}
    with_truth = [
        r
        for r in rows
        if math.isfinite(r["alpha_true"]) and math.isfinite(r["gamma_acf"])
    ]
    groups = []
    for a in sorted({r["alpha_true"] for r in with_truth}):
        g = np.array([r["gamma_acf"] for r in with_truth if r["alpha_true"] == a])
        q1, med, q3 = np.percentile(g, [25, 50, 75])
        groups.append(
            {
                "alpha_true": a,
                "n": int(g.size),
                "gamma_q1": float(q1),
                "gamma_median": float(med),
                "gamma_q3": float(q3),
            }
        )
    out["groups"] = groups
    if len({g["alpha_true"] for g in groups}) >= 2:
        x = np.array([r["alpha_true"] - 1.0 for r in with_truth])
        y = np.array([r["gamma_acf"] for r in with_truth])
        out["ols_slope_gamma_vs_alpha"] = float(np.polyfit(x, y, 1)[0])
    ratios = np.array(
        [r["log10_nst_ratio"] for r in rows if math.isfinite(r["log10_nst_ratio"])]
    )
    if ratios.size:
        out["log10_nst_ratio_median"] = float(np.median(ratios))
        out["log10_nst_ratio_within_0p3"] = float(np.mean(np.abs(ratios) <= 0.3))
    return out
