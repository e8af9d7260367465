"""Command line entry points.

Subcommands: simulate (generate a flow CSV with truth sidecar),
calibrate (build and cache the bias table), analyze (full analysis of
one or more CSVs), scatter (analysis reduced to the scatter table and
summary), plot (figures from a scatter table).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="generate an order-splitting flow")
    p.add_argument("--alpha", type=float, required=True, help="metaorder size exponent")
    p.add_argument("--n-st", type=int, required=True, help="number of splitting traders")
    p.add_argument("--n-steps", type=int, required=True, help="kept series length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--intensity-mode", choices=["homogeneous", "pareto"],
                   default="homogeneous")
    p.add_argument("--pareto-shape", type=float, default=1.5)
    p.add_argument("--rt-fraction", type=float, default=0.0,
                   help="share of steps given to noise traders")
    p.add_argument("--events-per-day", type=int, default=None)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--with-logs", action="store_true",
                   help="include metaorder lengths in the truth sidecar")


def _add_calibrate(sub):
    p = sub.add_parser("calibrate", help="build and cache the bias table")
    p.add_argument("--out", default=None, help="also write the table to this path")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--quick", action="store_true",
                   help="tiny grid for smoke testing only")


def _add_analyze(sub, name, help_text):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("inputs", nargs="+", help="order CSV files")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--table", default=None, help="bias table JSON path")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--no-psd", action="store_true")
    p.add_argument("--no-clustering", action="store_true")


def _add_plot(sub):
    p = sub.add_parser("plot", help="figures from a scatter table")
    p.add_argument("--scatter", required=True, help="scatter CSV from analyze")
    p.add_argument("--out-dir", required=True)


def _cmd_simulate(args) -> int:
    from .io import truth_path_for, write_order_csv, write_truth_sidecar
    from .simulate import SimConfig, simulate

    cfg = SimConfig(
        n_st=args.n_st,
        alpha=args.alpha,
        n_steps=args.n_steps,
        seed=args.seed,
        intensity_mode=args.intensity_mode,
        pareto_shape=args.pareto_shape,
        rt_fraction=args.rt_fraction,
        events_per_day=args.events_per_day,
    )
    dp = simulate(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_order_csv(dp, out)
    write_truth_sidecar(dp.truth, truth_path_for(out), include_logs=args.with_logs)
    print(f"wrote {out} ({dp.n_events} events, {dp.n_traders} traders)")
    return 0


def _cmd_calibrate(args) -> int:
    from .correlation import (
        BiasTableConfig,
        load_or_build_bias_table,
        save_bias_table,
    )

    if args.quick:
        cfg = BiasTableConfig(
            gamma_grid=(0.3, 0.5, 0.7),
            n_eps_grid=(200_000,),
            n_st_grid=(100,),
            reps_short=2,
            reps_long=2,
        )
    else:
        cfg = BiasTableConfig()
    table = load_or_build_bias_table(cfg, cache_dir=args.cache_dir, progress=True)
    if args.out:
        save_bias_table(table, args.out)
        print(f"wrote {args.out}")
    print(f"bias table ready, config hash {table.config_hash}")
    return 0


def _results_to_json(results) -> list[dict]:
    out = []
    for r in results:
        entry = {
            "label": r.label,
            "n_eps": r.n_eps,
            "flags": r.flags,
            "acf": asdict(r.acf) if r.acf else None,
            "psd": asdict(r.psd) if r.psd else None,
            "clustering": asdict(r.clustering) if r.clustering else None,
            "tail": asdict(r.tail) if r.tail else None,
            "truth": r.truth,
        }
        out.append(entry)
    return out


def _cmd_analyze(args, scatter_only: bool) -> int:
    from .correlation import load_bias_table, load_or_build_bias_table
    from .pipeline import (
        PipelineConfig,
        run_pipeline,
        scatter_rows,
        summary_stats,
        write_scatter_csv,
    )

    cfg = PipelineConfig(
        run_psd=not args.no_psd,
        run_clustering=not args.no_clustering,
    )
    table = (
        load_bias_table(args.table)
        if args.table
        else load_or_build_bias_table(cfg.bias, cache_dir=args.cache_dir)
    )
    results = run_pipeline(args.inputs, cfg, table)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = scatter_rows(results)
    write_scatter_csv(rows, out_dir / "scatter.csv")
    (out_dir / "summary.json").write_text(
        json.dumps(summary_stats(rows), indent=1)
    )
    if not scatter_only:
        (out_dir / "results.json").write_text(
            json.dumps(_results_to_json(results), indent=1)
        )
    for r in results:
        gam = f"{r.acf.gamma:.3f}" if r.acf else "none"
        nst = f"{r.acf.n_st:.1f}" if r.acf else "none"
        extra = f" flags={';'.join(r.flags)}" if r.flags else ""
        print(f"{r.label}: gamma={gam} n_st={nst}{extra}")
    print(f"wrote {out_dir / 'scatter.csv'}")
    return 0


def _cmd_plot(args) -> int:
    from .errors import NothingToPlot
    from .plots import plot_gamma_vs_alpha, plot_nst_scatter

    rows = []
    with open(args.scatter, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = dict(rec)
            for k, v in row.items():
                if k in ("label", "flags"):
                    continue
                try:
                    row[k] = float(v)
                except ValueError:
                    row[k] = math.nan
            rows.append(row)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    made = []
    for fn, name in (
        (plot_gamma_vs_alpha, "gamma_vs_alpha.svg"),
        (plot_nst_scatter, "nst_scatter.svg"),
    ):
        try:
            made.append(fn(rows, out_dir / name))
        except NothingToPlot:
            pass
    if not made:
        print("nothing to plot from this scatter table", file=sys.stderr)
        return 1
    for p in made:
        print(f"wrote {p}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="splitflow",
        description="order-splitting flow simulation and inference",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_calibrate(sub)
    _add_analyze(sub, "analyze", "full analysis with per-datapoint results")
    _add_analyze(sub, "scatter", "analysis reduced to scatter table and summary")
    _add_plot(sub)
    args = parser.parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "calibrate":
        return _cmd_calibrate(args)
    if args.command == "analyze":
        return _cmd_analyze(args, scatter_only=False)
    if args.command == "scatter":
        return _cmd_analyze(args, scatter_only=True)
    return _cmd_plot(args)


if __name__ == "__main__":
    sys.exit(main())
