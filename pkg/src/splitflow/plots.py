"""Diagnostic figures for simulation studies and fitted datapoints.

All functions render to SVG files through the Agg backend and never
require a display.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import NothingToPlot
from .powerlaw import TailFit, empirical_ccdf
from ._zeta import hurwitz_zeta

__all__ = ["plot_ccdf", "plot_gamma_vs_alpha", "plot_nst_scatter"]


def plot_ccdf(lengths, fit: TailFit | None, path) -> Path:
    """Log-log survival plot of a length sample with its fitted tail."""
    lengths = np.asarray(lengths)
    if lengths.size == 0:
        raise NothingToPlot("no lengths to plot")
    x, ccdf = empirical_ccdf(lengths)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(x, ccdf, ".", ms=4, color="#33548c", label="data")
    if fit is not None:
        s = fit.alpha + 1.0
        tail_frac = ccdf[np.searchsorted(x, fit.l_min)]
        xr = np.geomspace(fit.l_min, x.max(), 200)
        model = hurwitz_zeta(s, xr) / hurwitz_zeta(s, fit.l_min) * tail_frac
        ax.loglog(xr, model, "-", color="#c23b22",
                  label=f"tail fit, alpha={fit.alpha:.2f}")
    ax.set_xlabel("metaorder length")
    ax.set_ylabel("P(L >= x)")
    ax.legend(frameon=False)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_gamma_vs_alpha(rows, path) -> Path:
    """Box plot of debiased exponents grouped by the true size exponent.

    The order-splitting prediction gamma = alpha - 1 is drawn as a line.
    Needs rows with simulation truth attached.
    """
    usable = [
        r for r in rows
        if math.isfinite(r.get("alpha_true", float("nan")))
        and math.isfinite(r.get("gamma_acf", float("nan")))
    ]
    if not usable:
        raise NothingToPlot("no rows carry both truth and a fitted exponent")
    alphas = sorted({r["alpha_true"] for r in usable})
    data = [
        [r["gamma_acf"] for r in usable if r["alpha_true"] == a] for a in alphas
    ]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot(data, positions=alphas, widths=0.06, manage_ticks=False)
    lo, hi = min(alphas) - 0.1, max(alphas) + 0.1
    ax.plot([lo, hi], [lo - 1.0, hi - 1.0], "--", color="#888888",
            label="gamma = alpha - 1")
    ax.set_xlabel("true metaorder exponent alpha")
    ax.set_ylabel("debiased correlation exponent")
    ax.legend(frameon=False)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_nst_scatter(rows, path, slack_log10: float = 0.15) -> Path:
    """Estimated against true trader count on log axes with the bound band."""
    usable = [
        r for r in rows
        if math.isfinite(r.get("n_st_true", float("nan")))
        and math.isfinite(r.get("n_st_hat", float("nan")))
    ]
    if not usable:
        raise NothingToPlot("no rows carry both a true and estimated count")
    x = np.array([r["n_st_true"] for r in usable], dtype=float)
    y = np.array([r["n_st_hat"] for r in usable], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(x, y, "o", ms=5, mfc="none", color="#33548c")
    span = np.geomspace(x.min() / 2, x.max() * 2, 2)
    ax.loglog(span, span, "-", color="#555555", lw=1, label="exact")
    ax.loglog(span, span * 10.0**slack_log10, ":", color="#c23b22", lw=1,
              label=f"bound +{slack_log10} dex")
    ax.set_xlabel("true splitting-trader count")
    ax.set_ylabel("estimated count")
    ax.legend(frameon=False)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out)
    plt.close(fig)
    return out
