"""Diagnostic plot rendering: outputs exist, empty inputs refuse."""

import numpy as np
import pytest

from splitflow.errors import NothingToPlot
from splitflow.plots import plot_ccdf, plot_gamma_vs_alpha, plot_nst_scatter
from splitflow.powerlaw import clauset_fit
from splitflow.simulate import sample_metaorder_length


def test_empty_inputs_raise(tmp_path):
    with pytest.raises(NothingToPlot):
        plot_ccdf(np.empty(0), None, tmp_path / "c.svg")
    with pytest.raises(NothingToPlot):
        plot_gamma_vs_alpha([], tmp_path / "g.svg")
    with pytest.raises(NothingToPlot):
        plot_nst_scatter([{"n_st_true": float("nan"), "n_st_hat": 3.0}],
                         tmp_path / "n.svg")


def test_ccdf_plot_with_fit(tmp_path):
    rng = np.random.default_rng(7)
    lengths = sample_metaorder_length(rng, 1.5, 20_000)
    fit = clauset_fit(lengths)
    out = plot_ccdf(lengths, fit, tmp_path / "ccdf.svg")
    assert out.exists() and out.stat().st_size > 0


def test_scatter_plots_single_row(tmp_path):
    row = {"alpha_true": 1.5, "gamma_acf": 0.47,
           "n_st_true": 100.0, "n_st_hat": 88.0}
    g = plot_gamma_vs_alpha([row], tmp_path / "gamma.svg")
    n = plot_nst_scatter([row], tmp_path / "nst.svg")
    assert g.exists() and n.exists()
