"""From correlation measurements to the number of splitting traders.

The order-splitting prediction ties the sign correlation exponent and
prefactor to the trader count: C(tau) ~ c0 tau**(-gamma) with
c0 = N**(gamma-1) / (gamma+1), so N = [(gamma+1) c0]**(-1/(1-gamma)).
Estimates debias the measured exponent against calibration simulations;
because the calibration response itself depends on the trader count, the
lookup is closed with a fixed-point solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlation import (
    BiasTable,
    FitRangeConfig,
    PsdConfig,
    debias_gamma,
    fit_psd_gamma,
    fit_relative_nlls,
    log_bin,
    psd_estimate,
    refit_prefactor,
    refit_psd_prefactor,
    sample_acf,
    select_fit_range,
)
from .errors import InvalidPrefactor, NoLrcDetected, OutOfCalibration, OutsideLmfRegime
from .types import MarketDatapoint, SignSeries

__all__ = [
    "MicroEstimate",
    "alpha_from_gamma",
    "n_st_lmf",
    "lower_bound_check",
    "estimate_from_acf",
    "estimate_from_psd",
]


def alpha_from_gamma(gamma: float) -> float:
    """Metaorder size exponent implied by the sign correlation exponent."""
    if not 0.0 < gamma < 1.0:
        raise OutsideLmfRegime(f"gamma must lie in (0, 1), got {gamma}")
    return gamma + 1.0


def n_st_lmf(c0: float, gamma: float) -> float:
    """Splitting-trader count from the correlation prefactor and exponent.

    Inverts c0 = N**(gamma-1) / (gamma+1). Under heterogeneous trading
    intensities the result is a lower bound on the true count.
    """
    if not 0.0 < gamma < 1.0:
        raise OutsideLmfRegime(f"gamma must lie in (0, 1), got {gamma}")
    if not c0 > 0 or not math.isfinite(c0):
        raise InvalidPrefactor(f"prefactor must be positive and finite, got {c0}")
    return ((gamma + 1.0) * c0) ** (-1.0 / (1.0 - gamma))


def lower_bound_check(n_st_hat: float, n_true: float, slack_log10: float = 0.15) -> bool:
    """Whether an estimate respects the lower-bound reading within slack."""
    return n_st_hat <= n_true * 10.0**slack_log10


@dataclass(frozen=True)
class MicroEstimate:
    """One route's estimate of the correlation law and trader count.

    gamma_meas is the raw fitted exponent, gamma the debiased one. c0 is
    the prefactor refit at the debiased exponent with the calibration
    offset removed; n_st is NaN when the route cannot produce a count.
    clipped marks any clamp against the calibration grid edges.
    """

    method: str
    gamma_meas: float
    gamma: float
    c0_fit: float
    c0: float
    n_st: float
    n_eps: int
    window_lo: float
    window_hi: float
    clipped: bool


def _signs_of(data) -> SignSeries:
    if isinstance(data, MarketDatapoint):
        return data.sign_series()
    if isinstance(data, SignSeries):
        return data
    return SignSeries(np.asarray(data))


def estimate_from_acf(
    data,
    table: BiasTable,
    fit_config: FitRangeConfig | None = None,
    max_lag: int | None = None,
) -> MicroEstimate:
    """Full autocorrelation route: fit, debias, and solve for the trader count.

    The calibration column depends on the trader count being estimated, so
    the debias-and-invert step is iterated to its fixed point by bisection
    in log10 N; the response weakens with N, making the map contractive.
    Falling off the calibrated N grid clamps to the edge and sets clipped.
    """
    series = _signs_of(data)
    n = series.n_eps
    acf = sample_acf(series, max_lag or n // 10)
    binned = log_bin(acf.lags, acf.values)
    fr = select_fit_range(binned, n, fit_config)
    sel = (binned.x >= fr.tau_minus) & (binned.x <= fr.tau_plus) & (binned.y > 0)
    x, v = binned.x[sel], binned.y[sel]
    fit = fit_relative_nlls(x, v)

    grid = np.array(table.config.n_st_grid, dtype=float)
    lo = math.log10(grid.min()) - 0.3
    hi = math.log10(grid.max()) + 0.3

    def evaluate(y: float):
        db = debias_gamma(fit.exponent, n, table, "acf", n_st=10.0**y)
        c0 = refit_prefactor(x, v, db.gamma) / 10.0**db.c0_offset_log10
        n_hat = n_st_lmf(c0, db.gamma)
        return math.log10(n_hat), db, c0

    def try_eval(y: float):
        try:
            return evaluate(y)
        except OutOfCalibration:
            return None

    # bracket the fixed point of y -> log10 N(y); nudge off dead endpoints
    left, right = lo, hi
    r_lo = try_eval(left)
    while r_lo is None and left < hi - 1e-9:
        left += 0.1
        r_lo = try_eval(left)
    r_hi = try_eval(right)
    while r_hi is None and right > left + 1e-9:
        right -= 0.1
        r_hi = try_eval(right)
    if r_lo is None or r_hi is None:
        raise OutOfCalibration(
            f"measured exponent {fit.exponent:.3f} outside every calibrated column"
        )

    clipped_axis = False
    if r_lo[0] <= left:
        y_star, res = left, r_lo
        clipped_axis = True
    elif r_hi[0] >= right:
        y_star, res = right, r_hi
        clipped_axis = True
    else:
        a, b = left, right
        res = r_hi
        for _ in range(40):
            mid = 0.5 * (a + b)
            r = try_eval(mid)
            if r is None:
                b = mid
                continue
            if r[0] > mid:
                a = mid
            else:
                b = mid
            res = r
        y_star = 0.5 * (a + b)

    _, db, c0 = res
    n_hat = n_st_lmf(c0, db.gamma)
    return MicroEstimate(
        method="acf",
        gamma_meas=fit.exponent,
        gamma=db.gamma,
        c0_fit=fit.prefactor,
        c0=c0,
        n_st=n_hat,
        n_eps=n,
        window_lo=fr.tau_minus,
        window_hi=fr.tau_plus,
        clipped=bool(db.clipped or clipped_axis),
    )


def estimate_from_psd(
    data,
    table: BiasTable,
    n_st_hint: float | None = None,
    psd_config: PsdConfig | None = None,
) -> MicroEstimate:
    """Spectral route, debiased at a trader-count hint from the primary route."""
    series = _signs_of(data)
    curve = psd_estimate(series, psd_config)
    fit = fit_psd_gamma(curve, psd_config)
    db = debias_gamma(fit.gamma, series.n_eps, table, "psd", n_st=n_st_hint)
    c0 = float("nan")
    n_hat = float("nan")
    try:
        c0_raw = refit_psd_prefactor(curve, db.gamma, psd_config)
        if math.isfinite(c0_raw) and c0_raw > 0 and math.isfinite(db.c0_offset_log10):
            c0 = c0_raw / 10.0**db.c0_offset_log10
            n_hat = n_st_lmf(c0, db.gamma)
    except (NoLrcDetected, InvalidPrefactor, OutsideLmfRegime):
        pass
    return MicroEstimate(
        method="psd",
        gamma_meas=fit.gamma,
        gamma=db.gamma,
        c0_fit=fit.prefactor,
        c0=c0,
        n_st=n_hat,
        n_eps=series.n_eps,
        window_lo=fit.f_lo,
        window_hi=fit.f_hi,
        clipped=db.clipped,
    )
