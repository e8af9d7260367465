"""Sign autocorrelation, spectral density, power-law fits, and bias calibration.

Two independent routes to the long-range correlation exponent of an order
sign series: the lag-domain autocorrelation function and the Welch spectral
density. Both are fit with relative-residual least squares and both carry
finite-size bias that is removed through a simulation-calibrated lookup
table keyed by series length and splitting-trader count.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal
from scipy.fft import irfft, next_fast_len, rfft
from scipy.optimize import minimize_scalar
from scipy.special import gamma as _gamma_fn

from .errors import (
    CellUnusable,
    FitDiverged,
    LagOutOfRange,
    NoLrcDetected,
    NonPositiveValue,
    NoPowerLawRegion,
    OutOfCalibration,
    SeriesTooShort,
)
from .seeds import derive_seed
from .types import SignSeries

__all__ = [
    "AcfCurve",
    "BinnedCurve",
    "PsdCurve",
    "PowerLawFit",
    "PsdFit",
    "FitRange",
    "FitRangeConfig",
    "PsdConfig",
    "BiasTableConfig",
    "BiasTable",
    "DebiasResult",
    "sample_acf",
    "log_bin",
    "select_fit_range",
    "fit_relative_nlls",
    "refit_prefactor",
    "psd_estimate",
    "fit_psd_gamma",
    "build_bias_table",
    "debias_gamma",
    "save_bias_table",
    "load_bias_table",
    "load_or_build_bias_table",
]


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class AcfCurve:
    """Sample autocorrelation of a sign series at lags 1..max_lag.

    Values use the biased-denominator estimator sum(e_t e_{t+tau}) / (n - tau)
    with no mean subtraction; for a +-1 series the lag-0 value is identically
    one and is not stored.
    """

    lags: np.ndarray
    values: np.ndarray
    n_eps: int


@dataclass(frozen=True)
class BinnedCurve:
    """Logarithmically binned curve.

    x is the geometric mean abscissa of each bin, y the arithmetic mean of
    the raw values, width the number of raw points that fell in the bin.
    """

    x: np.ndarray
    y: np.ndarray
    width: np.ndarray


@dataclass(frozen=True)
class PsdCurve:
    """Welch estimate of the two-sided spectral density, DC bin dropped."""

    freqs: np.ndarray
    density: np.ndarray
    n_segments: int
    nperseg: int
    n_eps: int


@dataclass(frozen=True)
class PowerLawFit:
    """Result of a relative-residual fit y = prefactor * x**(-exponent)."""

    prefactor: float
    exponent: float
    n_points: int
    x_min: float
    x_max: float
    objective: float


@dataclass(frozen=True)
class PsdFit:
    """Spectral route to the correlation exponent.

    gamma = 1 - beta where the white-floor-subtracted density follows
    f**(-beta) at low frequency. prefactor is the implied lag-domain
    amplitude, NaN when gamma falls outside (0, 1).
    """

    gamma: float
    beta: float
    prefactor: float
    white_floor: float
    f_lo: float
    f_hi: float
    n_bins: int


@dataclass(frozen=True)
class FitRange:
    tau_minus: float
    tau_plus: float
    n_bins: int


# --------------------------------------------------------------------------
# autocorrelation


def sample_acf(series, max_lag: int) -> AcfCurve:
    """Autocorrelation of a sign series via FFT, lags 1..max_lag.

    Estimator: C(tau) = sum_t e_t e_{t+tau} / (n_eps - tau). No mean is
    subtracted, matching the convention for balanced +-1 flows.
    """
    eps = series.signs if isinstance(series, SignSeries) else np.asarray(series)
    n = eps.size
    if n < 2:
        raise SeriesTooShort(f"need at least 2 observations, got {n}")
    if not 1 <= max_lag < n:
        raise LagOutOfRange(f"max_lag must lie in [1, {n - 1}], got {max_lag}")
    x = eps.astype(np.float64)
    m = next_fast_len(2 * n)
    fx = rfft(x, m)
    raw = irfft(fx * np.conj(fx), m)[1 : max_lag + 1]
    lags = np.arange(1, max_lag + 1)
    values = raw / (n - lags)
    return AcfCurve(lags=lags, values=values, n_eps=n)


def log_bin(x, y, bins_per_decade: int = 20) -> BinnedCurve:
    """Average a curve into logarithmic bins.

    Bin index is floor(log10(x) * bins_per_decade); abscissa is the
    geometric mean of member x, ordinate the plain mean of member y.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0:
        raise SeriesTooShort("cannot bin an empty curve")
    idx = np.floor(np.log10(x) * bins_per_decade).astype(np.int64)
    uniq, inv = np.unique(idx, return_inverse=True)
    counts = np.bincount(inv)
    sx = np.bincount(inv, weights=np.log10(x))
    sy = np.bincount(inv, weights=y)
    return BinnedCurve(
        x=10.0 ** (sx / counts),
        y=sy / counts,
        width=counts,
    )


@dataclass(frozen=True)
class FitRangeConfig:
    """Controls for picking the power-law window on a binned ACF.

    head: smallest lag ever admitted, cuts the discrete small-lag regime.
    floor_mult: z in the per-bin detection floor z * (1/sqrt(n_eps)) / sqrt(w).
    mono_tol: q in the run tolerance q / sqrt(n_eps) for nonincreasing bins.
    cap_fraction: largest admitted lag as a fraction of the series length.
    """

    head: float = 8.0
    floor_mult: float = 2.0
    mono_tol: float = 2.0
    cap_fraction: float = 0.1
    min_bins: int = 5
    min_decades: float = 1.0


def select_fit_range(
    binned: BinnedCurve, n_eps: int, config: FitRangeConfig | None = None
) -> FitRange:
    """Choose [tau_minus, tau_plus] where the binned ACF behaves like a power law.

    Scans for maximal runs of positive bins that are nonincreasing within a
    per-lag noise tolerance, keeps the run spanning the most decades, then
    retreats the upper end to the last bin above its width-aware noise floor.
    Binning averages the per-lag noise down by sqrt(bin width), so deep lags
    stay informative far beyond the single-lag detection floor.
    """
    cfg = config or FitRangeConfig()
    keep = binned.x <= cfg.cap_fraction * n_eps
    bx, bv, bw = binned.x[keep], binned.y[keep], binned.width[keep]
    nb = bx.size
    if nb < cfg.min_bins:
        raise NoPowerLawRegion("too few bins below the lag cap")
    per_lag = cfg.mono_tol / math.sqrt(n_eps)
    sigma = (1.0 / math.sqrt(n_eps)) / np.sqrt(bw)

    runs = []
    start = 0
    for j in range(nb):
        bad = bv[j] <= 0 or (j > start and bv[j] > bv[j - 1] + per_lag)
        if bad:
            if j - 1 > start:
                runs.append((start, j - 1))
            start = j + 1 if bv[j] <= 0 else j
    if nb - 1 > start:
        runs.append((start, nb - 1))
    if not runs:
        raise NoPowerLawRegion("no decaying stretch above zero")

    i0, i1 = max(runs, key=lambda r: bx[r[1]] / bx[r[0]])
    above = np.flatnonzero(bv[i0 : i1 + 1] > cfg.floor_mult * sigma[i0 : i1 + 1])
    if above.size == 0:
        raise NoPowerLawRegion("selected run never rises above the noise floor")
    i1 = i0 + above[-1]

    tau_minus = max(bx[i0], cfg.head)
    tau_plus = bx[i1]
    sel = (bx >= tau_minus) & (bx <= tau_plus) & (bv > 0)
    if sel.sum() < cfg.min_bins or tau_plus / tau_minus < 10.0 ** cfg.min_decades:
        raise NoPowerLawRegion(
            f"window [{tau_minus:.1f}, {tau_plus:.1f}] too narrow for a fit"
        )
    return FitRange(tau_minus=float(tau_minus), tau_plus=float(tau_plus), n_bins=int(sel.sum()))


# --------------------------------------------------------------------------
# relative nonlinear least squares


def _profiled_objective(g: float, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    z = y * x**g
    c0 = float((z * z).sum() / z.sum())
    r = z / c0 - 1.0
    return float((r * r).sum()), c0


def fit_relative_nlls(
    x, y, bracket_width: float = 3.0, xatol: float = 1e-11
) -> PowerLawFit:
    """Fit y = c0 * x**(-g) minimizing relative residuals (y - m) / m.

    The prefactor has a closed form at fixed exponent, c0 = sum(z^2)/sum(z)
    with z = y * x**g, so only the exponent is searched, by bounded scalar
    minimization around a log-log regression start.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 3:
        raise FitDiverged(f"need at least 3 points, got {x.size}")
    if np.any(y <= 0):
        raise NonPositiveValue("relative residuals require strictly positive values")
    g0 = -float(np.polyfit(np.log10(x), np.log10(y), 1)[0])
    lo, hi = g0 - bracket_width, g0 + bracket_width
    res = minimize_scalar(
        lambda g: _profiled_objective(g, x, y)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xatol},
    )
    if not res.success or not np.isfinite(res.fun):
        raise FitDiverged("exponent search did not converge")
    g = float(res.x)
    edge = 1e-6 * (hi - lo)
    if g - lo < edge or hi - g < edge:
        raise FitDiverged(f"exponent pinned to search boundary near {g:.3f}")
    obj, c0 = _profiled_objective(g, x, y)
    return PowerLawFit(
        prefactor=c0,
        exponent=g,
        n_points=int(x.size),
        x_min=float(x.min()),
        x_max=float(x.max()),
        objective=obj,
    )


def refit_prefactor(x, y, exponent: float) -> float:
    """Closed-form prefactor of y = c0 * x**(-exponent) at a fixed exponent."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(y <= 0):
        raise NonPositiveValue("relative residuals require strictly positive values")
    z = y * x**exponent
    return float((z * z).sum() / z.sum())


# --------------------------------------------------------------------------
# spectral route


@dataclass(frozen=True)
class PsdConfig:
    """Welch settings and band rules for the spectral exponent.

    Segment length defaults to n/16 rounded down to a power of two and
    clamped; drop_bins removes the lowest bins where window smearing of
    sub-resolution power distorts the density.
    """

    nperseg: int | None = None
    min_nperseg: int = 8192
    max_nperseg: int = 65536
    drop_bins: int = 2
    hi_fraction: float = 0.25
    min_excess: float = 0.25
    floor_mult: float = 2.0
    bins_per_decade: int = 20
    min_bins: int = 6

    def segment_length(self, n: int) -> int:
        if self.nperseg is not None:
            return min(self.nperseg, n)
        raw = max(2, n // 16)
        p = 2 ** int(math.floor(math.log2(raw)))
        return max(min(p, self.max_nperseg), min(self.min_nperseg, n))


def psd_estimate(series, config: PsdConfig | None = None) -> PsdCurve:
    """Two-sided Welch density of a sign series, Hann window, 50% overlap.

    The series mean is removed once globally; segments are not detrended so
    genuine low-frequency power is preserved.
    """
    cfg = config or PsdConfig()
    eps = series.signs if isinstance(series, SignSeries) else np.asarray(series)
    x = eps.astype(np.float64)
    n = x.size
    nperseg = cfg.segment_length(n)
    if n < 2 * nperseg:
        raise SeriesTooShort(
            f"need at least {2 * nperseg} observations for two segments, got {n}"
        )
    x = x - x.mean()
    freqs, dens = signal.welch(
        x,
        fs=1.0,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
    )
    n_segments = (n - nperseg) // (nperseg - nperseg // 2) + 1
    return PsdCurve(
        freqs=freqs[1:],
        density=dens[1:] / 2.0,
        n_segments=int(n_segments),
        nperseg=nperseg,
        n_eps=n,
    )


def fit_psd_gamma(curve: PsdCurve, config: PsdConfig | None = None) -> PsdFit:
    """Exponent of the low-frequency excess over the white floor.

    Subtracts the high-frequency median density, log-bins the excess, keeps
    the leading band where it clears both a width-aware noise floor and a
    minimum excess over white, and fits f**(-beta). gamma = 1 - beta; the
    lag-domain prefactor follows from the Fourier pair of c0 |tau|**(-gamma).
    """
    cfg = config or PsdConfig()
    f = curve.freqs[cfg.drop_bins :]
    S = curve.density[cfg.drop_bins :]
    if f.size < cfg.min_bins:
        raise NoLrcDetected("spectrum has too few bins after dropping the lowest")
    white = float(np.median(S[f >= f.max() * (1.0 - cfg.hi_fraction)]))
    excess = S - white

    u = f / f[0]
    bd = log_bin(u, excess, cfg.bins_per_decade)
    bs = log_bin(u, S, cfg.bins_per_decade)
    bf = bd.x * f[0]
    sigma = bs.y / math.sqrt(curve.n_segments) / np.sqrt(bd.width)
    ok = (bd.y > cfg.floor_mult * sigma) & (bs.y > (1.0 + cfg.min_excess) * white)
    stop = np.flatnonzero(~ok)
    last = int(stop[0]) if stop.size else ok.size
    if last < cfg.min_bins:
        raise NoLrcDetected("no band rises above the white floor")

    fit = fit_relative_nlls(bf[:last], bd.y[:last])
    beta = fit.exponent
    if beta <= 0:
        raise NoLrcDetected(f"spectrum does not decay toward low frequency, beta={beta:.3f}")
    g = 1.0 - beta
    c0 = psd_prefactor_to_acf(fit.prefactor, g)
    return PsdFit(
        gamma=g,
        beta=beta,
        prefactor=c0,
        white_floor=white,
        f_lo=float(bf[0]),
        f_hi=float(bf[last - 1]),
        n_bins=last,
    )


def psd_prefactor_to_acf(amplitude: float, gamma: float) -> float:
    """Convert a fitted density amplitude a * f**-(1-gamma) to the ACF prefactor.

    Fourier pair: C(tau) = c0 |tau|**(-gamma) corresponds to a two-sided
    density 2 c0 Gamma(1-gamma) sin(pi gamma / 2) |2 pi f|**(gamma-1).
    Returns NaN outside 0 < gamma < 1 where the pair does not apply.
    """
    if not 0.0 < gamma < 1.0:
        return float("nan")
    beta = 1.0 - gamma
    return (
        amplitude
        * (2.0 * math.pi) ** beta
        / (2.0 * _gamma_fn(1.0 - gamma) * math.sin(math.pi * gamma / 2.0))
    )


def refit_psd_prefactor(curve: PsdCurve, gamma: float, config: PsdConfig | None = None) -> float:
    """ACF prefactor implied by the spectral band at a fixed exponent."""
    cfg = config or PsdConfig()
    f = curve.freqs[cfg.drop_bins :]
    S = curve.density[cfg.drop_bins :]
    white = float(np.median(S[f >= f.max() * (1.0 - cfg.hi_fraction)]))
    excess = S - white
    u = f / f[0]
    bd = log_bin(u, excess, cfg.bins_per_decade)
    bs = log_bin(u, S, cfg.bins_per_decade)
    bf = bd.x * f[0]
    sigma = bs.y / math.sqrt(curve.n_segments) / np.sqrt(bd.width)
    ok = (bd.y > cfg.floor_mult * sigma) & (bs.y > (1.0 + cfg.min_excess) * white)
    stop = np.flatnonzero(~ok)
    last = int(stop[0]) if stop.size else ok.size
    if last < cfg.min_bins:
        raise NoLrcDetected("no band rises above the white floor")
    amp = refit_prefactor(bf[:last], bd.y[:last], 1.0 - gamma)
    return psd_prefactor_to_acf(amp, gamma)


# --------------------------------------------------------------------------
# bias table


@dataclass(frozen=True)
class BiasTableConfig:
    """Calibration grid for finite-size bias of both exponent routes.

    Cells simulate homogeneous splitting flows on a grid of true exponent,
    series length, and trader count; each cell records the mean measured
    exponent and the mean log10 offset of the refit prefactor from its
    asymptotic value. reps_short applies to the shortest series in the
    length grid, reps_long to the rest.
    """

    gamma_grid: tuple[float, ...] = (0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9)
    n_eps_grid: tuple[int, ...] = (1_000_000, 10_000_000)
    n_st_grid: tuple[int, ...] = (50, 100, 200)
    reps_short: int = 12
    reps_long: int = 8
    master_seed: int = 20240601
    methods: tuple[str, ...] = ("acf", "psd")
    min_valid_fraction: float = 0.5

    def reps_for(self, n_eps: int) -> int:
        return self.reps_short if n_eps <= min(self.n_eps_grid) else self.reps_long

    def canonical(self) -> dict:
        return {
            "gamma_grid": list(self.gamma_grid),
            "n_eps_grid": list(self.n_eps_grid),
            "n_st_grid": list(self.n_st_grid),
            "reps_short": self.reps_short,
            "reps_long": self.reps_long,
            "master_seed": self.master_seed,
            "methods": list(self.methods),
            "min_valid_fraction": self.min_valid_fraction,
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class BiasTable:
    """Measured response of each exponent route on calibration simulations.

    gamma_map[method] has shape (G, E, S) over (gamma_grid, n_eps_grid,
    n_st_grid) and holds the mean measured exponent; c0_offset[method] the
    mean log10 ratio of the prefactor refit at the true exponent to the
    asymptotic prefactor for that trader count. NaN marks unusable cells.
    """

    config: BiasTableConfig
    gamma_map: dict[str, np.ndarray]
    c0_offset: dict[str, np.ndarray]
    valid_fraction: dict[str, np.ndarray]
    config_hash: str = field(default="")

    def __post_init__(self):
        if not self.config_hash:
            self.config_hash = self.config.digest()


@dataclass(frozen=True)
class DebiasResult:
    gamma: float
    c0_offset_log10: float
    clipped: bool


def _measure_acf(dp, gamma_true: float, n_st: int):
    from .simulate import theoretical_prefactor

    acf = sample_acf(dp.sign_series(), max_lag=dp.n_events // 10)
    binned = log_bin(acf.lags, acf.values)
    rng_cfg = FitRangeConfig()
    fr = select_fit_range(binned, acf.n_eps, rng_cfg)
    sel = (binned.x >= fr.tau_minus) & (binned.x <= fr.tau_plus) & (binned.y > 0)
    x, v = binned.x[sel], binned.y[sel]
    fit = fit_relative_nlls(x, v)
    c0_true = refit_prefactor(x, v, gamma_true)
    off = math.log10(c0_true / theoretical_prefactor(1.0 + gamma_true, n_st))
    return fit.exponent, off


def _measure_psd(dp, gamma_true: float, n_st: int):
    from .simulate import theoretical_prefactor

    curve = psd_estimate(dp.sign_series())
    fit = fit_psd_gamma(curve)
    c0_true = refit_psd_prefactor(curve, gamma_true)
    if not np.isfinite(c0_true) or c0_true <= 0:
        return fit.gamma, float("nan")
    off = math.log10(c0_true / theoretical_prefactor(1.0 + gamma_true, n_st))
    return fit.gamma, off


def build_bias_table(config: BiasTableConfig | None = None, progress: bool = False) -> BiasTable:
    """Simulate every calibration cell and record both routes' responses.

    One simulation per (cell, rep) serves both methods. Reps that raise a
    fit or detection error contribute NaN and are excluded from the cell
    mean; the valid fraction is stored alongside.
    """
    from .simulate import SimConfig, simulate

    cfg = config or BiasTableConfig()
    G, E, S = len(cfg.gamma_grid), len(cfg.n_eps_grid), len(cfg.n_st_grid)
    shape = (G, E, S)
    sums = {m: np.zeros(shape) for m in cfg.methods}
    offs = {m: np.zeros(shape) for m in cfg.methods}
    cnts = {m: np.zeros(shape) for m in cfg.methods}
    ocnt = {m: np.zeros(shape) for m in cfg.methods}
    reps_total = {m: np.zeros(shape) for m in cfg.methods}

    measurers = {"acf": _measure_acf, "psd": _measure_psd}
    for ig, g in enumerate(cfg.gamma_grid):
        for ie, n_eps in enumerate(cfg.n_eps_grid):
            reps = cfg.reps_for(n_eps)
            for isn, n_st in enumerate(cfg.n_st_grid):
                for rep in range(reps):
                    seed = derive_seed(
                        cfg.master_seed, "bias", f"{g:.6f}", n_eps, n_st, rep
                    )
                    dp = simulate(
                        SimConfig(n_st=n_st, alpha=1.0 + g, n_steps=n_eps, seed=seed)
                    )
                    for m in cfg.methods:
                        reps_total[m][ig, ie, isn] += 1
                        try:
                            gm, off = measurers[m](dp, g, n_st)
                        except (NoPowerLawRegion, NoLrcDetected, FitDiverged,
                                NonPositiveValue, SeriesTooShort):
                            continue
                        sums[m][ig, ie, isn] += gm
                        cnts[m][ig, ie, isn] += 1
                        if np.isfinite(off):
                            offs[m][ig, ie, isn] += off
                            ocnt[m][ig, ie, isn] += 1
                if progress:
                    print(
                        f"bias cell gamma={g} n_eps={n_eps} n_st={n_st} done",
                        flush=True,
                    )

    gamma_map, c0_offset, valid = {}, {}, {}
    for m in cfg.methods:
        with np.errstate(invalid="ignore"):
            gamma_map[m] = np.where(cnts[m] > 0, sums[m] / np.maximum(cnts[m], 1), np.nan)
            c0_offset[m] = np.where(ocnt[m] > 0, offs[m] / np.maximum(ocnt[m], 1), np.nan)
            valid[m] = cnts[m] / reps_total[m]
        low = valid[m] < cfg.min_valid_fraction
        gamma_map[m][low] = np.nan
        c0_offset[m][low] = np.nan
    return BiasTable(
        config=cfg, gamma_map=gamma_map, c0_offset=c0_offset, valid_fraction=valid
    )


def save_bias_table(table: BiasTable, path) -> None:
    payload = {
        "config": table.config.canonical(),
        "config_hash": table.config_hash,
        "gamma_map": {m: a.tolist() for m, a in table.gamma_map.items()},
        "c0_offset": {m: a.tolist() for m, a in table.c0_offset.items()},
        "valid_fraction": {m: a.tolist() for m, a in table.valid_fraction.items()},
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def load_bias_table(path) -> BiasTable:
    payload = json.loads(Path(path).read_text())
    c = payload["config"]
    cfg = BiasTableConfig(
        gamma_grid=tuple(c["gamma_grid"]),
        n_eps_grid=tuple(c["n_eps_grid"]),
        n_st_grid=tuple(c["n_st_grid"]),
        reps_short=c["reps_short"],
        reps_long=c["reps_long"],
        master_seed=c["master_seed"],
        methods=tuple(c["methods"]),
        min_valid_fraction=c["min_valid_fraction"],
    )
    table = BiasTable(
        config=cfg,
        gamma_map={m: np.array(a) for m, a in payload["gamma_map"].items()},
        c0_offset={m: np.array(a) for m, a in payload["c0_offset"].items()},
        valid_fraction={m: np.array(a) for m, a in payload["valid_fraction"].items()},
        config_hash=payload["config_hash"],
    )
    if table.config_hash != cfg.digest():
        raise OutOfCalibration("bias table file does not match its stored config")
    return table


def default_cache_dir() -> Path:
    env = os.environ.get("SPLITFLOW_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "splitflow"


def _packaged_table_path(digest: str) -> Path | None:
    here = Path(__file__).parent / "data" / f"bias_table_{digest}.json"
    return here if here.exists() else None


def load_or_build_bias_table(
    config: BiasTableConfig | None = None,
    cache_dir=None,
    progress: bool = False,
) -> BiasTable:
    """Return the calibration table, from package data or cache if available.

    Lookup order: table shipped with the package for this exact config,
    then the cache directory (SPLITFLOW_CACHE_DIR or ~/.cache/splitflow),
    then a fresh deterministic build which is written to the cache.
    """
    cfg = config or BiasTableConfig()
    digest = cfg.digest()
    packaged = _packaged_table_path(digest)
    if packaged is not None:
        return load_bias_table(packaged)
    cdir = Path(cache_dir) if cache_dir else default_cache_dir()
    cached = cdir / f"bias_table_{digest}.json"
    if cached.exists():
        return load_bias_table(cached)
    table = build_bias_table(cfg, progress=progress)
    cdir.mkdir(parents=True, exist_ok=True)
    save_bias_table(table, cached)
    return table


# --------------------------------------------------------------------------
# debias


def _axis_weights(grid: np.ndarray, value: float) -> tuple[int, int, float, bool]:
    """Indices and weight for linear interpolation along one axis, clamped."""
    if value <= grid[0]:
        return 0, 0, 0.0, bool(value < grid[0])
    if value >= grid[-1]:
        return len(grid) - 1, len(grid) - 1, 0.0, bool(value > grid[-1])
    j = int(np.searchsorted(grid, value, side="right")) - 1
    w = (value - grid[j]) / (grid[j + 1] - grid[j])
    return j, j + 1, float(w), False


def _interp_column(arr: np.ndarray, n_eps: float, n_st: float, cfg: BiasTableConfig):
    """Interpolate the (gamma,) column of a (G, E, S) array in log10 of both axes."""
    le = np.log10(np.array(cfg.n_eps_grid, dtype=float))
    ls = np.log10(np.array(cfg.n_st_grid, dtype=float))
    e0, e1, we, ce = _axis_weights(le, math.log10(n_eps))
    s0, s1, ws, cs = _axis_weights(ls, math.log10(n_st))
    col = (
        arr[:, e0, s0] * (1 - we) * (1 - ws)
        + arr[:, e1, s0] * we * (1 - ws)
        + arr[:, e0, s1] * (1 - we) * ws
        + arr[:, e1, s1] * we * ws
    )
    return col, ce or cs


def debias_gamma(
    gamma_meas: float,
    n_eps: int,
    table: BiasTable,
    method: str = "acf",
    n_st: float | None = None,
) -> DebiasResult:
    """Invert the calibrated exponent response at a given length and trader count.

    The response column is interpolated in log10(n_eps) and log10(n_st),
    forced nondecreasing, and inverted piecewise linearly. A measurement
    within one grid step outside the calibrated image is clamped to the
    edge and flagged; farther out raises OutOfCalibration. The prefactor
    offset is interpolated at the debiased exponent.
    """
    cfg = table.config
    if method not in table.gamma_map:
        raise OutOfCalibration(f"no calibration for method {method!r}")
    if n_st is None:
        n_st = float(np.median(np.array(cfg.n_st_grid, dtype=float)))
    col, axis_clip = _interp_column(table.gamma_map[method], n_eps, n_st, cfg)
    if np.any(~np.isfinite(col)):
        raise CellUnusable("calibration column contains unusable cells")
    grid = np.array(cfg.gamma_grid, dtype=float)
    mono = np.maximum.accumulate(col) + 1e-9 * np.arange(col.size)
    step = float(np.diff(grid).max())

    clipped = axis_clip
    if gamma_meas < mono[0]:
        slope = (mono[1] - mono[0]) / (grid[1] - grid[0])
        overshoot = (mono[0] - gamma_meas) / slope
        if overshoot > step:
            raise OutOfCalibration(
                f"measured exponent {gamma_meas:.3f} below calibrated image"
            )
        g_true = float(grid[0])
        clipped = True
    elif gamma_meas > mono[-1]:
        slope = (mono[-1] - mono[-2]) / (grid[-1] - grid[-2])
        overshoot = (gamma_meas - mono[-1]) / slope
        if overshoot > step:
            raise OutOfCalibration(
                f"measured exponent {gamma_meas:.3f} above calibrated image"
            )
        g_true = float(grid[-1])
        clipped = True
    else:
        g_true = float(np.interp(gamma_meas, mono, grid))

    off_col, _ = _interp_column(table.c0_offset[method], n_eps, n_st, cfg)
    off = float(np.interp(g_true, grid, off_col))
    return DebiasResult(gamma=g_true, c0_offset_log10=off, clipped=bool(clipped))
