"""Discrete power-law tail fitting for metaorder length samples.

Maximum likelihood for P(L = x) = x**(-s) / zeta(s, l_min) on integers
x >= l_min, with the tail start chosen by minimizing the Kolmogorov-
Smirnov distance over candidate cutoffs. Exponents are reported in the
survival convention P(L >= x) ~ x**(-alpha) with alpha = s - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._zeta import hurwitz_zeta
from .errors import DegenerateSample, InsufficientData

__all__ = ["TailFit", "empirical_ccdf", "discrete_mle", "clauset_fit"]

_MIN_SAMPLE = 50


@dataclass(frozen=True)
class TailFit:
    """Fitted tail of a discrete sample.

    alpha is the survival exponent; the fitted density exponent is
    alpha + 1. ks_stat is the KS distance on the tail at the chosen
    cutoff, n_tail the number of observations used.
    """

    alpha: float
    l_min: int
    ks_stat: float
    n_tail: int


def empirical_ccdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values and the empirical survival P(X >= x) at each."""
    v = np.asarray(values)
    if v.size == 0:
        raise InsufficientData("empty sample")
    x = np.unique(v)
    # count of observations >= each distinct value
    idx = np.searchsorted(np.sort(v), x, side="left")
    return x, (v.size - idx) / v.size


def _score(s: float, n: int, sum_log: float, l_min: int) -> float:
    z, dz = hurwitz_zeta(s, l_min, with_derivative=True)
    return -sum_log - n * dz / z


def discrete_mle(tail: np.ndarray, l_min: int) -> float:
    """Density exponent s maximizing the discrete power-law likelihood.

    Solves the score equation by bracketed root finding; the continuous
    approximation s = 1 + n / sum(ln(L / (l_min - 1/2))) seeds the bracket.
    """
    n = tail.size
    sum_log = float(np.log(tail).sum())
    denom = sum_log - n * np.log(l_min - 0.5)
    if denom <= 0:
        raise DegenerateSample("tail carries no spread above the cutoff")
    s0 = 1.0 + n / denom
    lo = max(1.0 + 1e-8, s0 / 4.0)
    hi = max(s0 * 4.0, 4.0)
    flo = _score(lo, n, sum_log, l_min)
    while flo < 0 and lo > 1.0 + 1e-12:
        lo = 1.0 + (lo - 1.0) / 8.0
        flo = _score(lo, n, sum_log, l_min)
    fhi = _score(hi, n, sum_log, l_min)
    while fhi > 0 and hi < 512.0:
        hi *= 2.0
        fhi = _score(hi, n, sum_log, l_min)
    if flo < 0 or fhi > 0:
        raise DegenerateSample("score equation has no root in a sane exponent range")
    return float(brentq(_score, lo, hi, args=(n, sum_log, l_min), xtol=1e-10))


def _ks_distance(tail: np.ndarray, s: float, l_min: int) -> float:
    x, emp = empirical_ccdf(tail)
    model = hurwitz_zeta(s, x.astype(np.float64)) / hurwitz_zeta(s, l_min)
    return float(np.abs(emp - model).max())


def clauset_fit(lengths, l_min: int | None = None) -> TailFit:
    """Fit the tail, choosing the cutoff by KS minimization when not given.

    Candidate cutoffs are the distinct values up to the 90th percentile;
    candidates leaving fewer than 50 tail observations are skipped.
    """
    v = np.asarray(lengths, dtype=np.int64)
    if v.size < _MIN_SAMPLE:
        raise InsufficientData(f"need at least {_MIN_SAMPLE} observations, got {v.size}")
    if np.unique(v).size <= 1:
        raise DegenerateSample("sample has at most one distinct value")
    if np.any(v < 1):
        raise DegenerateSample("lengths must be positive integers")

    if l_min is not None:
        tail = v[v >= l_min]
        if tail.size < _MIN_SAMPLE:
            raise InsufficientData(
                f"cutoff {l_min} leaves {tail.size} tail observations"
            )
        s = discrete_mle(tail, l_min)
        return TailFit(
            alpha=s - 1.0,
            l_min=int(l_min),
            ks_stat=_ks_distance(tail, s, l_min),
            n_tail=int(tail.size),
        )

    cutoff_cap = np.quantile(v, 0.9)
    candidates = [int(c) for c in np.unique(v) if c <= cutoff_cap]
    best = None
    for cand in candidates:
        tail = v[v >= cand]
        if tail.size < _MIN_SAMPLE or np.unique(tail).size <= 1:
            continue
        try:
            s = discrete_mle(tail, cand)
        except DegenerateSample:
            continue
        ks = _ks_distance(tail, s, cand)
        if best is None or ks < best.ks_stat:
            best = TailFit(
                alpha=s - 1.0, l_min=cand, ks_stat=ks, n_tail=int(tail.size)
            )
    if best is None:
        raise DegenerateSample("no viable tail cutoff found")
    return best
