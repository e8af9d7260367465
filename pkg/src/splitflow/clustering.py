"""Per-trader order-flow clustering and the splitting-trader test.

A trader's chronological order signs are segmented into maximal same-sign
runs, broken additionally when more than one calendar day separates two
orders. Under the null of independent coin-flip signs the number of
same-sign adjacencies is Binomial(n-1, 1/2); traders whose adjacency count
is improbably high are labeled splitting traders.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
from scipy.stats import binom as _binom

from .errors import EmptyTrader
from .types import MarketDatapoint, TraderLabel

__all__ = [
    "ClusteringConfig",
    "MetaorderRecord",
    "ClusteringSummary",
    "segment_metaorders",
    "continuation_count",
    "binomial_tail_p",
    "binomial_test_trader",
    "classify_traders",
    "market_clustering_summary",
]

# largest n-1 handled by exact integer arithmetic before switching to scipy
_EXACT_LIMIT = 4096


@dataclass(frozen=True)
class ClusteringConfig:
    """Decision rule parameters.

    theta: tail probability below which a trader is labeled splitting.
    min_orders: traders with fewer orders are labeled regular outright,
    the test has no power there.
    """

    theta: float = 0.01
    min_orders: int = 8
    day_gap_break: int = 1


@dataclass(frozen=True)
class MetaorderRecord:
    """One reconstructed same-sign run of a single trader."""

    trader_id: str
    start_seq: int
    length: int
    sign: int


@dataclass(frozen=True)
class ClusteringSummary:
    n_traders: int
    n_st: int
    st_trader_fraction: float
    st_event_fraction: float


def _break_mask(signs: np.ndarray, days: np.ndarray | None, max_gap: int) -> np.ndarray:
    """True where order i starts a new run relative to order i-1."""
    brk = signs[1:] != signs[:-1]
    if days is not None:
        brk = brk | (np.diff(days) > max_gap)
    return brk


def segment_metaorders(signs, days=None, max_day_gap: int = 1) -> np.ndarray:
    """Lengths of maximal same-sign runs, split at day gaps above max_day_gap.

    Runs capture reconstructed metaorder pieces: [+1,+1,-1,+1,+1,+1] gives
    [2, 1, 3], and a two-day silence splits a run even if the sign persists.
    """
    signs = np.asarray(signs)
    if signs.size == 0:
        raise EmptyTrader("cannot segment a trader with no orders")
    if signs.size == 1:
        return np.array([1], dtype=np.int64)
    days = None if days is None else np.asarray(days)
    brk = _break_mask(signs, days, max_day_gap)
    bounds = np.flatnonzero(brk) + 1
    edges = np.concatenate(([0], bounds, [signs.size]))
    return np.diff(edges).astype(np.int64)


def continuation_count(signs, days=None, max_day_gap: int = 1) -> int:
    """Number of adjacent order pairs that continue a run."""
    signs = np.asarray(signs)
    if signs.size == 0:
        raise EmptyTrader("cannot count continuations for a trader with no orders")
    if signs.size == 1:
        return 0
    days = None if days is None else np.asarray(days)
    return int(signs.size - 1 - _break_mask(signs, days, max_day_gap).sum())


@lru_cache(maxsize=16)
def _exact_tail_table(m: int) -> tuple[float, ...]:
    """P(Bin(m, 1/2) >= K) for K = 0..m, exact integer suffix sums."""
    row = [0] * (m + 1)
    c = 1
    for j in range(m + 1):
        row[j] = c
        c = c * (m - j) // (j + 1)
    denom = 1 << m
    acc = 0
    out = [0.0] * (m + 1)
    for k in range(m, -1, -1):
        acc += row[k]
        out[k] = float(Fraction(acc, denom))
    return tuple(out)


def binomial_tail_p(k: int, m: int) -> float:
    """P(Bin(m, 1/2) >= k).

    Exact big-integer arithmetic up to m = 4096, scipy's survival function
    beyond; the two agree to well under 1e-12 at the crossover.
    """
    if m < 0 or not 0 <= k <= m + 1:
        raise ValueError(f"need 0 <= k <= m+1, got k={k} m={m}")
    if k == 0:
        return 1.0
    if k > m:
        return 0.0
    if m <= _EXACT_LIMIT:
        return _exact_tail_table(m)[k]
    return float(_binom.sf(k - 1, m, 0.5))


def binomial_test_trader(
    trader_id: str,
    signs,
    days=None,
    config: ClusteringConfig | None = None,
) -> TraderLabel:
    """Label one trader by the adjacency test.

    Traders below min_orders are regular by fiat with p = 1. Otherwise the
    p-value is the chance a coin-flip trader shows at least as many run
    continuations among its n-1 adjacent pairs.
    """
    cfg = config or ClusteringConfig()
    signs = np.asarray(signs)
    if signs.size == 0:
        raise EmptyTrader(f"trader {trader_id!r} has no orders")
    n = int(signs.size)
    k = continuation_count(signs, days, cfg.day_gap_break)
    if n < cfg.min_orders:
        return TraderLabel(
            trader_id=trader_id, cls="RT", p_value=1.0, n_orders=n, k_continuations=k
        )
    p = binomial_tail_p(k, n - 1)
    cls = "ST" if p < cfg.theta else "RT"
    return TraderLabel(
        trader_id=trader_id, cls=cls, p_value=p, n_orders=n, k_continuations=k
    )


def _iter_traders(dp: MarketDatapoint):
    order = np.argsort(dp.trader_codes, kind="stable")
    codes = dp.trader_codes[order]
    bounds = np.flatnonzero(np.diff(codes)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [codes.size]))
    for s, e in zip(starts, ends):
        idx = order[s:e]
        yield int(codes[s]), idx


def classify_traders(
    dp: MarketDatapoint, config: ClusteringConfig | None = None
) -> list[TraderLabel]:
    """Run the adjacency test on every trader in a datapoint."""
    cfg = config or ClusteringConfig()
    labels = []
    for code, idx in _iter_traders(dp):
        days = None if dp.day_index is None else dp.day_index[idx]
        labels.append(
            binomial_test_trader(dp.trader_table[code], dp.signs[idx], days, cfg)
        )
    return labels


def reconstruct_metaorders(
    dp: MarketDatapoint, trader_ids=None, config: ClusteringConfig | None = None
) -> list[MetaorderRecord]:
    """Segment selected traders' flows into metaorder records.

    trader_ids defaults to every trader; pass the splitting set to build
    the sample for tail exponent fitting.
    """
    cfg = config or ClusteringConfig()
    wanted = None if trader_ids is None else set(trader_ids)
    records = []
    for code, idx in _iter_traders(dp):
        tid = dp.trader_table[code]
        if wanted is not None and tid not in wanted:
            continue
        days = None if dp.day_index is None else dp.day_index[idx]
        lengths = segment_metaorders(dp.signs[idx], days, cfg.day_gap_break)
        pos = 0
        for ln in lengths:
            records.append(
                MetaorderRecord(
                    trader_id=tid,
                    start_seq=int(dp.seq[idx[pos]]),
                    length=int(ln),
                    sign=int(dp.signs[idx[pos]]),
                )
            )
            pos += ln
    return records


def market_clustering_summary(
    dp: MarketDatapoint, labels: list[TraderLabel]
) -> ClusteringSummary:
    """Trader and event shares of the splitting class."""
    st_ids = {lb.trader_id for lb in labels if lb.cls == "ST"}
    st_codes = {i for i, t in enumerate(dp.trader_table) if t in st_ids}
    if st_codes:
        mask = np.isin(dp.trader_codes, np.fromiter(st_codes, dtype=dp.trader_codes.dtype))
        ev_frac = float(mask.mean())
    else:
        ev_frac = 0.0
    n = len(labels)
    n_st = len(st_ids)
    return ClusteringSummary(
        n_traders=n,
        n_st=n_st,
        st_trader_fraction=n_st / n if n else 0.0,
        st_event_fraction=ev_frac,
    )
