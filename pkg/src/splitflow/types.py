"""Core domain types: order events, sign series, market datapoints.

A datapoint is one market's chronological stream of signed orders.  Events
are stored columnarly (numpy arrays plus a dictionary-encoded trader id
table) so that streams of 10^7 events stay cheap; :class:`OrderEvent` is
the per-row view used at API boundaries and in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import EmptyDatapoint

__all__ = [
    "OrderEvent",
    "SignSeries",
    "MarketDatapoint",
    "TraderLabel",
    "series_from_events",
]


@dataclass(frozen=True)
class OrderEvent:
    """One market order.

    Parameters
    ----------
    seq_index : int
        Position in the market-wide chronological sequence. Strictly
        increasing within a datapoint but not necessarily contiguous
        (session trimming leaves gaps).
    trader_id : str
        Account identifier, opaque.
    sign : int
        +1 for buy, -1 for sell.
    day_index : int or None
        Business-day ordinal, or None when the feed has no dates.
    """

    seq_index: int
    trader_id: str
    sign: int
    day_index: Optional[int] = None

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")


@dataclass(frozen=True)
class SignSeries:
    """Chronological +-1 sign sequence of one datapoint."""

    signs: np.ndarray  # int8, values in {-1, +1}

    def __post_init__(self):
        arr = np.asarray(self.signs, dtype=np.int8)
        if arr.ndim != 1:
            raise ValueError("signs must be one-dimensional")
        if arr.size == 0:
            raise EmptyDatapoint("sign series requires at least one event")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(self, "signs", arr)

    @property
    def n_eps(self) -> int:
        return int(self.signs.size)

    def __len__(self) -> int:
        return self.n_eps


class MarketDatapoint:
    """One market-datapoint: a chronological stream of signed orders.

    Construction validates ordering invariants once; the arrays are then
    treated as immutable.

    Parameters
    ----------
    label : str
        Datapoint identifier (file stem, or simulation label).
    seq : ndarray of int64
        Strictly increasing sequence indices.
    trader_codes : ndarray of int32
        Per-event index into ``trader_table``.
    trader_table : ndarray of str
        Unique trader identifiers, indexed by code.
    signs : ndarray of int8
        Per-event +-1 signs.
    day_index : ndarray of int64, optional
        Per-event business-day ordinals, non-decreasing.
    truth : SimTruth, optional
        Generating-model ground truth for synthetic datapoints.
    """

    __slots__ = ("label", "seq", "trader_codes", "trader_table", "signs",
                 "day_index", "truth")

    def __init__(self, label, seq, trader_codes, trader_table, signs,
                 day_index=None, truth=None):
        seq = np.asarray(seq, dtype=np.int64)
        trader_codes = np.asarray(trader_codes, dtype=np.int32)
        signs = np.asarray(signs, dtype=np.int8)
        trader_table = np.asarray(trader_table)
        if seq.size == 0:
            raise EmptyDatapoint(f"datapoint {label!r} has no events")
        n = seq.size
        if not (trader_codes.size == n and signs.size == n):
            raise ValueError("column lengths disagree")
        if np.any(np.diff(seq) <= 0):
            raise ValueError("seq indices must be strictly increasing")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +1 or -1")
        if trader_codes.size and (trader_codes.min() < 0
                                  or trader_codes.max() >= trader_table.size):
            raise ValueError("trader code outside table")
        if day_index is not None:
            day_index = np.asarray(day_index, dtype=np.int64)
            if day_index.size != n:
                raise ValueError("column lengths disagree")
            if np.any(np.diff(day_index) < 0):
                raise ValueError("day indices must be non-decreasing")
        self.label = label
        self.seq = seq
        self.trader_codes = trader_codes
        self.trader_table = trader_table
        self.signs = signs
        self.day_index = day_index
        self.truth = truth

    # --- constructors -------------------------------------------------

    @classmethod
    def from_events(cls, label: str, events: Sequence[OrderEvent],
                    truth=None) -> "MarketDatapoint":
        """Build a datapoint from a sequence of :class:`OrderEvent`."""
        if len(events) == 0:
            raise EmptyDatapoint(f"datapoint {label!r} has no events")
        seq = np.fromiter((e.seq_index for e in events), dtype=np.int64,
                          count=len(events))
        ids = np.array([str(e.trader_id) for e in events])
        table, codes = np.unique(ids, return_inverse=True)
        signs = np.fromiter((e.sign for e in events), dtype=np.int8,
                            count=len(events))
        days = None
        if events[0].day_index is not None:
            if any(e.day_index is None for e in events):
                raise ValueError("day_index must be set on all events or none")
            days = np.fromiter((e.day_index for e in events), dtype=np.int64,
                               count=len(events))
        elif any(e.day_index is not None for e in events):
            raise ValueError("day_index must be set on all events or none")
        return cls(label, seq, codes.astype(np.int32), table, signs,
                   day_index=days, truth=truth)

    # --- accessors ----------------------------------------------------

    @property
    def n_events(self) -> int:
        return int(self.seq.size)

    @property
    def n_traders(self) -> int:
        return int(np.unique(self.trader_codes).size)

    @property
    def trader_ids(self) -> np.ndarray:
        """Per-event trader id strings (materialized on demand)."""
        return self.trader_table[self.trader_codes]

    def events(self) -> Iterator[OrderEvent]:
        """Iterate events as :class:`OrderEvent` rows (slow path)."""
        days = self.day_index
        table = self.trader_table
        for i in range(self.n_events):
            yield OrderEvent(
                seq_index=int(self.seq[i]),
                trader_id=str(table[self.trader_codes[i]]),
                sign=int(self.signs[i]),
                day_index=None if days is None else int(days[i]),
            )

    def sign_series(self) -> SignSeries:
        return SignSeries(self.signs)

    def __repr__(self):
        return (f"MarketDatapoint(label={self.label!r}, "
                f"n_events={self.n_events}, n_traders={self.n_traders})")


def series_from_events(events) -> SignSeries:
    """Chronological sign series of a datapoint or event sequence.

    Parameters
    ----------
    events : MarketDatapoint or sequence of OrderEvent
        Must contain at least one event; order is preserved exactly.

    Returns
    -------
    SignSeries

    Raises
    ------
    EmptyDatapoint
        If there are no events.
    """
    if isinstance(events, MarketDatapoint):
        return events.sign_series()
    if len(events) == 0:
        raise EmptyDatapoint("no events")
    signs = np.fromiter((e.sign for e in events), dtype=np.int8,
                        count=len(events))
    return SignSeries(signs)


@dataclass(frozen=True)
class TraderLabel:
    """Classification of one trader within one datapoint.

    ``p_value`` is the exact upper-tail binomial probability of the
    observed continuation count; traders below the order-count floor are
    noise traders by definition and carry ``p_value = 1.0``.
    """

    trader_id: str
    cls: str                  # "ST" or "RT"
    p_value: float
    n_orders: int
    k_continuations: int = 0

    def __post_init__(self):
        if self.cls not in ("ST", "RT"):
            raise ValueError(f"cls must be 'ST' or 'RT', got {self.cls!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p_value must lie in [0, 1]")
        if self.n_orders < 1:
            raise ValueError("n_orders must be >= 1")
