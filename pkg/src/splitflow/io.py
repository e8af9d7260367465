"""Reading and writing order-flow datapoints.

The interchange format is a CSV with columns seq, trader_id, sign, day and
an optional intraday time column. Signs accept +1/-1 or B/S. Day entries
are either integer ordinals or ISO dates; dates are converted to business
day ordinals so a weekend does not read as a trading silence. Simulated
datapoints carry their generating parameters in a JSON sidecar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ParseError
from .types import MarketDatapoint

__all__ = [
    "IngestionConfig",
    "read_order_csv",
    "write_order_csv",
    "write_truth_sidecar",
    "read_truth_sidecar",
    "truth_path_for",
]


@dataclass(frozen=True)
class IngestionConfig:
    """Filters applied while loading recorded flows.

    trim_minutes removes the opening and closing minutes of each day,
    where auction mechanics distort the flow; min_transactions is the
    smallest series length worth analyzing and is enforced by the
    pipeline, not the reader.
    """

    min_transactions: int = 500_000
    trim_minutes: float = 10.0


_SIGN_MAP = {"+1": 1, "1": 1, "B": 1, "b": 1, "-1": -1, "S": -1, "s": -1}


def _parse_signs(raw: pd.Series) -> np.ndarray:
    s = raw.astype(str).str.strip()
    mapped = s.map(_SIGN_MAP)
    if mapped.isna().any():
        row = int(mapped.index[mapped.isna()][0])
        raise ParseError(
            f"unrecognized sign {s.iloc[row]!r}", line_number=row + 2
        )
    return mapped.to_numpy(dtype=np.int8)


def _parse_days(raw: pd.Series) -> np.ndarray:
    s = raw.astype(str).str.strip()
    try:
        return s.astype(np.int64).to_numpy()
    except ValueError:
        pass
    try:
        dates = s.to_numpy(dtype="datetime64[D]")
    except ValueError as exc:
        raise ParseError(f"day column is neither integer nor ISO date: {exc}") from exc
    return np.busday_count(dates.min(), dates).astype(np.int64)


def _trim_day_edges(times: pd.Series, days: np.ndarray, minutes: float) -> np.ndarray:
    """Mask keeping rows at least `minutes` inside each day's observed span."""
    td = pd.to_timedelta(times.astype(str).str.strip())
    secs = td.dt.total_seconds().to_numpy()
    keep = np.ones(secs.size, dtype=bool)
    margin = minutes * 60.0
    for d in np.unique(days):
        m = days == d
        lo, hi = secs[m].min(), secs[m].max()
        keep[m] = (secs[m] >= lo + margin) & (secs[m] <= hi - margin)
    return keep


def read_order_csv(
    path, config: IngestionConfig | None = None, label: str | None = None
) -> MarketDatapoint:
    """Load one datapoint, validating order and signs.

    Rows must be in strictly increasing seq order with non-decreasing
    days; violations raise ParseError carrying the 1-based file line.
    When a time column is present the edges of each day are trimmed.
    """
    cfg = config or IngestionConfig()
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except Exception as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    required = ["seq", "trader_id", "sign", "day"]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise ParseError(f"missing columns {missing} in {path}", line_number=1)

    try:
        seq = df["seq"].astype(np.int64).to_numpy()
    except ValueError as exc:
        raise ParseError(f"seq column must be integer: {exc}") from exc
    bad = np.flatnonzero(np.diff(seq) <= 0)
    if bad.size:
        raise ParseError(
            f"seq not strictly increasing at value {seq[bad[0] + 1]}",
            line_number=int(bad[0]) + 3,
        )
    signs = _parse_signs(df["sign"])
    days = _parse_days(df["day"])
    bad = np.flatnonzero(np.diff(days) < 0)
    if bad.size:
        raise ParseError(
            f"day goes backwards at ordinal {days[bad[0] + 1]}",
            line_number=int(bad[0]) + 3,
        )
    traders = df["trader_id"].astype(str).to_numpy()

    if "time" in df.columns and cfg.trim_minutes > 0:
        keep = _trim_day_edges(df["time"], days, cfg.trim_minutes)
        seq, signs, days, traders = seq[keep], signs[keep], days[keep], traders[keep]

    table, codes = np.unique(traders, return_inverse=True)
    return MarketDatapoint(
        label=label or path.stem,
        seq=seq,
        trader_codes=codes.astype(np.int32),
        trader_table=table,
        signs=signs,
        day_index=days,
    )


def write_order_csv(dp: MarketDatapoint, path, times=None) -> None:
    """Write a datapoint in the interchange format."""
    path = Path(path)
    cols = {
        "seq": dp.seq,
        "trader_id": dp.trader_table[dp.trader_codes],
        "sign": dp.signs,
        "day": dp.day_index if dp.day_index is not None else np.zeros(dp.n_events, dtype=np.int64),
    }
    if times is not None:
        cols["time"] = times
    pd.DataFrame(cols).to_csv(path, index=False)


def truth_path_for(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(".truth.json")


def write_truth_sidecar(truth, path, include_logs: bool = False) -> None:
    """Persist generating parameters next to a simulated CSV.

    Metaorder logs are bulky and only written on request; the scatter
    pipeline needs just the trader count and exponent.
    """
    payload = {
        "alpha": truth.alpha,
        "n_st": truth.n_st,
        "rt_fraction": truth.rt_fraction,
        "seed": truth.seed,
        "intensities": np.asarray(truth.intensities).tolist(),
    }
    if include_logs:
        payload["metaorder_lengths"] = [
            log.lengths.tolist() for log in truth.metaorder_logs
        ]
    Path(path).write_text(json.dumps(payload))


def read_truth_sidecar(path) -> dict:
    return json.loads(Path(path).read_text())
