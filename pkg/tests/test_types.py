import numpy as np
import pytest

from splitflow.errors import EmptyDatapoint
from splitflow.types import MarketDatapoint, OrderEvent, SignSeries, series_from_events


def events_fixture():
    return [
        OrderEvent(seq_index=0, trader_id="alice", sign=1, day_index=0),
        OrderEvent(seq_index=1, trader_id="bob", sign=-1, day_index=0),
        OrderEvent(seq_index=2, trader_id="alice", sign=1, day_index=1),
        OrderEvent(seq_index=3, trader_id="bob", sign=-1, day_index=1),
    ]


def test_from_events_roundtrip():
    dp = MarketDatapoint.from_events("toy", events_fixture())
    assert dp.n_events == 4
    assert dp.n_traders == 2
    assert [str(t) for t in dp.trader_ids] == ["alice", "bob", "alice", "bob"]
    assert sorted(str(t) for t in dp.trader_table) == ["alice", "bob"]
    back = list(dp.events())
    assert [e.trader_id for e in back] == ["alice", "bob", "alice", "bob"]
    assert [e.sign for e in back] == [1, -1, 1, -1]
    assert [e.day_index for e in back] == [0, 0, 1, 1]
    assert [e.seq_index for e in back] == [0, 1, 2, 3]


def test_sign_series():
    dp = MarketDatapoint.from_events("toy", events_fixture())
    ss = dp.sign_series()
    assert ss.signs.dtype == np.int8
    assert ss.signs.tolist() == [1, -1, 1, -1]


def test_series_from_events():
    ss = series_from_events(events_fixture())
    assert ss.signs.tolist() == [1, -1, 1, -1]


def test_empty_rejected():
    with pytest.raises(EmptyDatapoint):
        MarketDatapoint.from_events("empty", [])
    with pytest.raises(EmptyDatapoint):
        SignSeries(signs=np.array([], dtype=np.int8))


def test_sign_validation():
    with pytest.raises(ValueError):
        OrderEvent(seq_index=0, trader_id="x", sign=0)
    with pytest.raises(ValueError):
        SignSeries(signs=np.array([1, 2], dtype=np.int8))


def test_compact_dtypes():
    dp = MarketDatapoint.from_events("toy", events_fixture())
    assert dp.signs.dtype == np.int8
    assert dp.seq.dtype == np.int64


def test_day_index_all_or_none():
    mixed = events_fixture()
    mixed[2] = OrderEvent(seq_index=2, trader_id="alice", sign=1)
    with pytest.raises(ValueError):
        MarketDatapoint.from_events("toy", mixed)
