import numpy as np
import pytest

from splitflow.errors import ParseError
from splitflow.io import (
    IngestionConfig,
    read_order_csv,
    read_truth_sidecar,
    truth_path_for,
    write_order_csv,
    write_truth_sidecar,
)
from splitflow.simulate import SimConfig, simulate


def write(tmp_path, text, name="orders.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_roundtrip(tmp_path):
    dp = simulate(SimConfig(n_st=5, alpha=1.5, n_steps=2000, seed=6, events_per_day=250))
    p = tmp_path / "sim.csv"
    write_order_csv(dp, p)
    back = read_order_csv(p)
    assert back.n_events == dp.n_events
    assert np.array_equal(back.signs, dp.signs)
    assert np.array_equal(back.seq, dp.seq)
    assert np.array_equal(back.day_index, dp.day_index)
    assert np.array_equal(
        back.trader_table[back.trader_codes], dp.trader_table[dp.trader_codes]
    )


def test_sign_aliases(tmp_path):
    p = write(
        tmp_path,
        "seq,trader_id,sign,day\n1,a,B,0\n2,b,S,0\n3,a,+1,0\n4,b,-1,0\n5,a,1,0\n",
    )
    dp = read_order_csv(p)
    assert dp.signs.tolist() == [1, -1, 1, -1, 1]


def test_bad_sign_reports_line(tmp_path):
    p = write(tmp_path, "seq,trader_id,sign,day\n1,a,B,0\n2,b,X,0\n")
    with pytest.raises(ParseError) as ei:
        read_order_csv(p)
    assert ei.value.line_number == 3


def test_nonmonotone_seq_reports_line(tmp_path):
    p = write(tmp_path, "seq,trader_id,sign,day\n1,a,B,0\n3,b,S,0\n2,a,B,0\n")
    with pytest.raises(ParseError) as ei:
        read_order_csv(p)
    assert ei.value.line_number == 4


def test_decreasing_day_reports_line(tmp_path):
    p = write(tmp_path, "seq,trader_id,sign,day\n1,a,B,5\n2,b,S,4\n")
    with pytest.raises(ParseError) as ei:
        read_order_csv(p)
    assert ei.value.line_number == 3


def test_missing_column(tmp_path):
    p = write(tmp_path, "seq,trader_id,sign\n1,a,B\n")
    with pytest.raises(ParseError):
        read_order_csv(p)


def test_date_days_skip_weekends(tmp_path):
    # Friday to Monday is one business day apart
    p = write(
        tmp_path,
        "seq,trader_id,sign,day\n1,a,B,2024-03-01\n2,a,B,2024-03-04\n3,a,B,2024-03-05\n",
    )
    dp = read_order_csv(p)
    gaps = np.diff(dp.day_index)
    assert gaps.tolist() == [1, 1]


def test_time_trimming(tmp_path):
    rows = ["seq,trader_id,sign,day,time"]
    # 09:30:00 through 09:49:00, one order a minute
    for i in range(20):
        rows.append(f"{i+1},a,B,0,09:{30+i:02d}:00")
    p = write(tmp_path, "\n".join(rows) + "\n")
    full = read_order_csv(p, IngestionConfig(min_transactions=0, trim_minutes=0.0))
    trimmed = read_order_csv(p, IngestionConfig(min_transactions=0, trim_minutes=5.0))
    assert full.n_events == 20
    # 5 minutes off each edge of the 19-minute session leaves 09:35..09:44
    assert trimmed.n_events == 10


def test_truth_sidecar_roundtrip(tmp_path):
    dp = simulate(SimConfig(n_st=4, alpha=1.4, n_steps=1500, seed=3))
    csv = tmp_path / "x.csv"
    side = truth_path_for(csv)
    assert side.name == "x.truth.json"
    write_truth_sidecar(dp.truth, side)
    back = read_truth_sidecar(side)
    assert back["alpha"] == 1.4
    assert back["n_st"] == 4
    assert back["seed"] == 3
    assert len(back["intensities"]) == 4
    assert "metaorder_logs" not in back
