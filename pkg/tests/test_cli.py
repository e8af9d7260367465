import json

import pytest

from splitflow.cli import main
from splitflow.correlation import save_bias_table


def test_version(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["--version"])
    assert ei.value.code == 0
    assert "0.1.0" in capsys.readouterr().out


def test_simulate_writes_csv_and_truth(tmp_path):
    out = tmp_path / "flow.csv"
    rc = main(
        [
            "simulate",
            "--alpha", "1.5",
            "--n-st", "10",
            "--n-steps", "5000",
            "--seed", "3",
            "--events-per-day", "500",
            "--out", str(out),
        ]
    )
    assert rc == 0
    assert out.exists()
    header = out.read_text().splitlines()[0]
    assert header.split(",") == ["seq", "trader_id", "sign", "day"]
    truth = json.loads((tmp_path / "flow.truth.json").read_text())
    assert truth["n_st"] == 10


def test_scatter_run(tmp_path, tiny_table):
    table_path = tmp_path / "table.json"
    save_bias_table(tiny_table, table_path)
    csvs = []
    for seed in (1, 2):
        out = tmp_path / f"f{seed}.csv"
        main(
            [
                "simulate",
                "--alpha", "1.5",
                "--n-st", "50",
                "--n-steps", "60000",
                "--seed", str(seed),
                "--out", str(out),
            ]
        )
        csvs.append(str(out))
    out_dir = tmp_path / "res"
    rc = main(
        ["scatter", *csvs, "--out-dir", str(out_dir), "--table", str(table_path), "--no-psd"]
    )
    assert rc == 0
    scatter = out_dir / "scatter.csv"
    summary = json.loads((out_dir / "summary.json").read_text())
    assert scatter.exists()
    assert summary["n_datapoints"] == 2
    lines = scatter.read_text().splitlines()
    assert len(lines) == 3


def test_plot_from_scatter(tmp_path, tiny_table):
    table_path = tmp_path / "table.json"
    save_bias_table(tiny_table, table_path)
    out = tmp_path / "f.csv"
    main(
        [
            "simulate",
            "--alpha", "1.5",
            "--n-st", "50",
            "--n-steps", "60000",
            "--seed", "5",
            "--out", str(out),
        ]
    )
    out_dir = tmp_path / "res"
    main(["scatter", str(out), "--out-dir", str(out_dir), "--table", str(table_path), "--no-psd"])
    rc = main(["plot", "--scatter", str(out_dir / "scatter.csv"), "--out-dir", str(out_dir)])
    assert rc == 0
    svgs = list(out_dir.glob("*.svg"))
    assert svgs
