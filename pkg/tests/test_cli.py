"""CLI contract: flags, exit codes, CSV and figure artifacts."""

from __future__ import annotations

import pytest

from gridwell.cli import main


def run_cli(*argv: str) -> int:
    """Invoke the CLI in-process, normalizing argparse's SystemExit."""
    try:
        return main(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)


BAD_GRID = "bus,type,U,P,Q,D,H\n1,Slack,1,,,,\n2,Load,,-100,0,,\n"
BAD_LINES = "line,from,to,R,X\n1,1,2,0.01938,0.05917\n"

TWO_ISLANDS_BUSES = (
    "bus,type,U,P,Q,D,H\n"
    "1,Slack,1,,,,\n2,Load,,-0.1,0,,\n3,Slack,1,,,,\n4,Load,,-0.1,0,,\n"
)
TWO_ISLANDS_LINES = "line,from,to,R,X\n1,1,2,0.05,0.2\n2,3,4,0.05,0.2\n"


def test_operationpoint_bundled_to_stdout(capsys):
    assert run_cli("operationpoint") == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0] == "t,bus,re_u,im_u,v,phi,p,q,omega"
    assert len(lines) == 15
    bus2 = lines[2].split(",")
    assert float(bus2[4]) == pytest.approx(1.0, abs=1e-9)


def test_operationpoint_out_file(tmp_path):
    out = tmp_path / "fp.csv"
    assert run_cli("operationpoint", "--out", str(out)) == 0
    assert out.read_text().startswith("t,bus,")


def test_simulate_freq_perturb(tmp_path, capsys):
    out = tmp_path / "series.csv"
    code = run_cli(
        "simulate", "--scenario", "freq-perturb", "--target", "1",
        "--delta", "0.2", "--t-end", "0.02", "--out", str(out),
    )
    assert code == 0
    summary = capsys.readouterr().out.strip()
    assert summary.startswith("max_abs_omega=")
    assert summary.endswith("Hz")
    assert "rad/s, max_freq_dev=" in summary
    text = out.read_text()
    assert text.count("\n") == 1 + 21 * 14


def test_simulate_line_trip_with_plot(tmp_path):
    out = tmp_path / "trip.csv"
    plot = tmp_path / "trip.svg"
    code = run_cli(
        "simulate", "--scenario", "line-trip", "--target", "2",
        "--t-end", "0.02", "--out", str(out), "--plot", str(plot),
    )
    assert code == 0
    assert out.exists()
    assert plot.exists() and plot.stat().st_size > 0


def test_identical_invocations_are_bit_reproducible(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert run_cli(
            "simulate", "--scenario", "freq-perturb", "--target", "1",
            "--t-end", "0.02", "--out", str(path),
        ) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_usage_delta_with_line_trip(tmp_path):
    code = run_cli(
        "simulate", "--scenario", "line-trip", "--target", "2",
        "--delta", "0.1", "--t-end", "0.1", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 1


def test_usage_missing_required_flag():
    assert run_cli("simulate", "--scenario", "freq-perturb", "--target", "1") == 1


def test_usage_unknown_scenario(tmp_path):
    code = run_cli(
        "simulate", "--scenario", "voltage-sag", "--target", "1",
        "--t-end", "0.1", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 1


def test_usage_nonpositive_t_end(tmp_path):
    code = run_cli(
        "simulate", "--scenario", "freq-perturb", "--target", "1",
        "--t-end", "0", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 1


def test_usage_perturbing_load_bus(tmp_path):
    code = run_cli(
        "simulate", "--scenario", "freq-perturb", "--target", "4",
        "--t-end", "0.1", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 1


def test_usage_disconnecting_trip(tmp_path):
    buses = tmp_path / "buses.csv"
    lines = tmp_path / "lines.csv"
    buses.write_text("bus,type,U,P,Q,D,H\n1,Slack,1,,,,\n2,Generator,,0.1,,2,5\n")
    lines.write_text("line,from,to,R,X\n1,1,2,0.05,0.2\n")
    code = run_cli(
        "simulate", "--buses", str(buses), "--lines", str(lines),
        "--scenario", "line-trip", "--target", "1",
        "--t-end", "0.1", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 1


def test_missing_input_file_exits_2(tmp_path):
    assert run_cli("operationpoint", "--buses", str(tmp_path / "nope.csv")) == 2


def test_schema_error_exits_2(tmp_path):
    path = tmp_path / "buses.csv"
    path.write_text("bus,kind\n")
    assert run_cli("operationpoint", "--buses", str(path)) == 2


def test_newton_failure_exits_3(tmp_path, capsys):
    buses = tmp_path / "buses.csv"
    lines = tmp_path / "lines.csv"
    buses.write_text(BAD_GRID)
    lines.write_text(BAD_LINES)
    code = run_cli("operationpoint", "--buses", str(buses), "--lines", str(lines))
    assert code == 3
    assert "residual" in capsys.readouterr().err


def test_integration_failure_exits_4(tmp_path, monkeypatch, capsys):
    from gridwell import IntegrationError
    from gridwell import cli as cli_module

    def explode(*args, **kwargs):
        raise IntegrationError("step Newton failed at t = 0.007 s", time=0.007)

    monkeypatch.setattr(cli_module, "run_scenario", explode)
    code = run_cli(
        "simulate", "--scenario", "freq-perturb", "--target", "1",
        "--t-end", "0.01", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 4
    assert "0.007" in capsys.readouterr().err


def test_disconnected_grid_warns(tmp_path, capsys):
    buses = tmp_path / "buses.csv"
    lines = tmp_path / "lines.csv"
    buses.write_text(TWO_ISLANDS_BUSES)
    lines.write_text(TWO_ISLANDS_LINES)
    code = run_cli("operationpoint", "--buses", str(buses), "--lines", str(lines))
    captured = capsys.readouterr()
    assert "not connected" in captured.err
    assert code in (0, 3)


def test_help_exits_zero(capsys):
    assert run_cli("--help") == 0
    assert "operationpoint" in capsys.readouterr().out
