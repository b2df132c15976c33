import io
import json
from fractions import Fraction as F

import pandas as pd
import pytest

from sturmian_targets.api.cli import build_parser, parse_checkpoints, parse_point, run, run_config
from sturmian_targets.api.schemas import RunConfig, ThmBConfig, render
from sturmian_targets.models.cf_core import parse_alpha
from sturmian_targets.models.errors import ConfigError
from sturmian_targets.models.rotation_coder import atoms
from sturmian_targets.models.targets import count_undetermined
from sturmian_targets.services.export import exporter


def last_json_line(text: str) -> dict:
    return json.loads(text.strip().splitlines()[-1])


def test_cf_table_for_three_sevenths(capsys):
    assert run(["cf", "--alpha", "rat:3/7", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# config: ")
    frame = pd.read_csv(io.StringIO(out), comment="#", dtype=str)
    rows = list(zip(frame["k"], frame["p"], frame["q"]))
    assert rows == [("0", "0", "1"), ("1", "1", "2"), ("2", "3", "7")]


def test_count_json_matches_model(capsys, golden):
    assert run(["count", "--alpha", "preset:golden-40", "--x", "rat:1/3", "--N", "500"]) == 0
    payload = json.loads(capsys.readouterr().out)
    report = count_undetermined(golden, F(1, 3), 500)
    assert payload["result"]["count"] == report.count
    assert payload["result"]["measure_sum"]["num"] == str(report.measure_sum.numerator)
    assert "subcommand=count" in payload["config"]


def test_config_errors_exit_two(capsys):
    assert run(["cf", "--alpha", "bogus:1"]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "config"
    assert run(["count", "--alpha", "rat:3/7", "--x", "1/3", "--N", "50"]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "horizon"
    assert run(["thmB", "--rho", "1/2"]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "config"


def test_verify_passes_on_golden(capsys):
    assert run(["verify", "--alpha", "preset:golden-40", "--oracle-max", "100"]) == 0
    suites = json.loads(capsys.readouterr().out)["result"]
    assert len(suites) >= 6
    assert all(suite["passed"] for suite in suites)


def test_thmA_output_is_byte_identical(tmp_path):
    args = ["thmA", "--alpha", "preset:golden-40", "--checkpoints", "q6,q9", "--samples", "3", "--format", "csv"]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--output", str(first), "--jobs", "1"]) == 0
    assert run(args + ["--output", str(second), "--jobs", "3"]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "a.csv.meta.json").exists()
    assert b"\r\n" not in first.read_bytes()


def test_plot_data_for_single_point(tmp_path):
    plot = tmp_path / "ratio.dat"
    args = ["thmA", "--x", "1/3", "--checkpoints", "q10,q20", "--output", str(tmp_path / "r.json"), "--plot-data", str(plot)]
    assert run(args) == 0
    lines = plot.read_text().splitlines()
    assert lines[1] == "# N ratio"
    assert len(lines) == 4


def test_parse_helpers(golden):
    assert parse_checkpoints("q5, 10", golden) == [7, 10]
    assert parse_point("rat:4/3") == F(1, 3)
    with pytest.raises(ConfigError):
        parse_point("one third")
    with pytest.raises(ConfigError):
        parse_checkpoints("qx", golden)


def test_run_config_round_trip():
    config = RunConfig(subcommand="thmB", alpha="preset:golden-40", m=11, rho="1/5", seed=3, fmt="csv")
    text = config.canonical()
    assert RunConfig.from_canonical(text) == config
    assert RunConfig.from_canonical(text).canonical() == text


def test_thmb_config_ranges():
    assert ThmBConfig(m=11).gap_lower == (F(1, 5) - F(1, 10) - F(1, 1000)) / (1 + F(1, 1000))
    with pytest.raises(ValueError):
        ThmBConfig(m=11, rho="1/2")
    with pytest.raises(ValueError):
        ThmBConfig(m=1)
    with pytest.raises(ValueError):
        ### rho - sigma = 3/128 leaves no room above 1/C = 1/20
        ThmBConfig(m=11, rho="9/64", sigma="15/128", C=20)


def test_table_keeps_big_integers_exact():
    config = RunConfig(subcommand="cf")
    big = 10**40 + 1
    text = exporter.table([{"q": big, "n": None}, {"q": 3, "n": 7}], config)
    lines = text.splitlines()
    assert lines[1] == "q,n"
    assert lines[2] == f"{big},"
    assert lines[3] == "3,7"


def test_render_is_advisory():
    assert render(F(1, 3), 5) == "0.33333"
    assert parse_alpha("rat:1/3").spec == "rat:1/3"


def test_canonical_config_survives_spaced_flags():
    args = build_parser().parse_args(["thmA", "--alpha", " preset:golden-40", "--checkpoints", "q15, q20", "--x", "1 / 3"])
    config = run_config(args)
    text = config.canonical()
    assert "checkpoints=q15,q20" in text
    assert RunConfig.from_canonical(text) == config
    assert RunConfig.from_canonical(text).canonical() == text


def test_usage_errors_leave_a_json_line(capsys):
    assert run(["thmA", "--N", "many"]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "config"
    assert run(["nosuch"]) == 2
    assert last_json_line(capsys.readouterr().err)["error"] == "config"


def test_atom_dump(capsys, golden):
    assert run(["targets", "--atoms", "6", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "atoms:6" in out.splitlines()[0]
    frame = pd.read_csv(io.StringIO(out), comment="#", dtype=str)
    partition = atoms(golden, 6)
    assert len(frame) == 8
    assert list(frame["coding"]) == [str(word) for word in partition.codings()]
    assert set(frame["j"]) == {"6"}
