import csv
import io
import json

import numpy as np
import pytest
from typer.testing import CliRunner

from main import app
from opmean.utils.settings import settings
from opmean.utils.utils_file import save_matrix
from opmean.v1._shared.custom_schemas import CaseSummary
from opmean.v1._shared.schemas import Command, EnsembleReport, HermitianMatrix
from opmean.v1.bench.service import draw_params
from opmean.v1.hermat.palette import DEFAULT_PALETTE
from opmean.v1.registry.use_case import get_chain, list_chains

runner = CliRunner()


def _matrix_files(tmp_path, a, b):
    a_path, b_path = tmp_path / "a.json", tmp_path / "b.json"
    save_matrix(HermitianMatrix.diag(a), a_path)
    save_matrix(HermitianMatrix.diag(b), b_path)
    return str(a_path), str(b_path)


def test_mean_from_files(tmp_path):
    a_path, b_path = _matrix_files(tmp_path, [4.0, 1.0], [9.0, 16.0])
    result = runner.invoke(app, ["mean", "--kind", "sharp", "--lambda", "0.5", "--a", a_path, "--b", b_path])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["schema"] == "opmean-report/1"
    assert report["command"] == "mean"
    np.testing.assert_allclose(report["means"][0]["re"], [[6.0, 0.0], [0.0, 4.0]], atol=1e-12)
    assert "runtime" not in report


def test_mean_from_generator_with_timing():
    result = runner.invoke(app, ["mean", "--kind", "wlog_geom", "--lambda", "0.3", "--dim", "3", "--seed", "1", "--timing"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["means"][0]["dim"] == 3
    assert report["runtime"] >= 0.0


def test_mean_csv():
    result = runner.invoke(app, ["mean", "--kind", "logm", "--dim", "2", "--format", "csv"])
    assert result.exit_code == 0, result.output
    rows = list(csv.DictReader(io.StringIO(result.stdout)))
    assert len(rows) == 4
    assert rows[0]["kind"] == "logm"


def test_mean_needs_both_files(tmp_path):
    a_path, _ = _matrix_files(tmp_path, [1.0, 2.0], [2.0, 1.0])
    result = runner.invoke(app, ["mean", "--kind", "sharp", "--lambda", "0.5", "--a", a_path])
    assert result.exit_code == 2


def test_mean_with_unreadable_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    result = runner.invoke(app, ["mean", "--kind", "sharp", "--lambda", "0.5", "--a", str(bad), "--b", str(bad)])
    assert result.exit_code == 2


def test_worked_example_command():
    result = runner.invoke(app, ["paper-example"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["command"] == "paper-example"
    assert report["config"]["command"] == "paper-example"
    assert len(report["examples"]) == 6
    assert all(row["ok"] for row in report["examples"])
    assert report["failure_count"] == 0
    assert report["notes"]


def test_worked_example_alias():
    assert runner.invoke(app, ["example"]).stdout == runner.invoke(app, ["paper-example"]).stdout


def test_verify_default_palette():
    result = runner.invoke(app, ["verify", "--chain", "whhoi", "--trials", "10", "--seed", "3"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert len(report["cases"]) == 60
    assert report["aggregate"]["whhoi"]["failures"] == 0
    assert {case["f"] for case in report["cases"]} == {"inv", "square", "pow_0.5", "pow_1.5", "xlogx", "log"}


@pytest.mark.slow
def test_verify_large_ensemble():
    result = runner.invoke(app, ["verify", "--chain", "whhoi", "--trials", "200", "--dim", "4", "--seed", "7"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["failure_count"] == 0


@pytest.mark.slow
def test_every_chain_holds_on_the_full_ensemble():
    chain_ids = [descriptor.id for descriptor in list_chains()]
    result = runner.invoke(
        app,
        ["verify", "--chain", ",".join(chain_ids), "--trials", "200", "--seed", "2024", "--tol", "1e-8", "--backend", "process"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["failure_count"] == 0
    assert set(report["aggregate"]) == set(chain_ids)
    assert {case["dims"] for case in report["cases"]} == {0, 2, 3, 4, 6}
    with_function = [case for case in report["cases"] if case["f"] is not None]
    assert {case["f"] for case in with_function} == set(DEFAULT_PALETTE)
    assert all(report["aggregate"][chain_id]["cases"] >= 200 for chain_id in chain_ids)


def test_verify_several_chains_with_fixed_params():
    result = runner.invoke(
        app,
        ["verify", "--chain", "rwhhoir,rocf", "--trials", "4", "--f", "inv", "--f", "log", "--params", "s=0.3"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert len(report["cases"]) == 16
    assert all(case["params"]["s"] == 0.3 for case in report["cases"])


def test_verify_scalar_chain():
    result = runner.invoke(app, ["verify", "--chain", "beta_scalar", "--trials", "30"])
    assert result.exit_code == 0, result.output
    cases = json.loads(result.stdout)["cases"]
    assert all(case["dims"] == 0 and case["f"] is None for case in cases)


def test_verify_on_celery_backend():
    result = runner.invoke(app, ["verify", "--chain", "nwomi1", "--trials", "4", "--backend", "celery"])
    assert result.exit_code == 0, result.output


def test_verify_is_deterministic():
    args = ["verify", "--chain", "cor_a", "--trials", "5", "--f", "xlogx", "--seed", "11"]
    first = runner.invoke(app, args)
    second = runner.invoke(app, args)
    assert first.exit_code == second.exit_code == 0
    assert first.stdout == second.stdout


def test_verify_writes_to_file(tmp_path):
    out = tmp_path / "reports" / "verify.csv"
    result = runner.invoke(app, ["verify", "--chain", "nwomi2", "--trials", "3", "--out", str(out), "--format", "csv"])
    assert result.exit_code == 0, result.output
    assert result.stdout == ""
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [row["id"] for row in rows] == ["nwomi2"] * 3


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "--chain", "whhoi", "--trials", "0"],
        ["verify", "--chain", "nope"],
        ["verify", "--chain", "whhoi", "--f", "exp"],
        ["verify", "--chain", "whhoi", "--params", "beta=0.3"],
        ["verify", "--chain", "whhoi", "--params", "lambda"],
        ["sweep", "--chain", "rwhhoir"],
        ["sweep", "--chain", "rwhhoir", "--grid", "s=0.2:0.8:3"],
        ["sweep", "--chain", "rwhhoir", "--grid", "q=0.2:0.8:3", "--params", "lambda=0.5,s=0.5"],
    ],
)
def test_usage_errors_exit_with_two(args):
    assert runner.invoke(app, args).exit_code == 2


def test_failures_exit_with_one(monkeypatch):
    failing = CaseSummary(index=0, trial=0, id="whhoi", f="inv", params={"lambda": 0.5}, dims=2, margins=[-1.0], holds=False, tolerance=1e-8)
    monkeypatch.setattr(
        "opmean.v1.bench.controller.cmd_verify",
        lambda config: EnsembleReport(command=Command.VERIFY, cases=[failing]),
    )
    result = runner.invoke(app, ["verify", "--chain", "whhoi", "--trials", "1"])
    assert result.exit_code == 1
    assert json.loads(result.stdout)["failure_count"] == 1


def test_sweep_csv():
    result = runner.invoke(
        app,
        ["sweep", "--chain", "rwhhoir", "--grid", "s=0.2:0.8:3", "--params", "lambda=0.5", "--f", "inv", "--trials", "2"],
    )
    assert result.exit_code == 0, result.output
    rows = list(csv.DictReader(io.StringIO(result.stdout)))
    assert [float(row["s"]) for row in rows] == pytest.approx([0.2, 0.5, 0.8])
    assert all(row["lambda"] == "0.5" and row["holds"] == "True" for row in rows)
    assert {"gap_0", "gap_1", "worst_margin"} <= set(rows[0])


def test_sweep_json_groups_functions():
    result = runner.invoke(
        app,
        ["sweep", "--chain", "whhoi", "--grid", "lambda=0.2:0.6:2", "--f", "inv,log", "--format", "json"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert [(row["params"]["lambda"], row["f"]) for row in report["rows"]] == [
        (0.2, "inv"), (0.2, "log"), (0.6, "inv"), (0.6, "log")
    ]


def test_chains_listing():
    result = runner.invoke(app, ["chains"])
    assert result.exit_code == 0
    lines = result.stdout.strip().splitlines()
    assert len(lines) == 18
    assert lines[0].split("\t")[:2] == ["whhoi", "lambda"]
    assert lines[1].split("\t")[1] == "-"


def test_verbose_flag():
    result = runner.invoke(app, ["--quiet", "chains"])
    assert result.exit_code == 0


def test_verify_from_files_draws_params_with_the_configured_seed(tmp_path, monkeypatch):
    a_path, b_path = _matrix_files(tmp_path, [1.0, 2.0], [2.0, 1.0])
    grid = get_chain("rocf").default_grid
    args = ["verify", "--chain", "rocf", "--f", "inv", "--a", a_path, "--b", b_path]

    result = runner.invoke(app, args + ["--seed", "9"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["cases"][0]["params"] == draw_params(9, 0, grid, {})

    monkeypatch.setattr(settings, "SEED", 13)
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["cases"][0]["params"] == draw_params(13, 0, grid, {})
