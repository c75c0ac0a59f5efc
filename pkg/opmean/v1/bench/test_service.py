import numpy as np
import pytest

from opmean.utils.utils_file import save_matrix
from opmean.v1._shared.custom_schemas import TrialTask
from opmean.v1._shared.schemas import Backend, HermitianMatrix
from opmean.v1.bench.service import (
    draw_params,
    evaluate_trial,
    evaluate_trial_payload,
    run_tasks,
    trial_dim,
    trial_operands,
)


def _tasks():
    tasks = []
    for trial in range(4):
        for chain, f, params in (
            ("whhoi", "inv", {"lambda": 0.3}),
            ("rocf", "log", {"s": 0.5, "t": 0.8}),
            ("nwomi2", None, {"lambda": 0.6}),
        ):
            tasks.append(
                TrialTask(
                    index=len(tasks), trial=trial, chain=chain, f=f, params=params,
                    seed=5, dim=trial_dim(trial, None), tol=1e-8,
                )
            )
    return tasks


def test_trial_dim_cycles():
    assert [trial_dim(k, None) for k in range(5)] == [2, 3, 4, 6, 2]
    assert trial_dim(3, 5) == 5


def test_draw_params_is_deterministic_and_respects_fixed():
    grid = {"s": [0.1, 0.5, 0.9], "lambda": [0.25, 0.75]}
    first = draw_params(3, 7, grid, {"lambda": 0.4})
    assert first == draw_params(3, 7, grid, {"lambda": 0.4})
    assert first["lambda"] == 0.4
    assert first["s"] in grid["s"]


def test_trial_operands_are_reproducible():
    task = _tasks()[5]
    A1, B1 = trial_operands(task)
    A2, B2 = trial_operands(task)
    np.testing.assert_array_equal(A1.entries, A2.entries)
    np.testing.assert_array_equal(B1.entries, B2.entries)
    assert A1.dim == task.dim


def test_trial_operands_from_files(tmp_path):
    a_path, b_path = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    save_matrix(HermitianMatrix.diag([1.0, 2.0]), a_path)
    save_matrix(HermitianMatrix.diag([2.0, 1.0]), b_path)
    task = TrialTask(index=0, trial=0, chain="whhoi", f="inv", params={"lambda": 0.5}, seed=0, a_path=a_path, b_path=b_path, tol=1e-8)
    A, _ = trial_operands(task)
    np.testing.assert_array_equal(A.entries, np.diag([1.0, 2.0]))


def test_scalar_chain_needs_no_operands():
    task = TrialTask(index=0, trial=0, chain="beta_scalar", params={"x": 1.0, "y": 3.0}, seed=0, tol=1e-8)
    assert trial_operands(task) == (None, None)
    assert evaluate_trial(task).holds


def test_evaluate_trial_records_errors():
    task = TrialTask(index=3, trial=1, chain="whhoi", f="inv", params={"lambda": 2.0}, seed=0, tol=1e-8)
    summary = evaluate_trial(task)
    assert not summary.holds
    assert summary.index == 3
    assert "lambda" in summary.error


def test_payload_round_trip():
    task = _tasks()[0]
    result = evaluate_trial_payload(task.model_dump(mode="json"))
    assert result["id"] == "whhoi"
    assert result["holds"] is True


def test_serial_run_orders_by_index():
    cases = run_tasks(list(reversed(_tasks())), Backend.SERIAL)
    assert [case.index for case in cases] == list(range(12))
    assert all(case.holds for case in cases)


def test_empty_run():
    assert run_tasks([], Backend.PROCESS) == []


@pytest.mark.parametrize("backend", [Backend.CELERY, Backend.PROCESS])
def test_backends_agree_with_serial(backend):
    tasks = _tasks()
    serial = run_tasks(tasks, Backend.SERIAL)
    other = run_tasks(tasks, backend, workers=2)
    assert [case.model_dump() for case in other] == [case.model_dump() for case in serial]
