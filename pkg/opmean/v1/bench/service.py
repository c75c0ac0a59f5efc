"""
Ensemble execution: operands for a trial, one chain evaluation per TrialTask,
and the serial / process-pool / celery runners. Every runner returns the
summaries ordered by task index.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from opmean.utils.exceptions import OpmeanException
from opmean.v1._shared.custom_schemas import CaseSummary, TrialTask
from opmean.v1._shared.schemas import Backend, HermitianMatrix
from opmean.v1.hermat.service import child_seed, random_hpd_pair
from opmean.v1.registry.mapper import map_to_case_summary
from opmean.v1.registry.use_case import evaluate_chain, get_chain

logger = logging.getLogger(__name__)

DEFAULT_DIMS = [2, 3, 4, 6]

# child keys of a trial seed
OPERAND_KEY = 0
PARAMS_KEY = 1


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return child_seed(seed, trial)


def trial_dim(trial: int, dim: Optional[int]) -> int:
    """The fixed dim, or the default dims in turn."""
    return dim if dim is not None else DEFAULT_DIMS[trial % len(DEFAULT_DIMS)]


def draw_params(
    seed: int, trial: int, grid: Dict[str, List[float]], fixed: Dict[str, float]
) -> Dict[str, float]:
    """Fixed values win; the rest are drawn from `grid` with the trial's generator."""
    rng = np.random.default_rng(child_seed(trial_seed(seed, trial), PARAMS_KEY))
    params: Dict[str, float] = {}
    for name, values in grid.items():
        drawn = float(values[int(rng.integers(len(values)))])
        params[name] = fixed.get(name, drawn)
    return params


@lru_cache(maxsize=8)
def _load_pair(a_path: str, b_path: str) -> Tuple[HermitianMatrix, HermitianMatrix]:
    from opmean.utils.utils_file import load_matrix

    return load_matrix(a_path), load_matrix(b_path)


def trial_operands(task: TrialTask) -> Tuple[Optional[HermitianMatrix], Optional[HermitianMatrix]]:
    if not get_chain(task.chain).takes_operands:
        return None, None
    if task.a_path is not None and task.b_path is not None:
        return _load_pair(task.a_path, task.b_path)
    operand_seed = child_seed(trial_seed(task.seed, task.trial), OPERAND_KEY)
    return random_hpd_pair(task.dim, task.cond_cap, operand_seed, task.complex_entries)


def evaluate_trial(task: TrialTask) -> CaseSummary:
    """
    Evaluates one task. Numeric errors are recorded on the summary instead of
    aborting the ensemble.
    """
    try:
        A, B = trial_operands(task)
        report = evaluate_chain(task.chain, A, B, params=task.params, f=task.f, tol=task.tol)
    except OpmeanException as e:
        logger.error(f"Task {task.index} ({task.chain}, trial {task.trial}) failed: {e.detail}")
        return CaseSummary(
            index=task.index,
            trial=task.trial,
            id=task.chain,
            f=task.f,
            params=task.params,
            dims=task.dim,
            margins=[],
            holds=False,
            tolerance=task.tol,
            error=e.detail,
        )
    return map_to_case_summary(report, index=task.index, trial=task.trial)


def evaluate_trial_payload(payload: Dict[str, Any]) -> Dict[str, Any]:
    """Picklable and JSON-friendly wrapper around evaluate_trial."""
    return evaluate_trial(TrialTask(**payload)).model_dump(mode="json")


def _run_serial(tasks: List[TrialTask]) -> List[CaseSummary]:
    return [evaluate_trial(task) for task in tasks]


def _run_process(tasks: List[TrialTask], workers: int) -> List[CaseSummary]:
    payloads = [task.model_dump(mode="json") for task in tasks]
    max_workers = workers or None
    chunksize = max(1, len(payloads) // (4 * (workers or 8)))
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(evaluate_trial_payload, payloads, chunksize=chunksize))
    return [CaseSummary(**result) for result in results]


def _run_celery(tasks: List[TrialTask]) -> List[CaseSummary]:
    from opmean.utils.tasks.trial_tasks import evaluate_trial_task

    pending = [evaluate_trial_task.delay(task.model_dump(mode="json")) for task in tasks]
    return [CaseSummary(**result.get()["case"]) for result in pending]


def run_tasks(tasks: List[TrialTask], backend: Backend = Backend.SERIAL, workers: int = 0) -> List[CaseSummary]:
    """
    Runs every task on the chosen backend.

    Args:
        tasks: Tasks with distinct indices
        backend: serial, process (ProcessPoolExecutor) or celery
        workers: Pool size for the process backend; 0 lets the pool decide

    Returns:
        One CaseSummary per task, ordered by index
    """
    backend = Backend(backend)
    logger.info(f"Running {len(tasks)} task(s) on the {backend.value} backend")
    if not tasks:
        return []
    if backend == Backend.PROCESS:
        summaries = _run_process(tasks, workers)
    elif backend == Backend.CELERY:
        summaries = _run_celery(tasks)
    else:
        summaries = _run_serial(tasks)
    return sorted(summaries, key=lambda summary: summary.index)
