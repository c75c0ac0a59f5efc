import itertools
import logging
import math
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from opmean.utils.exceptions import ExceptionInvalidData
from opmean.utils.utils_file import load_matrix
from opmean.v1._shared.base_chain import BaseChain
from opmean.v1._shared.custom_schemas import (
    CaseSummary,
    ChainAggregate,
    ExampleRow,
    MeanResult,
    SweepRow,
    TrialTask,
)
from opmean.v1._shared.schemas import (
    Command,
    EnsembleReport,
    GeneratorSpec,
    HermitianMatrix,
    MeanKind,
    MeanKindId,
    RunConfig,
)
from opmean.v1.bench.service import draw_params, run_tasks, trial_dim, trial_seed
from opmean.v1.hermat.palette import DEFAULT_PALETTE, get_function
from opmean.v1.hermat.service import child_seed, random_hpd_pair
from opmean.v1.means.service import mean
from opmean.v1.registry.use_case import get_chain

logger = logging.getLogger(__name__)

EXAMPLE_TOL = 5e-4
EXAMPLE_WEIGHT = 0.75

COEFFICIENT_NOTE = "the bracket companion of alpha(s,lambda) is evaluated as mu(s,lambda)"
MEASURE_NOTE = "the measure nu_lambda of the corollary is evaluated as eta_lambda"
MIXED_NOTE = (
    "the power and logarithmic brackets of the mixed chain are checked in descending order "
    "(x^r and g_lambda are concave); the last bracket uses A nabla_s LL_lambda(A,B) - LL_lambda(A, A nabla_s B)"
)
SWAP_NOTE = (
    "the reference approximations of the harmonic and geometric weighted logarithmic means "
    "are transposed; computed values are checked against the closed forms"
)

CHAIN_NOTES: Dict[str, List[str]] = {
    "cor_a": [MEASURE_NOTE],
    "enwomi1": [COEFFICIENT_NOTE],
    "enwomi2": [COEFFICIENT_NOTE],
    "rnwomi": [COEFFICIENT_NOTE],
    "mixte": [COEFFICIENT_NOTE, MEASURE_NOTE, MIXED_NOTE],
}

def example_oracles() -> Dict[MeanKindId, Tuple[float, float]]:
    """Closed forms of the three weighted logarithmic means at lambda=3/4 on diag(1,2), diag(2,1)."""
    a = math.log(2.0)
    lam = EXAMPLE_WEIGHT

    def pal(x: float, y: float) -> float:
        middle = x ** (1.0 - lam) * y ** lam
        return ((1.0 - lam) / lam * (middle - x) + lam / (1.0 - lam) * (y - middle)) / math.log(y / x)

    return {
        MeanKindId.PAL_LOG: (pal(1.0, 2.0), pal(2.0, 1.0)),
        MeanKindId.WLOG_HARM: (1.0 / (3.0 * a - 1.5), 1.0 / (3.0 * (4.0 * a - 2.5))),
        MeanKindId.WLOG_GEOM: (
            3.0 * (2.0 / a - 4.0 / a ** 2 + 2.0 / a ** 3),
            6.0 * (1.0 / a ** 3 - 1.0 / a ** 2 - 1.0 / (2.0 * a)),
        ),
    }

# reference values, four decimals
EXAMPLE_PRINTED: Dict[MeanKindId, Tuple[float, float]] = {
    MeanKindId.PAL_LOG: (1.7051, 1.2088),
    MeanKindId.WLOG_HARM: (1.6964, 1.2004),
    MeanKindId.WLOG_GEOM: (1.7258, 1.2228),
}

def _mean_result(kind: MeanKind, matrix: HermitianMatrix) -> MeanResult:
    entries = matrix.entries
    return MeanResult(
        kind=kind.id.value,
        weight=kind.weight,
        dim=matrix.dim,
        re=np.real(entries).tolist(),
        im=np.imag(entries).tolist() if matrix.is_complex else None,
    )

def _operands(config: RunConfig) -> Tuple[HermitianMatrix, HermitianMatrix]:
    if config.a_path is not None:
        return load_matrix(config.a_path), load_matrix(config.b_path)
    generator = config.generator or GeneratorSpec()
    operand_seed = child_seed(trial_seed(generator.seed, 0), 0)
    return random_hpd_pair(trial_dim(0, generator.dim), generator.cond_cap, operand_seed, generator.complex_entries)

def _functions_for(chain: BaseChain, functions: List[str]) -> List[Optional[str]]:
    if not chain.takes_function:
        return [None]
    return list(functions) if functions else list(DEFAULT_PALETTE)

def _aggregate(cases: List[CaseSummary]) -> Dict[str, ChainAggregate]:
    aggregate: Dict[str, ChainAggregate] = {}
    for case in cases:
        entry = aggregate.setdefault(case.id, ChainAggregate())
        entry.cases += 1
        entry.failures += int(not case.holds)
        if case.margins:
            worst = case.worst_margin
            entry.worst_margin = worst if entry.worst_margin is None else min(entry.worst_margin, worst)
    return aggregate

def _notes(chain_ids: List[str]) -> List[str]:
    notes: List[str] = []
    for chain_id in chain_ids:
        for note in CHAIN_NOTES.get(chain_id, []):
            if note not in notes:
                notes.append(note)
    for note in notes:
        logger.warning(note)
    return notes

class BenchUseCase:
    """
    Use case behind the command line: one method per command, each returning
    an EnsembleReport.
    """

    def _finish(self, report: EnsembleReport, config: RunConfig, started: float) -> EnsembleReport:
        if config.timing:
            report.runtime = time.perf_counter() - started
        logger.info(f"{config.command.value}: {len(report.cases)} case(s), {report.failure_count} failure(s)")
        return report

    def _task(self, config: RunConfig, index: int, trial: int, chain: BaseChain, f: Optional[str], params: Dict[str, float]) -> TrialTask:
        generator = config.generator or GeneratorSpec(trials=1)
        return TrialTask(
            index=index,
            trial=trial,
            chain=chain.id,
            f=f,
            params=params,
            seed=config.run_seed,
            dim=trial_dim(trial, generator.dim),
            cond_cap=generator.cond_cap,
            complex_entries=generator.complex_entries,
            a_path=config.a_path,
            b_path=config.b_path,
            tol=config.tol,
        )

    def _check_functions(self, config: RunConfig) -> None:
        for function_id in config.functions:
            get_function(function_id)

    def cmd_mean(self, config: RunConfig) -> EnsembleReport:
        started = time.perf_counter()
        kind = MeanKind(id=config.kind, weight=config.weight)
        A, B = _operands(config)
        value = mean(kind, A, B)
        logger.info(f"{kind.id.value} mean computed (dim={value.dim})")
        report = EnsembleReport(command=Command.MEAN, config=config.echo(), means=[_mean_result(kind, value)])
        return self._finish(report, config, started)

    def cmd_verify(self, config: RunConfig) -> EnsembleReport:
        started = time.perf_counter()
        chains = [get_chain(chain_id) for chain_id in config.chains]
        self._check_functions(config)
        accepted = {name for chain in chains for name in chain.param_names}
        extra = sorted(set(config.params) - accepted)
        if extra:
            raise ExceptionInvalidData(f"no selected chain takes parameters: {', '.join(extra)}")

        trials = config.generator.trials if config.generator is not None else 1
        seed = config.run_seed
        tasks: List[TrialTask] = []
        for chain in chains:
            fixed = {name: value for name, value in config.params.items() if name in chain.param_names}
            for trial in range(trials):
                params = draw_params(seed, trial, chain.default_grid, fixed)
                for f in _functions_for(chain, config.functions):
                    tasks.append(self._task(config, len(tasks), trial, chain, f, params))

        cases = run_tasks(tasks, config.backend, config.workers)
        report = EnsembleReport(
            command=Command.VERIFY,
            config=config.echo(),
            cases=cases,
            aggregate=_aggregate(cases),
            notes=_notes(config.chains),
        )
        return self._finish(report, config, started)

    def cmd_sweep(self, config: RunConfig) -> EnsembleReport:
        started = time.perf_counter()
        chain = get_chain(config.chains[0])
        self._check_functions(config)
        unknown = sorted((set(config.grid) | set(config.params)) - set(chain.param_names))
        if unknown:
            raise ExceptionInvalidData(f"chain {chain.id} does not take parameters: {', '.join(unknown)}")
        missing = [name for name in chain.param_names if name not in config.grid and name not in config.params]
        if missing:
            raise ExceptionInvalidData(f"sweep of {chain.id} needs a grid or a value for: {', '.join(missing)}")

        names = [name for name in chain.param_names if name in config.grid]
        points = [
            {**{name: value for name, value in config.params.items() if name not in config.grid}, **dict(zip(names, values))}
            for values in itertools.product(*(config.grid[name] for name in names))
        ]
        trials = config.generator.trials if config.generator is not None else 1
        functions = _functions_for(chain, config.functions)

        tasks: List[TrialTask] = []
        groups: List[Tuple[Dict[str, float], Optional[str], List[int]]] = []
        for point in points:
            for f in functions:
                indices = []
                for trial in range(trials):
                    indices.append(len(tasks))
                    tasks.append(self._task(config, len(tasks), trial, chain, f, point))
                groups.append((point, f, indices))

        cases = run_tasks(tasks, config.backend, config.workers)
        rows = [self._sweep_row(point, f, [cases[i] for i in indices]) for point, f, indices in groups]
        report = EnsembleReport(
            command=Command.SWEEP,
            config=config.echo(),
            cases=cases,
            aggregate=_aggregate(cases),
            rows=rows,
            notes=_notes([chain.id]),
        )
        return self._finish(report, config, started)

    def _sweep_row(self, point: Dict[str, float], f: Optional[str], cases: List[CaseSummary]) -> SweepRow:
        evaluated = [case for case in cases if case.margins]
        worst = min(case.worst_margin for case in evaluated) if evaluated else None
        gaps = [float(max(column)) for column in zip(*(case.gaps for case in evaluated))] if evaluated else []
        return SweepRow(params=point, f=f, worst_margin=worst, gaps=gaps, holds=all(case.holds for case in cases))

    def cmd_paper_example(self, config: Optional[RunConfig] = None) -> EnsembleReport:
        """The three weighted logarithmic means at lambda=3/4 on A=diag(1,2), B=diag(2,1)."""
        started = time.perf_counter()
        config = config or RunConfig(command=Command.PAPER_EXAMPLE)
        A, B = HermitianMatrix.diag([1.0, 2.0]), HermitianMatrix.diag([2.0, 1.0])
        oracles = example_oracles()

        means: List[MeanResult] = []
        rows: List[ExampleRow] = []
        for kind_id in (MeanKindId.PAL_LOG, MeanKindId.WLOG_HARM, MeanKindId.WLOG_GEOM):
            kind = MeanKind(id=kind_id, weight=EXAMPLE_WEIGHT)
            value = mean(kind, A, B)
            means.append(_mean_result(kind, value))
            for k in range(2):
                computed = float(np.real(value.entries[k, k]))
                oracle = oracles[kind_id][k]
                printed = EXAMPLE_PRINTED[kind_id][k]
                deviation = abs(computed - oracle)
                swapped = kind_id != MeanKindId.PAL_LOG
                rows.append(
                    ExampleRow(
                        mean=kind_id.value,
                        entry=f"({k + 1},{k + 1})",
                        computed=computed,
                        oracle=oracle,
                        printed=printed,
                        deviation=deviation,
                        ok=deviation <= EXAMPLE_TOL,
                        note="printed value belongs to the other weighted logarithmic mean" if swapped else None,
                    )
                )
                logger.info(
                    f"{kind_id.value}{rows[-1].entry}: computed={computed:.6f} oracle={oracle:.6f} "
                    f"printed={printed:.4f} deviation={deviation:.2e}"
                )

        report = EnsembleReport(
            command=Command.PAPER_EXAMPLE,
            config=config.echo(),
            means=means,
            examples=rows,
            notes=[SWAP_NOTE],
        )
        logger.warning(SWAP_NOTE)
        return self._finish(report, config, started)

bench_use_case = BenchUseCase()

def cmd_mean(config: RunConfig) -> EnsembleReport:
    return bench_use_case.cmd_mean(config)

def cmd_verify(config: RunConfig) -> EnsembleReport:
    return bench_use_case.cmd_verify(config)

def cmd_sweep(config: RunConfig) -> EnsembleReport:
    return bench_use_case.cmd_sweep(config)

def cmd_paper_example(config: Optional[RunConfig] = None) -> EnsembleReport:
    return bench_use_case.cmd_paper_example(config)
