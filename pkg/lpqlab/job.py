"""
Job files: parsing, validation and the criteria -> normest -> diagnostics pipeline.

A job file is a JSON object. Unknown keys are rejected anywhere in it so
that a typo never silently falls back to a default.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import pathlib
import time
from typing import Iterable, Optional, Sequence, Tuple, Union

from lpqlab import criteria, diagnostics, discretize, normest, weights
from lpqlab.errors import ConfigError
from lpqlab.normest import NormOptions
from lpqlab.params import INF, OperatorKind, derive
from lpqlab.report import Report
from lpqlab.verdict import Answer, boundedness_verdict, compactness_verdict
from lpqlab.weights import Weight

logger = logging.getLogger(__name__)

TASKS = ('criteria', 'normest', 'verify', 'compactness', 'spectrum', 'tails')
DEFAULT_TASKS = ('criteria', 'normest', 'verify', 'compactness')

# tasks pulled in by a requested task
_REQUIRES = {
    'verify': ('criteria', 'normest'),
    'compactness': ('criteria',),
}
_NEEDS_OPERATOR = {'normest', 'verify', 'compactness', 'spectrum', 'tails'}

_TOP_KEYS = {
    'operator',
    'lambda',
    'p',
    'q',
    'v',
    'w',
    'grid',
    'normest',
    'tasks',
    'interval',
    'diagnostics',
    'tail_grid',
}


@dataclasses.dataclass(frozen=True)
class GridConfig:
    t_min: float = 1e-4
    t_max: float = 1e4
    points_per_decade: int = 64

    def build(self, breakpoints: Iterable[float] = ()) -> discretize.Grid:
        return discretize.log_grid(self.t_min, self.t_max, self.points_per_decade, breakpoints)


@dataclasses.dataclass(frozen=True)
class DiagnosticsConfig:
    splits: Optional[int] = None
    spectrum_k: int = 12


@dataclasses.dataclass(frozen=True)
class JobConfig:
    operator: OperatorKind
    lam: float
    p: float
    q: float
    v: Weight = dataclasses.field(repr=False)
    w: Optional[Weight] = dataclasses.field(default=None, repr=False)
    grid: GridConfig = GridConfig()
    normest: NormOptions = NormOptions()
    tasks: Tuple[str, ...] = DEFAULT_TASKS
    interval: Tuple[float, float] = (0.0, INF)
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    tail_grid: Optional[GridConfig] = None
    raw: dict = dataclasses.field(default_factory=dict, repr=False)
    notes: Tuple[str, ...] = ()

    def breakpoints(self) -> Tuple[float, ...]:
        """Weight jumps and finite interval ends, each placed on a grid node"""
        points = set(self.v.breakpoints())
        if self.w is not None and self.operator is not OperatorKind.LAPLACE:
            points.update(self.w.breakpoints())
        points.update(c for c in self.interval if 0 < c < INF)
        return tuple(sorted(points))


def _object(value, keys: Iterable[str], path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f'expected an object, got {type(value).__name__}', path)
    unknown = set(value) - set(keys)
    if unknown:
        raise ConfigError(f'unknown keys {sorted(unknown)}', path)
    return value


def _number(value, path: str, allow_inf: bool = False) -> float:
    if allow_inf and value == 'inf':
        return INF
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'expected a number, got {value!r}', path)
    return float(value)


def _integer(value, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f'expected an integer, got {value!r}', path)
    if value < minimum:
        raise ConfigError(f'must be at least {minimum}, got {value}', path)
    return value


def _grid(value, path: str) -> GridConfig:
    value = _object(value, ('t_min', 't_max', 'points_per_decade'), path)
    default = GridConfig()
    return GridConfig(
        t_min=_number(value.get('t_min', default.t_min), f'{path}.t_min'),
        t_max=_number(value.get('t_max', default.t_max), f'{path}.t_max'),
        points_per_decade=_integer(
            value.get('points_per_decade', default.points_per_decade),
            f'{path}.points_per_decade',
            minimum=1,
        ),
    )


def _normest(value) -> NormOptions:
    value = _object(value, ('restarts', 'max_iter', 'tol', 'seed'), 'normest')
    default = NormOptions()
    tol = _number(value.get('tol', default.tol), 'normest.tol')
    if tol <= 0:
        raise ConfigError('must be positive', 'normest.tol')
    return NormOptions(
        restarts=_integer(value.get('restarts', default.restarts), 'normest.restarts', 1),
        max_iter=_integer(value.get('max_iter', default.max_iter), 'normest.max_iter', 1),
        tol=tol,
        seed=_integer(value.get('seed', default.seed), 'normest.seed'),
    )


def _tasks(value, path: str = 'tasks') -> Tuple[str, ...]:
    if isinstance(value, str):
        value = [task.strip() for task in value.split(',') if task.strip()]
    if not isinstance(value, list) or not all(isinstance(task, str) for task in value):
        raise ConfigError('expected a list of task names', path)
    unknown = [task for task in value if task not in TASKS]
    if unknown:
        raise ConfigError(f'unknown tasks {unknown}; choose from {list(TASKS)}', path)
    return expand_tasks(value)


def expand_tasks(tasks: Sequence[str]) -> Tuple[str, ...]:
    """Requested tasks plus their prerequisites, in pipeline order"""
    wanted = set(tasks)
    for task in tasks:
        wanted.update(_REQUIRES.get(task, ()))
    return tuple(task for task in TASKS if task in wanted)


def _interval(value) -> Tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError('expected [c1, c2]', 'interval')
    c1 = _number(value[0], 'interval[0]')
    c2 = _number(value[1], 'interval[1]', allow_inf=True)
    if not 0 <= c1 < c2:
        raise ConfigError(f'need 0 <= c1 < c2, got [{c1}, {c2}]', 'interval')
    return c1, c2


def _diagnostics(value) -> DiagnosticsConfig:
    value = _object(value, ('splits', 'spectrum_k'), 'diagnostics')
    splits = value.get('splits')
    return DiagnosticsConfig(
        splits=None if splits is None else _integer(splits, 'diagnostics.splits', 1),
        spectrum_k=_integer(value.get('spectrum_k', 12), 'diagnostics.spectrum_k', 1),
    )


def parse_config(data) -> JobConfig:
    data = _object(data, _TOP_KEYS, '$')
    for key in ('operator', 'lambda', 'p', 'q', 'v'):
        if key not in data:
            raise ConfigError('missing required key', key)
    try:
        operator = OperatorKind(data['operator'])
    except ValueError:
        choices = [kind.value for kind in OperatorKind]
        message = f'expected one of {choices}, got {data["operator"]!r}'
        raise ConfigError(message, 'operator') from None
    lam = _number(data['lambda'], 'lambda')
    p = _number(data['p'], 'p', allow_inf=True)
    q = _number(data['q'], 'q', allow_inf=True)
    derive(lam, p, q)
    notes = []
    w = None
    if 'w' in data:
        if operator is OperatorKind.LAPLACE:
            notes.append('w ignored: the Laplace operator has outer weight 1')
        else:
            w = weights.from_literal(data['w'], 'w')
    interval = _interval(data['interval']) if 'interval' in data else (0.0, INF)
    return JobConfig(
        operator=operator,
        lam=lam,
        p=p,
        q=q,
        v=weights.from_literal(data['v'], 'v'),
        w=w,
        grid=_grid(data.get('grid', {}), 'grid'),
        normest=_normest(data.get('normest', {})),
        tasks=_tasks(data['tasks']) if 'tasks' in data else DEFAULT_TASKS,
        interval=interval,
        diagnostics=_diagnostics(data.get('diagnostics', {})),
        tail_grid=_grid(data['tail_grid'], 'tail_grid') if 'tail_grid' in data else None,
        raw=data,
        notes=tuple(notes),
    )


def load_config(path: Union[str, pathlib.Path]) -> JobConfig:
    try:
        text = pathlib.Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f'cannot read job file: {e.strerror}', str(path)) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f'line {e.lineno} column {e.colno}: {e.msg}', str(path)) from e
    return parse_config(data)


def exit_code(report: Report, tasks: Sequence[str]) -> int:
    """0 determinate and consistent, 1 bound violation or inconsistency, 2 inconclusive"""
    if report.bounds is not None and report.bounds.violated:
        return 1
    if report.consistency is not None and report.consistency.has_errors:
        return 1
    if report.verdict is not None:
        answers = [report.verdict.bounded]
        if 'compactness' in tasks:
            answers.append(report.verdict.compact)
        if Answer.INCONCLUSIVE in answers:
            return 2
    return 0


def run_job(
    config: JobConfig,
    tasks: Optional[Sequence[str]] = None,
    matrix: Optional[Union[str, pathlib.Path]] = None,
) -> Report:
    """Run the requested tasks and return the report with its exit code filled in"""
    started = time.monotonic()
    tasks = expand_tasks(tasks) if tasks is not None else config.tasks
    kind = config.operator
    exps = derive(config.lam, config.p, config.q)
    report = Report(
        config={**config.raw, 'tasks': list(tasks)},
        exponents=exps,
        notes=list(config.notes),
    )
    logger.info('running %s for %s', ','.join(tasks), kind.value)

    cs = None
    if 'criteria' in tasks:
        cs = criteria.evaluate(exps, kind, config.v, config.w, config.interval)
        report.regime = cs.regime
        report.constants = cs.constants
        report.criteria = cs.entries
        report.extras = cs.extras
        if 'compactness' in tasks:
            report.verdict = compactness_verdict(cs)
        else:
            report.verdict = boundedness_verdict(cs)

    op = None
    if matrix is not None or _NEEDS_OPERATOR & set(tasks):
        grid = config.grid.build(config.breakpoints())
        op = discretize.build(kind, exps, config.v, config.w, grid, grid)
        if config.interval != (0.0, INF) and kind is not OperatorKind.STIELTJES:
            op = discretize.truncate(op, config.interval, config.interval)
        if matrix is not None:
            discretize.write_matrix(matrix, op.matrix)

    if 'normest' in tasks:
        report.norm = normest.norm_pq(op, exps.p, exps.q, config.normest)
        report.span_sensitivity = normest.span_sensitivity(op, report.norm)
    if 'verify' in tasks:
        report.bounds = normest.bound_check(report.norm, cs)

    bounded_no = report.verdict is not None and report.verdict.bounded is Answer.NO
    if {'tails', 'compactness'} & set(tasks):
        if bounded_no:
            report.notes.append('tail decay skipped: the operator is unbounded')
        else:
            tail_op = op if config.tail_grid is None else None
            tail_grid = None
            if config.tail_grid is not None:
                tail_grid = config.tail_grid.build(config.breakpoints())
            report.tails = diagnostics.tail_decay(
                kind,
                exps,
                config.v,
                config.w,
                splits=config.diagnostics.splits,
                grid=tail_grid,
                opts=config.normest,
                op=tail_op,
            )
    two = exps.p == 2 and exps.q == 2
    if 'spectrum' in tasks or ('compactness' in tasks and two):
        if not two:
            report.notes.append('spectrum uses the p = q = 2 scaling of the kernel')
        report.spectrum = diagnostics.spectrum(
            op, k=config.diagnostics.spectrum_k, seed=config.normest.seed
        )
    if 'compactness' in tasks:
        report.consistency = diagnostics.cross_validate(
            report.verdict, report.tails, report.spectrum
        )
        for finding in report.consistency.findings:
            if finding.severity is not diagnostics.Severity.INFO:
                logger.warning('cross-validation: %s', finding.message)

    report.exit_code = exit_code(report, tasks)
    report.wall_clock = time.monotonic() - started
    return report
