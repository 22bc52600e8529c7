from __future__ import annotations

import logging
import pathlib
from typing import List, Optional, Sequence

import click

from lpqlab import job, report, selftest
from lpqlab.criteria import CriterionCurve, CriterionSet, CriterionValue, evaluate
from lpqlab.diagnostics import cross_validate, spectrum, tail_decay
from lpqlab.discretize import DiscretizedOperator, Grid, build, log_grid, truncate
from lpqlab.errors import (
    BranchMismatch,
    ConfigError,
    ExportError,
    IncompleteCriteria,
    LPQError,
    NormError,
    ParameterDomainError,
    QuadratureError,
    SpanError,
    WeightError,
)
from lpqlab.normest import NormEstimate, NormOptions, bound_check, brute_force_norm, norm_pq
from lpqlab.params import INF, Exponents, OperatorKind, classify, constants, derive
from lpqlab.verdict import Answer, Verdict, boundedness_verdict, compactness_verdict
from lpqlab.weights import Weight

__version__ = report.VERSION

__all__ = [
    'Answer',
    'BranchMismatch',
    'CLISystemExit',
    'ConfigError',
    'CriterionCurve',
    'CriterionSet',
    'CriterionValue',
    'DiscretizedOperator',
    'Exponents',
    'ExportError',
    'Grid',
    'INF',
    'IncompleteCriteria',
    'LPQError',
    'NormError',
    'NormEstimate',
    'NormOptions',
    'OperatorKind',
    'ParameterDomainError',
    'QuadratureError',
    'SpanError',
    'Verdict',
    'Weight',
    'WeightError',
    'bound_check',
    'boundedness_verdict',
    'brute_force_norm',
    'build',
    'classify',
    'compactness_verdict',
    'constants',
    'cross_validate',
    'derive',
    'evaluate',
    'log_grid',
    'main',
    'norm_pq',
    'print_table',
    'spectrum',
    'tail_decay',
    'truncate',
]


def print_table(rows: Sequence[report.Row]):
    click.echo(''.join(report.render_table(rows)), nl=False)


def validate_tasks(ctx, param, value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    tasks = [task.strip() for task in value.split(',') if task.strip()]
    unknown = [task for task in tasks if task not in job.TASKS]
    if not tasks or unknown:
        raise click.BadParameter(f'must be a comma separated subset of {",".join(job.TASKS)}')
    return tasks


class CLISystemExit(SystemExit):
    pass


def _print_summary(result: report.Report, out: pathlib.Path):
    exps = result.exponents
    branch = result.regime.branch.value if result.regime else '-'
    click.echo(f'{branch}  lambda={exps.lam:g} p={exps.p:g} q={exps.q:g}')
    if result.criteria:
        print_table(report.criterion_rows(result.regime, result.criteria))
    if result.verdict is not None:
        verdict = result.verdict
        click.echo(f'bounded: {verdict.bounded.value}  compact: {verdict.compact.value}')
        if verdict.evidence:
            print_table(report.evidence_rows(verdict))
    if result.norm is not None:
        estimate = result.norm
        line = f'norm >= {report.format_float(estimate.lower_bound)} ({estimate.method.value})'
        if estimate.heuristic:
            line += ', quasi-norm heuristic'
        click.echo(line)
    if result.bounds is not None:
        bounds = result.bounds
        if bounds.ratio_only:
            click.echo(f'norm / criterion: {report.format_float(bounds.ratio)}')
        else:
            lower = report.format_float(bounds.lower)
            upper = report.format_float(bounds.upper)
            status = 'VIOLATED' if bounds.violated else 'ok'
            click.echo(f'bounds: {lower} <= norm <= {upper}  {status}')
    if result.consistency is not None:
        for finding in result.consistency.findings:
            click.echo(f'{finding.severity.value}: {finding.message}')
    for note in result.notes:
        click.echo(f'note: {note}')
    click.echo(f'report: {out}')


@click.group()
@click.option(
    '-v',
    '--verbose',
    count=True,
    help='Log progress to stderr; repeat for debug output',
)
@click.version_option(__version__)
def main(verbose: int):
    """
    Criteria, verdicts and norm estimates for weighted Laplace, Stieltjes
    and Hardy operators from L^p to L^q.
    """
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


@main.command(
    help="""
        Run the job described by the JSON file CONFIG.

        Exits with 0 when every requested verdict is determinate and every
        bound holds, 2 when a verdict is inconclusive, and 1 on a bound
        violation, a cross-validation error or invalid input.
        """,
)
@click.argument('config', type=click.Path(dir_okay=False))
@click.option(
    '-o',
    '--out',
    metavar='PATH',
    help='Where to write the JSON report  [default: CONFIG with suffix .report.json]',
)
@click.option(
    '--csv',
    'csv_dir',
    metavar='DIR',
    help='Write one t,value CSV file per criterion curve into DIR',
)
@click.option(
    '--task',
    'tasks',
    metavar='T1,T2',
    callback=validate_tasks,
    help=f'Override the tasks of the job file. Valid tasks are: {", ".join(job.TASKS)}',
)
@click.option(
    '--matrix',
    metavar='PATH',
    help='Write the discretized operator to PATH in the LPQOP1 binary layout',
)
@click.option(
    '-q',
    '--quiet',
    is_flag=True,
    help='Do not print the verdict tables',
)
def run(
    config: str,
    out: Optional[str],
    csv_dir: Optional[str],
    tasks: Optional[List[str]],
    matrix: Optional[str],
    quiet: bool,
):
    out_path = pathlib.Path(out) if out else pathlib.Path(config).with_suffix('.report.json')
    try:
        result = job.run_job(job.load_config(config), tasks=tasks, matrix=matrix)
        report.write_report(result, out_path)
        if csv_dir is not None:
            report.write_curves({**result.criteria, **result.extras}, csv_dir)
    except LPQError as e:
        click.echo(f'Error: {e}', err=True)
        raise CLISystemExit(1) from e
    if not quiet:
        _print_summary(result, out_path)
    if result.exit_code:
        raise CLISystemExit(result.exit_code)


@main.command(name='selftest')
@click.option('--fast', is_flag=True, help='Run reduced-size variants of the checks')
@click.option('-k', 'keyword', metavar='SUBSTRING', help='Only run checks whose name contains it')
def selftest_command(fast: bool, keyword: Optional[str]):
    """Run the built-in corpus of closed-form instances and oracle suites."""
    results = selftest.run_checks(fast=fast, keyword=keyword)
    if not results:
        raise click.BadParameter(f'no check matches {keyword!r}', param_hint='-k')
    print_table(results)
    failed = [r.check for r in results if not r.passed]
    if failed:
        click.echo(f'{len(failed)} of {len(results)} checks failed: {", ".join(failed)}', err=True)
        raise CLISystemExit(1)


if __name__ == '__main__':
    main()
