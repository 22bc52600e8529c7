import os

import numpy as np
import pytest

from lpqlab import discretize, job
from lpqlab.errors import ConfigError, ParameterDomainError
from lpqlab.normest import BoundReport
from lpqlab.params import INF, OperatorKind, derive
from lpqlab.report import Report
from lpqlab.verdict import Answer, Verdict
from tests import data


def test_parse_config_defaults():
    config = job.parse_config({'operator': 'hardy', 'lambda': 1, 'p': 2, 'q': 'inf', 'v': 1})
    assert config.operator is OperatorKind.HARDY
    assert config.q == INF
    assert config.tasks == job.DEFAULT_TASKS
    assert config.grid == job.GridConfig()
    assert config.interval == (0.0, INF)
    assert config.w is None
    assert config.notes == ()


def test_parse_config_laplace_ignores_w():
    config = job.parse_config({**data.LAPLACE_JOB, 'w': 2})
    assert config.w is None
    assert config.notes == ('w ignored: the Laplace operator has outer weight 1',)


def test_parse_config_stieltjes():
    config = job.parse_config(data.STIELTJES_JOB)
    assert config.w is not None
    assert config.tasks == ('criteria', 'normest')
    assert config.grid.points_per_decade == 8


@pytest.mark.parametrize(
    'update,path',
    [
        ({'colour': 'red'}, '$'),
        ({'operator': 'fourier'}, 'operator'),
        ({'p': '2'}, 'p'),
        ({'lambda': True}, 'lambda'),
        ({'grid': {'points_per_decade': 0}}, 'grid.points_per_decade'),
        ({'grid': {'step': 1}}, 'grid'),
        ({'normest': {'tol': 0}}, 'normest.tol'),
        ({'normest': {'restarts': 1.5}}, 'normest.restarts'),
        ({'interval': [2, 1]}, 'interval'),
        ({'interval': [0, 'inf', 3]}, 'interval'),
        ({'tasks': ['criteria', 'plot']}, 'tasks'),
        ({'diagnostics': {'splits': 0}}, 'diagnostics.splits'),
        ({'v': {'kind': 'bogus'}}, 'v'),
    ],
)
def test_parse_config_errors(update, path):
    with pytest.raises(ConfigError) as excinfo:
        job.parse_config({**data.LAPLACE_JOB, **update})
    assert excinfo.value.path.startswith(path)


def test_parse_config_missing_key():
    config = dict(data.LAPLACE_JOB)
    del config['v']
    with pytest.raises(ConfigError) as excinfo:
        job.parse_config(config)
    assert excinfo.value.path == 'v'


def test_parse_config_domain():
    with pytest.raises(ParameterDomainError):
        job.parse_config({**data.LAPLACE_JOB, 'p': 0.5})


def test_parse_config_interval():
    config = job.parse_config({**data.LAPLACE_JOB, 'interval': [0, 5]})
    assert config.interval == (0.0, 5.0)
    config = job.parse_config({**data.LAPLACE_JOB, 'interval': [1, 'inf']})
    assert config.interval == (1.0, INF)


def test_expand_tasks():
    assert job.expand_tasks(['verify']) == ('criteria', 'normest', 'verify')
    assert job.expand_tasks(['tails', 'compactness']) == ('criteria', 'compactness', 'tails')
    assert job.expand_tasks(['spectrum']) == ('spectrum',)
    config = job.parse_config({**data.LAPLACE_JOB, 'tasks': 'spectrum,verify'})
    assert config.tasks == ('criteria', 'normest', 'verify', 'spectrum')


def test_load_config(tempdir):
    path = data.write_job(os.path.join(tempdir, 'job.json'), data.LAPLACE_JOB)
    assert job.load_config(path).operator is OperatorKind.LAPLACE

    with pytest.raises(ConfigError) as excinfo:
        job.load_config(os.path.join(tempdir, 'missing.json'))
    assert 'cannot read job file' in str(excinfo.value)

    path = os.path.join(tempdir, 'broken.json')
    with open(path, 'w', encoding='utf-8') as file:
        file.write('{"operator": ')
    with pytest.raises(ConfigError) as excinfo:
        job.load_config(path)
    assert excinfo.value.path == path
    assert 'line 1' in str(excinfo.value)


def test_run_job_laplace():
    report = job.run_job(job.parse_config(data.LAPLACE_JOB))
    assert report.regime.branch.value == 'laplace-i'
    assert report.verdict.bounded is Answer.YES
    assert report.verdict.compact is Answer.YES
    assert report.criteria['A_L'].value == pytest.approx(2**-0.5, rel=1e-6)
    assert 0 < report.norm.lower_bound <= report.bounds.upper
    assert not report.bounds.violated
    assert 0 <= report.span_sensitivity <= 1
    assert report.tails is not None
    assert report.spectrum is not None
    assert not report.consistency.has_errors
    assert report.exit_code == 0
    assert report.config['tasks'] == list(job.DEFAULT_TASKS)
    assert report.wall_clock > 0


def test_run_job_criteria_only():
    report = job.run_job(job.parse_config(data.LAPLACE_JOB), tasks=['criteria'])
    assert report.norm is None
    assert report.bounds is None
    assert report.tails is None
    assert report.verdict.bounded is Answer.YES
    # compactness was not requested
    assert report.verdict.compact is Answer.INCONCLUSIVE
    assert report.exit_code == 0


def test_run_job_stieltjes_ratio_only():
    report = job.run_job(job.parse_config(data.STIELTJES_JOB), tasks=['verify'])
    assert report.bounds.ratio_only
    assert report.bounds.ratio > 0
    assert report.exit_code == 0


def test_run_job_writes_matrix(tempdir):
    path = os.path.join(tempdir, 'op.bin')
    report = job.run_job(job.parse_config(data.LAPLACE_JOB), tasks=['criteria'], matrix=path)
    matrix = discretize.read_matrix(path)
    # 33 nodes plus one at the breakpoint t = 2
    assert matrix.shape == (34, 34)
    assert np.all(matrix >= 0)
    assert report.norm is None


def test_run_job_unbounded_skips_tails():
    config = job.parse_config(
        {
            'operator': 'hardy',
            'lambda': 1,
            'p': 2,
            'q': 3,
            'v': 1,
            'w': 1,
            'grid': data.LAPLACE_JOB['grid'],
            'tasks': ['compactness'],
        }
    )
    report = job.run_job(config)
    assert report.verdict.bounded is Answer.NO
    assert report.tails is None
    assert 'tail decay skipped: the operator is unbounded' in report.notes
    assert report.exit_code == 0


def _report(bounded=Answer.YES, compact=Answer.YES, violated=False):
    exps = derive(1, 2, 2)
    bounds = BoundReport(
        estimate=1.0,
        criterion=1.0,
        lower=0.5,
        upper=0.5 if violated else 2.0,
        lower_ok=True,
        upper_ok=not violated,
        ratio=1.0,
        ratio_only=False,
    )
    return Report(config={}, exponents=exps, bounds=bounds, verdict=Verdict(bounded, compact, ()))


@pytest.mark.parametrize(
    'report,tasks,code',
    [
        (_report(), job.DEFAULT_TASKS, 0),
        (_report(violated=True), job.DEFAULT_TASKS, 1),
        (_report(compact=Answer.INCONCLUSIVE), job.DEFAULT_TASKS, 2),
        (_report(compact=Answer.INCONCLUSIVE), ('criteria', 'normest'), 0),
        (_report(bounded=Answer.INCONCLUSIVE), ('criteria',), 2),
    ],
)
def test_exit_code(report, tasks, code):
    assert job.exit_code(report, tasks) == code
