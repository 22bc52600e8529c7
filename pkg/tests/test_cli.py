import json
import os

import click.testing

import lpqlab
from lpqlab import discretize
from tests import data


def invoke(*args):
    runner = click.testing.CliRunner(mix_stderr=False)
    return runner.invoke(lpqlab.main, [str(arg) for arg in args])


def test_version():
    result = invoke('--version')
    assert result.exit_code == 0
    assert lpqlab.__version__ in result.stdout


def test_run(tempdir):
    config = data.write_job(os.path.join(tempdir, 'bump.json'), data.LAPLACE_JOB)
    result = invoke('run', config)
    assert result.exit_code == 0, result.stderr
    assert 'bounded: yes  compact: yes' in result.stdout
    out = os.path.join(tempdir, 'bump.report.json')
    assert f'report: {out}' in result.stdout
    with open(out, encoding='utf-8') as file:
        report = json.load(file)
    assert report['verdict']['bounded'] == 'yes'
    assert report['exit_code'] == 0


def test_run_quiet_out_csv(tempdir):
    config = data.write_job(os.path.join(tempdir, 'bump.json'), data.LAPLACE_JOB)
    out = os.path.join(tempdir, 'custom.json')
    csv_dir = os.path.join(tempdir, 'curves')
    result = invoke('run', config, '-q', '-o', out, '--csv', csv_dir, '--task', 'criteria')
    assert result.exit_code == 0, result.stderr
    assert result.stdout == ''
    assert os.path.exists(out)
    assert os.listdir(csv_dir) == ['A_L.csv']


def test_run_matrix(tempdir):
    config = data.write_job(os.path.join(tempdir, 'bump.json'), data.LAPLACE_JOB)
    matrix = os.path.join(tempdir, 'op.bin')
    result = invoke('run', config, '-q', '--task', 'criteria', '--matrix', matrix)
    assert result.exit_code == 0, result.stderr
    assert discretize.read_matrix(matrix).shape == (34, 34)


def test_run_domain_error(tempdir):
    config = data.write_job(os.path.join(tempdir, 'bad.json'), {**data.LAPLACE_JOB, 'p': 0.5})
    result = invoke('run', config)
    assert result.exit_code == 1
    assert isinstance(result.exception, lpqlab.CLISystemExit)
    assert 'p must satisfy' in result.stderr
    assert not os.path.exists(os.path.join(tempdir, 'bad.report.json'))


def test_run_unknown_key(tempdir):
    config = data.write_job(os.path.join(tempdir, 'bad.json'), {**data.LAPLACE_JOB, 'pp': 2})
    result = invoke('run', config)
    assert result.exit_code == 1
    assert result.stderr.startswith('Error: $: unknown keys')


def test_run_missing_file(tempdir):
    result = invoke('run', os.path.join(tempdir, 'missing.json'))
    assert result.exit_code == 1
    assert 'cannot read job file' in result.stderr


def test_run_bad_task(tempdir):
    config = data.write_job(os.path.join(tempdir, 'bump.json'), data.LAPLACE_JOB)
    result = invoke('run', config, '--task', 'criteria,plot')
    assert result.exit_code == 2
    assert 'must be a comma separated subset' in result.stderr


def test_selftest():
    result = invoke('selftest', '--fast', '-k', 'compose')
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0].split() == ['check', 'expected', 'observed', 'status']
    assert lines[2].startswith('compose')
    assert lines[2].endswith('ok')


def test_selftest_no_match():
    result = invoke('selftest', '-k', 'nomatch')
    assert result.exit_code == 2
    assert 'no check matches' in result.stderr
