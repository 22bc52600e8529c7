import enum
import json
import math
import os
import pathlib

import numpy as np
import pytest

from lpqlab import criteria, report, verdict
from lpqlab.params import INF, OperatorKind, derive
from tests import data


class Color(enum.Enum):
    RED = 'red'


def test_to_jsonable_specials():
    assert report.to_jsonable(INF) == 'inf'
    assert report.to_jsonable(-INF) == '-inf'
    assert report.to_jsonable(math.nan) == 'nan'
    assert report.to_jsonable(np.float64(0.5)) == 0.5
    assert report.to_jsonable(np.array([1.0, INF])) == [1.0, 'inf']
    assert report.to_jsonable(Color.RED) == 'red'
    assert report.to_jsonable((1, pathlib.PurePosixPath('a/b'))) == [1, 'a/b']
    assert report.to_jsonable({1: None}) == {'1': None}


def test_to_jsonable_skips_hidden_fields():
    curve = criteria.make_curve('x', lambda t: np.ones_like(t), (1, 2), limits=False)
    out = report.to_jsonable(curve)
    assert 'point_fn' not in out
    assert 'samples' not in out['sup']
    assert out['limits'] == [None, None]


def test_float_repr_round_trip():
    value = 0.1 + 0.2
    assert report.loads(report.dumps({'x': value}))['x'] == value


def test_loads_revives_specials():
    text = report.dumps({'a': [INF, -INF], 'b': {'c': 'inf'}, 'd': 'other'})
    assert text.endswith('\n')
    out = report.loads(text)
    assert out['a'] == [INF, -INF]
    assert out['b']['c'] == INF
    assert out['d'] == 'other'


def test_write_report(tempdir):
    exps = derive(1, 2, 2)
    cs = criteria.evaluate(exps, OperatorKind.LAPLACE, data.BUMP)
    result = report.Report(
        config={'operator': 'laplace'},
        exponents=exps,
        regime=cs.regime,
        constants=cs.constants,
        criteria=cs.entries,
        extras=cs.extras,
        verdict=verdict.compactness_verdict(cs),
    )
    path = os.path.join(tempdir, 'out.json')
    report.write_report(result, path)
    with open(path, encoding='utf-8') as file:
        raw = json.load(file)
    assert raw['version'] == report.VERSION
    assert raw['exponents']['q_conj'] == 2
    assert raw['exponents']['r'] is None
    assert raw['regime']['branch'] == 'laplace-i'
    assert raw['verdict']['compact'] == 'yes'
    assert raw['criteria']['A_L']['sup']['value'] == pytest.approx(2**-0.5)
    assert raw['criteria']['A_L']['limits'][0]['kind'] == 'zero'


def test_write_curves(tempdir):
    cs = criteria.evaluate(derive(1, 1, 2), OperatorKind.LAPLACE, data.BUMP)
    written = report.write_curves({**cs.entries, **cs.extras}, os.path.join(tempdir, 'csv'))
    names = sorted(path.name for path in written)
    assert names == ['B_q.csv', 'Bbar_q.csv']
    with open(os.path.join(tempdir, 'csv', 'Bbar_q.csv'), encoding='utf-8') as file:
        assert file.readline() == 't,value\n'
    table = np.loadtxt(os.path.join(tempdir, 'csv', 'Bbar_q.csv'), delimiter=',', skiprows=1)
    assert table.shape[1] == 2
    assert np.all(np.diff(table[:, 0]) > 0)


@pytest.mark.parametrize(
    'value,text',
    [(None, '-'), (math.nan, 'nan'), (INF, 'inf'), (0.70710678118, '0.707107'), (2.0, '2')],
)
def test_format_float(value, text):
    assert report.format_float(value) == text


def test_rows():
    cs = criteria.evaluate(derive(1, 2, 2), OperatorKind.LAPLACE, data.UNIT_STEP)
    (row,) = report.criterion_rows(cs.regime, cs.entries)
    assert row.criterion == 'A_L'
    assert row.value == '1'
    assert row.limits == 'positive/zero'
    assert row.bounded == 'equivalent'
    rows = report.evidence_rows(verdict.compactness_verdict(cs))
    assert {row.question for row in rows} == {'bounded', 'compact'}
    assert all(row.note for row in rows)
