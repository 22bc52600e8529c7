import numpy as np
import pytest

from lpqlab import criteria, diagnostics, discretize
from lpqlab.diagnostics import Severity, TailDecayReport
from lpqlab.errors import SpanError
from lpqlab.params import Branch, Direction, OperatorKind, derive
from lpqlab.quadrature import LimitKind, LimitVerdict
from lpqlab.verdict import Answer, Evidence, Verdict, compactness_verdict
from tests import data


def limit(kind):
    return LimitVerdict(kind, None, (), None)


def tails(head, tail, monotone=True):
    return TailDecayReport(
        a_sequence=(0.1, 0.01, 0.001),
        b_sequence=(10.0, 100.0, 1000.0),
        splits=(),
        full_norm=1.0,
        head_verdict=limit(head),
        tail_verdict=limit(tail),
        monotone=monotone,
    )


def verdict(compact, *observations):
    evidence = tuple(
        Evidence('A_L', obs, None, Branch.LAPLACE_I, Direction.NECESSARY, 'compact')
        for obs in observations
    )
    return Verdict(Answer.YES, compact, evidence)


def test_default_splits():
    assert diagnostics.default_splits(discretize.log_grid(2e-3, 5e2, 4)) == 2
    with pytest.raises(SpanError):
        diagnostics.default_splits(discretize.log_grid(0.5, 5, 4))
    with pytest.raises(SpanError):
        diagnostics.default_splits(discretize.log_grid(2, 5, 4))


def test_tail_decay_compact_bump():
    exps = derive(1, 2, 2)
    grid = discretize.log_grid(1e-4, 1e4, 16)
    report = diagnostics.tail_decay(OperatorKind.LAPLACE, exps, data.BUMP, splits=3, grid=grid)
    assert report.a_sequence == pytest.approx((0.1, 0.01, 0.001))
    assert report.b_sequence == pytest.approx((10, 100, 1000))
    assert report.head_verdict.kind is LimitKind.ZERO
    assert report.tail_verdict.kind is LimitKind.ZERO
    assert all(split.triangle_ok for split in report.splits)
    # analytic bounds exist on the Laplace L^2 branch
    assert all(split.head_bound is not None for split in report.splits)
    assert report.full_norm > 0


def test_tail_decay_split_outside_grid():
    grid = discretize.log_grid(1e-2, 1e2, 8)
    with pytest.raises(SpanError):
        diagnostics.tail_decay(
            OperatorKind.LAPLACE, derive(1, 2, 2), data.BUMP, splits=5, grid=grid
        )


def test_spectrum_rank_one(small_grid):
    op = discretize.build(
        'custom',
        derive(1, 2, 2),
        data.ONE,
        None,
        small_grid,
        small_grid,
        kernel_fn=lambda x, y: np.ones(np.broadcast(x, y).shape),
    )
    report = diagnostics.spectrum(op, k=4)
    assert report.converged
    assert report.singular_values[0] == pytest.approx(np.sum(small_grid.quad_weights))
    assert report.rank_eps == 1


def test_spectrum_matches_svd(small_grid):
    op = discretize.build('laplace', derive(1, 2, 2), data.ONE, None, small_grid, small_grid)
    report = diagnostics.spectrum(op, k=3)
    expected = np.linalg.svd(op.matrix, compute_uv=False)[:3]
    np.testing.assert_allclose(report.singular_values, expected, rtol=1e-6)


def test_hilbert_matrix_ignores_exponents(small_grid):
    op = discretize.build('laplace', derive(1, 1, 4), data.ONE, None, small_grid, small_grid)
    two = discretize.build('laplace', derive(1, 2, 2), data.ONE, None, small_grid, small_grid)
    np.testing.assert_allclose(diagnostics.hilbert_matrix(op), two.matrix)


def test_cross_validate_compact_with_persisting_tail():
    report = diagnostics.cross_validate(
        verdict(Answer.YES), tails(LimitKind.ZERO, LimitKind.POSITIVE)
    )
    assert report.has_errors
    assert 'tail positive' in report.findings[0].message


def test_cross_validate_compact_inconclusive_tail():
    report = diagnostics.cross_validate(
        verdict(Answer.YES), tails(LimitKind.ZERO, LimitKind.INCONCLUSIVE)
    )
    assert not report.has_errors
    assert report.has_warnings


def test_cross_validate_limit_side():
    analytic = verdict(Answer.NO, 'limit positive at inf')
    report = diagnostics.cross_validate(analytic, tails(LimitKind.POSITIVE, LimitKind.ZERO))
    assert report.has_errors
    report = diagnostics.cross_validate(analytic, tails(LimitKind.ZERO, LimitKind.POSITIVE))
    assert report.consistent


def test_cross_validate_not_compact_both_vanish():
    report = diagnostics.cross_validate(verdict(Answer.NO), tails(LimitKind.ZERO, LimitKind.ZERO))
    assert [f.severity for f in report.findings] == [Severity.WARNING]


def test_cross_validate_spectrum():
    slow = diagnostics.SpectrumReport((1.0, 0.9, 0.8), None, None)
    report = diagnostics.cross_validate(verdict(Answer.YES), spec=slow)
    assert report.has_warnings
    fast = diagnostics.SpectrumReport((1.0, 1e-6, 0.0), 10.0, 1)
    report = diagnostics.cross_validate(verdict(Answer.NO), spec=fast)
    assert [f.severity for f in report.findings] == [Severity.INFO]
    assert not report.has_warnings


def test_cross_validate_inconclusive_and_non_monotone():
    report = diagnostics.cross_validate(
        verdict(Answer.INCONCLUSIVE), tails(LimitKind.ZERO, LimitKind.ZERO, monotone=False)
    )
    assert [f.severity for f in report.findings] == [Severity.INFO, Severity.INFO]
    assert report.consistent


def test_corpus_case_has_no_errors():
    exps = derive(1, 2, 2)
    grid = discretize.log_grid(1e-4, 1e4, 16)
    cs = criteria.evaluate(exps, OperatorKind.LAPLACE, data.UNIT_STEP)
    analytic = compactness_verdict(cs)
    op = discretize.build('laplace', exps, data.UNIT_STEP, None, grid, grid)
    report = diagnostics.cross_validate(
        analytic,
        diagnostics.tail_decay(OperatorKind.LAPLACE, exps, data.UNIT_STEP, op=op),
        diagnostics.spectrum(op),
    )
    assert analytic.compact is Answer.NO
    assert not report.has_errors
