import math

import numpy as np
import pytest

from lpqlab import criteria, discretize, normest, weights
from lpqlab.criteria import CriterionSet, CriterionValue
from lpqlab.errors import NormError
from lpqlab.normest import Method, NormOptions
from lpqlab.params import INF, OperatorKind, classify, constants, derive
from tests import data

MATRIX = np.array([[1.0, 2.0], [3.0, 4.0], [0.5, 0.0]])


def test_lp_norm():
    assert normest.lp_norm([3, 4], 2) == pytest.approx(5)
    assert normest.lp_norm([3, -4], INF) == 4
    assert normest.lp_norm([], 2) == 0
    assert normest.lp_norm([0, 0], 1) == 0
    assert normest.lp_norm([1e200, 1e200], 2) == pytest.approx(math.sqrt(2) * 1e200)


def test_ratio():
    assert normest.ratio(np.eye(2), np.array([1.0, 0.0]), 2, 2) == 1
    assert normest.ratio(np.eye(2), np.zeros(2), 2, 2) == 0


def test_svd():
    estimate = normest.norm_pq(MATRIX, 2, 2)
    assert estimate.method is Method.SVD
    assert estimate.method.exact
    assert estimate.lower_bound == pytest.approx(np.linalg.norm(MATRIX, 2))
    assert np.all(estimate.extremal >= 0)


def test_exact_column():
    estimate = normest.norm_pq(MATRIX, 1, 2)
    assert estimate.method is Method.EXACT_COLUMN
    assert estimate.lower_bound == pytest.approx(math.sqrt(4 + 16))


def test_exact_row():
    estimate = normest.norm_pq(MATRIX, 2, INF)
    assert estimate.method is Method.EXACT_ROW
    assert estimate.lower_bound == pytest.approx(5)
    assert normest.norm_pq(MATRIX, 1, INF).lower_bound == pytest.approx(4)
    assert normest.norm_pq(MATRIX, INF, INF).lower_bound == pytest.approx(7)


def test_exact_ones():
    estimate = normest.norm_pq(MATRIX, INF, 2)
    assert estimate.method is Method.EXACT_ONES
    assert estimate.lower_bound == pytest.approx(math.sqrt(9 + 49 + 0.25))
    assert normest.norm_pq(MATRIX, INF, 0.5).heuristic


def test_exact_column_sums():
    estimate = normest.norm_pq(MATRIX, 2, 1)
    assert estimate.method is Method.EXACT_COLUMN_SUMS
    assert estimate.lower_bound == pytest.approx(math.sqrt(4.5**2 + 6**2))


def test_zero_matrix():
    assert normest.norm_pq(np.zeros((2, 2)), 3, 2).lower_bound == 0


def test_iterative_matches_brute_force():
    estimate = normest.norm_pq(MATRIX, 3, 2)
    assert estimate.method is Method.NONLINEAR_POWER
    assert not estimate.method.exact
    assert estimate.converged
    assert estimate.restarts == NormOptions().restarts
    assert estimate.lower_bound == pytest.approx(normest.brute_force_norm(MATRIX, 3, 2), abs=1e-4)


def test_force_iterative_reproduces_svd():
    opts = NormOptions(force_iterative=True)
    estimate = normest.norm_pq(MATRIX, 2, 2, opts)
    assert estimate.method is Method.NONLINEAR_POWER
    assert estimate.lower_bound == pytest.approx(np.linalg.norm(MATRIX, 2), rel=1e-6)


def test_seed_is_reproducible():
    opts = NormOptions(seed=7)
    first = normest.norm_pq(MATRIX, 1.5, 1.2, opts)
    second = normest.norm_pq(MATRIX, 1.5, 1.2, opts)
    assert first.lower_bound == second.lower_bound
    assert first.seed == 7


def test_quasi_norm_is_heuristic():
    estimate = normest.norm_pq(MATRIX, 2, 0.5)
    assert estimate.heuristic
    # never below the ones start it iterates from
    assert estimate.lower_bound >= normest.ratio(MATRIX, np.ones(2), 2, 0.5) * (1 - 1e-12)


@pytest.mark.parametrize(
    'matrix,p,q',
    [
        (np.array([[-1.0]]), 2, 2),
        (np.array([[math.inf]]), 2, 2),
        (np.ones(3), 2, 2),
        (np.ones((2, 2)), 0.5, 2),
        (np.ones((2, 2)), 2, 0),
    ],
)
def test_norm_errors(matrix, p, q):
    with pytest.raises(NormError):
        normest.norm_pq(matrix, p, q)


def test_brute_force_limits():
    with pytest.raises(NormError):
        normest.brute_force_norm(np.ones((2, 4)), 2, 2)
    assert normest.brute_force_norm(np.array([[2.0], [0.0]]), 3, 1) == pytest.approx(2)


def test_operator_dispatch(small_grid):
    op = discretize.build('laplace', derive(1, 2, 2), data.ONE, None, small_grid, small_grid)
    assert normest.norm_pq(op, 2, 2).lower_bound == pytest.approx(
        normest.norm_pq(op.matrix, 2, 2).lower_bound
    )
    share = normest.span_sensitivity(op, normest.norm_pq(op, 2, 2))
    assert 0 <= share <= 1


def test_bound_check_laplace(small_grid):
    exps = derive(1, 2, 2)
    cs = criteria.evaluate(exps, OperatorKind.LAPLACE, data.ONE)
    op = discretize.build('laplace', exps, data.ONE, None, small_grid, small_grid)
    report = normest.bound_check(normest.norm_pq(op, 2, 2), cs)
    assert not report.ratio_only
    assert report.lower_ok
    assert report.upper_ok
    assert not report.violated
    assert report.upper == pytest.approx(2, rel=1e-6)


def test_bound_check_ratio_only():
    exps = derive(1, 2, 2)
    regime = classify(exps, OperatorKind.STIELTJES)
    entries = {tag: CriterionValue(tag, 2.0) for tag in regime.tags}
    cs = CriterionSet(regime, entries, constants(regime, exps))
    estimate = normest.norm_pq(np.array([[3.0]]), 2, 2)
    report = normest.bound_check(estimate, cs)
    assert report.ratio_only
    assert report.ratio == pytest.approx(1.5)
    assert not report.violated


def test_bound_check_violation():
    exps = derive(1, 1, 2)
    regime = classify(exps, OperatorKind.LAPLACE)
    entries = {'B_q': CriterionValue('B_q', 1.0), 'Bbar_q': CriterionValue('Bbar_q', 1.0)}
    cs = CriterionSet(regime, entries, constants(regime, exps))
    report = normest.bound_check(normest.norm_pq(np.array([[1.0]]), 1, 2), cs)
    # the exact L^1 -> L^2 norm is 2^-1/2 B_q
    assert report.upper_ok is False
    assert report.violated


@pytest.mark.parametrize('lam,p,q', [(1, 2, 2), (1, 4, 2)])
def test_bound_check_random_weights(lam, p, q):
    exps = derive(lam, p, q)
    rng = np.random.default_rng([normest.DEFAULT_SEED, p])
    for _ in range(100):
        v = weights.random_piecewise(rng)
        grid = discretize.log_grid(1e-4, 1e4, 16, v.breakpoints())
        op = discretize.build('laplace', exps, v, None, grid, grid)
        cs = criteria.evaluate(exps, OperatorKind.LAPLACE, v)
        report = normest.bound_check(normest.norm_pq(op, p, q), cs)
        assert report.lower_ok, v.describe()
        assert report.upper_ok, v.describe()


def test_extrapolate_span():
    spans = (10.0, 20.0, 30.0)
    limit, end = normest.extrapolate_span(spans, [3 - 5 / (s + 2) ** 2 for s in spans])
    assert limit == pytest.approx(3, rel=1e-9)
    assert end == pytest.approx(2, rel=1e-6)
    limit, end = normest.extrapolate_span(spans, [3 - 5 / s**2 for s in spans])
    assert limit == pytest.approx(3, rel=1e-9)
    assert end == pytest.approx(0, abs=1e-6)


def test_extrapolate_span_fallbacks():
    # linear growth admits no end length: two-point fit on the last pair
    limit, end = normest.extrapolate_span((10, 20, 30), (1.0, 2.0, 3.0))
    assert (limit, end) == (pytest.approx(3.8), 0.0)
    assert normest.extrapolate_span((10, 20, 30), (2.0, 2.0, 2.0)) == (2.0, 0.0)
    with pytest.raises(NormError):
        normest.extrapolate_span((10, 20), (1.0, 2.0))
    with pytest.raises(NormError):
        normest.extrapolate_span((20, 10, 30), (1.0, 2.0, 3.0))


@pytest.mark.parametrize(
    'kind,w,classical',
    [
        ('laplace', None, math.sqrt(math.pi)),
        ('stieltjes', data.ONE, math.pi),
        ('hardy', data.ONE, 2.0),
    ],
)
def test_span_limit_classical(kind, w, classical):
    limit = normest.span_limit(kind, derive(1, 2, 2), data.ONE, w, points_per_decade=16)
    assert limit.decades == normest.SPAN_DECADES
    # the grid 1e-4 .. 1e4 alone misses the classical norm by more than 4%
    assert limit.values[0] < 0.96 * classical
    assert limit.values[0] < limit.values[1] < limit.values[2] < classical
    assert limit.limit == pytest.approx(classical, rel=0.02)
