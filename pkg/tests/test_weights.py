import math

import numpy as np
import pytest

from lpqlab import quadrature, weights
from lpqlab.errors import ConfigError, WeightError
from lpqlab.weights import INF, Piece
from tests import data


def test_indicator_is_closed():
    assert weights.evaluate(data.BUMP, 1) == 1
    assert weights.evaluate(data.BUMP, 2) == 1
    assert weights.evaluate(data.BUMP, 2.5) == 0
    assert weights.evaluate(data.BUMP, 0.5) == 0


def test_evaluate_rejects_nonpositive():
    with pytest.raises(WeightError):
        weights.evaluate(data.ONE, 0)
    with pytest.raises(WeightError):
        data.ONE(np.array([1.0, -1.0]))


def test_vectorized_call():
    np.testing.assert_allclose(data.QUARTER(np.array([1.0, 16.0])), [1.0, 0.5])


def test_zero_and_constant():
    assert weights.zero().is_zero
    assert weights.constant(0).is_zero
    assert not data.ONE.is_zero
    assert weights.evaluate(weights.constant(3), 1e6) == 3


def test_piece_validation():
    with pytest.raises(WeightError):
        Piece(2, 1, 1)
    with pytest.raises(WeightError):
        Piece(0, 1, -1)
    with pytest.raises(WeightError):
        weights.piecewise([Piece(0, 2, 1), Piece(1, 3, 1)])


def test_breakpoints():
    w = weights.piecewise([Piece(0, 1, 1), Piece(1, 2, 2, 1)])
    assert w.breakpoints() == (1, 2)
    assert data.ONE.breakpoints() == ()


def test_transformations():
    w = data.BUMP.scaled(2).times_power(1)
    assert weights.evaluate(w, 1.5) == pytest.approx(3)
    assert data.BUMP.scaled(0).is_zero
    assert weights.evaluate(data.QUARTER.powered(4), 2) == pytest.approx(0.5)
    r = data.ONE.restricted(1, 3)
    assert r.breakpoints() == (1, 3)
    assert data.BUMP.restricted(5, 6).is_zero


def test_tabulated_interpolates_power_law():
    # between (1, 1) and (2, 0.5) the interpolant is t^-1
    assert weights.evaluate(data.TENT, 1.5) == pytest.approx(1 / 1.5)
    assert weights.evaluate(data.TENT, 0.75) == pytest.approx(0.75)
    assert weights.evaluate(data.TENT, 3) == 0
    assert data.TENT.describe() == 'table[3]'


@pytest.mark.parametrize(
    'samples',
    [
        [],
        [(1, 1), (1, 2)],
        [(0, 1), (1, 2)],
        [(1, -1), (2, 1)],
    ],
)
def test_tabulated_rejects(samples):
    with pytest.raises(WeightError):
        weights.tabulated(samples)


def test_running_sup():
    assert weights.running_sup(data.BUMP, 0, 1.5) == 1
    assert weights.running_sup(data.BUMP, 3, INF) == 0
    assert weights.running_sup(data.QUARTER, 0, 1) == INF
    assert weights.running_sup(data.QUARTER, 1, INF) == 1
    with pytest.raises(WeightError):
        weights.running_sup(data.ONE, 2, 1)


def test_running_sup_log_piece():
    # t^-1 log(1 + t) decreases from 1 at 0
    w = weights.power(-1, l=1)
    assert weights.running_sup(w, 0, INF) == pytest.approx(1)
    # log(1 + t) / t^0.5 peaks at an interior point
    w = weights.power(-0.5, l=1)
    peak = weights.running_sup(w, 0, INF)
    ts = np.geomspace(1e-2, 1e3, 20001)
    assert peak == pytest.approx(float(np.max(w(ts))), rel=1e-6)


def test_running_sup_function():
    fn = weights.running_sup_function(data.TENT, 0.0, 'right')
    np.testing.assert_allclose(fn([0.75, 1.5, 4.0]), [0.75, 1.0, 1.0])
    fn = weights.running_sup_function(data.TENT, INF, 'left')
    np.testing.assert_allclose(fn([1.5, 3.0]), [1 / 1.5, 0.0])


def test_moment_integral_closed_form():
    assert weights.moment_integral(data.BUMP, 2, 0, (0, INF)).value == pytest.approx(1)
    # int_1^2 t^-1 dt
    assert weights.moment_integral(data.BUMP, 1, -1, (0, INF)).value == pytest.approx(math.log(2))
    # int_1^inf t^-2 dt
    assert weights.moment_integral(data.ONE, 1, -2, (1, INF)).value == pytest.approx(1)


def test_moment_integral_divergence():
    moment = weights.moment_integral(data.ONE, 1, -1, (0, 1))
    assert not moment.finite
    assert moment.divergent_at == 0
    moment = weights.moment_integral(data.ONE, 1, 0, (1, INF))
    assert moment.divergent_at == INF


def test_moment_integral_log_piece():
    # int_0^1 log(1 + t) dt = 2 log 2 - 1
    w = weights.piecewise([Piece(0, 1, 1, 0, 1)])
    value = weights.moment_integral(w, 1, 0, (0, INF)).value
    assert value == pytest.approx(2 * math.log(2) - 1, rel=1e-4)


def test_moment_integral_additive():
    rng = np.random.default_rng(0x5EED)
    for _ in range(100):
        w = weights.random_piecewise(rng)
        s, m = rng.uniform(0.5, 3), rng.uniform(-1, 1)
        a, b, c = np.sort(10 ** rng.uniform(-2, 2, 3))
        left = weights.moment_integral(w, s, m, (a, b))
        right = weights.moment_integral(w, s, m, (b, c))
        whole = weights.moment_integral(w, s, m, (a, c))
        slack = left.abs_error + right.abs_error + whole.abs_error + 1e-12 * whole.value
        assert abs(left.value + right.value - whole.value) <= slack


def test_moment_integral_matches_quadrature():
    rng = np.random.default_rng([0x5EED, 1])
    for _ in range(20):
        w = weights.random_piecewise(rng)
        s, m = rng.uniform(0.5, 3), rng.uniform(-1, 1)

        def f(t):
            return w(t) ** s * np.asarray(t, dtype=float) ** m

        closed = weights.moment_integral(w, s, m, (0, INF)).value
        numeric = quadrature.integrate(f, (0.1, 10.0), rel_tol=1e-12, breakpoints=w.breakpoints())
        assert numeric.value == pytest.approx(closed, rel=1e-10)


def test_moment_integral_rejects():
    with pytest.raises(WeightError):
        weights.moment_integral(data.ONE, 0, 0, (0, 1))
    with pytest.raises(WeightError):
        weights.moment_integral(data.ONE, 1, 0, (1, 1))


def test_cumulative():
    fn = weights.cumulative(data.ONE, 1, 0, 0, 'right')
    np.testing.assert_allclose(fn([1.0, 2.0]), [1.0, 2.0])
    fn = weights.cumulative(data.ONE, 1, -2, INF, 'left')
    np.testing.assert_allclose(fn([1.0, 2.0]), [1.0, 0.5])
    fn = weights.cumulative(data.ONE, 1, -1, 0, 'right')
    assert fn([1.0])[0] == INF


def test_check_local_integrability():
    assert weights.check_local_integrability(data.QUARTER, 2).local
    assert not weights.check_local_integrability(data.QUARTER, 4).local
    assert weights.check_local_integrability(data.BUMP, INF).local


def test_from_literal():
    assert weights.evaluate(weights.from_literal(2), 5) == 2
    assert weights.from_literal(0).is_zero
    w = weights.from_literal([{'from': 1, 'to': 2}, {'from': 2, 'to': 'inf', 'c': 2, 'a': -1}])
    assert weights.evaluate(w, 1.5) == 1
    assert weights.evaluate(w, 4) == pytest.approx(0.5)
    w = weights.from_literal({'table': [[1, 1], [2, 4]]})
    assert weights.evaluate(w, 1.5) == pytest.approx(1.5**2)


@pytest.mark.parametrize(
    'literal,path',
    [
        ('x', 'v'),
        ([{'from': 1, 'to': 2, 'b': 1}], 'v[0]'),
        ([3], 'v[0]'),
        ([{'from': 2, 'to': 1}], 'v[0]'),
        ([{'c': 'a lot'}], 'v[0].c'),
        ({'table': [[1, 1], [1, 2]]}, 'v.table'),
        ({'table': 3}, 'v.table'),
        ({'rows': []}, 'v'),
        ([{'from': 0, 'to': 2}, {'from': 1, 'to': 3}], 'v'),
    ],
)
def test_from_literal_errors(literal, path):
    with pytest.raises(ConfigError) as e:
        weights.from_literal(literal, 'v')
    assert e.value.path == path
