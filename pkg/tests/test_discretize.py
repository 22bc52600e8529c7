import math

import numpy as np
import pytest

from lpqlab import discretize, normest, weights
from lpqlab.errors import ExportError, SpanError
from lpqlab.params import INF, derive
from tests import data


def test_log_grid(small_grid):
    assert len(small_grid) == 33
    assert small_grid.span == pytest.approx((1e-2, 1e2))
    du = math.log(1e4) / 32
    assert small_grid.quad_weights[1] == pytest.approx(small_grid.nodes[1] * du)
    assert small_grid.quad_weights[0] == pytest.approx(small_grid.nodes[0] * du / 2)


@pytest.mark.parametrize('t_min,t_max,density', [(0, 1, 4), (2, 1, 4), (1, 2, 0)])
def test_log_grid_rejects(t_min, t_max, density):
    with pytest.raises(SpanError):
        discretize.log_grid(t_min, t_max, density)


def test_log_grid_breakpoints():
    grid = discretize.log_grid(1e-2, 1e2, 8, breakpoints=(1.5, 2.0, 1e3))
    # 1.5 and 2 sit 0.4 cells from the nearest node and get their own nodes
    assert len(grid) == 35
    assert {1.5, 2.0} <= set(grid.nodes)
    # the trapezoid weights still integrate dt / t over the span exactly
    assert np.sum(grid.quad_weights / grid.nodes) == pytest.approx(math.log(1e4), rel=1e-12)


def test_log_grid_breakpoint_snaps():
    b = 10**0.13
    grid = discretize.log_grid(1e-2, 1e2, 8, breakpoints=[b, b])
    assert len(grid) == 33
    assert grid.nodes[17] == b
    assert grid.span == pytest.approx((1e-2, 1e2))


def test_breakpoint_nodes_sharpen_p1_norm():
    exps = derive(1, 1, 2)
    v = weights.indicator(1.5, 2)
    # q^(-1/q) sup t^(-1/q) over the support, attained at t = 1.5
    exact = 3**-0.5
    estimates = []
    for breakpoints in ((), v.breakpoints()):
        grid = discretize.log_grid(1e-4, 1e4, 16, breakpoints)
        op = discretize.build('laplace', exps, v, None, grid, grid)
        estimates.append(normest.norm_pq(op, 1, 2).lower_bound)
    assert abs(estimates[0] - exact) > 5e-3
    assert estimates[1] == pytest.approx(exact, abs=1e-3)


def test_grid_validation():
    with pytest.raises(SpanError):
        discretize.Grid(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(SpanError):
        discretize.Grid(np.array([1.0, 2.0]), np.array([1.0]))


def test_mask_is_half_open(small_grid):
    nodes = small_grid.nodes
    mask = small_grid.mask((nodes[16], nodes[24]))
    assert mask[16]
    assert not mask[24]
    assert np.count_nonzero(mask) == 8
    assert np.count_nonzero(small_grid.mask((0.9, 9.5))) == 8


def test_build_shapes_and_scaling(small_grid):
    exps = derive(1, 2, 4)
    op = discretize.build('laplace', exps, data.ONE, None, small_grid, small_grid)
    assert op.shape == (33, 33)
    assert op.kind is discretize.Kind.LAPLACE
    x, y = small_grid.nodes[3], small_grid.nodes[5]
    assert op.kernel[3, 5] == pytest.approx(math.exp(-x * y))
    row, col = small_grid.quad_weights[3] ** 0.25, small_grid.quad_weights[5] ** 0.5
    expected = row * op.kernel[3, 5] * col
    assert op.matrix[3, 5] == pytest.approx(expected)


def test_hardy_diagonal(small_grid):
    op = discretize.build('hardy', derive(1, 2, 2), data.ONE, data.ONE, small_grid, small_grid)
    x = small_grid.nodes[4]
    assert op.kernel[4, 4] == pytest.approx(0.5 / x)
    assert op.kernel[4, 3] == pytest.approx(1 / x)
    assert op.kernel[4, 5] == 0
    dual = discretize.build(
        'hardy_dual', derive(1, 2, 2), data.ONE, data.ONE, small_grid, small_grid
    )
    assert dual.kernel[4, 4] == 0
    assert dual.kernel[4, 5] == pytest.approx(1 / small_grid.nodes[5])


def test_build_custom(small_grid):
    with pytest.raises(ValueError):
        discretize.build('custom', derive(1, 2, 2), data.ONE, None, small_grid, small_grid)
    op = discretize.build(
        'custom',
        derive(1, 2, 2),
        data.ONE,
        None,
        small_grid,
        small_grid,
        kernel_fn=lambda x, y: np.ones(np.broadcast(x, y).shape),
    )
    assert np.all(op.kernel == 1)


def test_truncate(small_grid):
    op = discretize.build('laplace', derive(1, 2, 2), data.ONE, None, small_grid, small_grid)
    cut = discretize.truncate(op, (1.0, INF))
    cols = small_grid.nodes >= 1.0
    assert np.all(cut.kernel[:, ~cols] == 0)
    np.testing.assert_array_equal(cut.kernel[:, cols], op.kernel[:, cols])
    assert cut.source_window == (1.0, INF)
    twice = discretize.truncate(cut, (0.0, 10.0), (0.0, 1.0))
    assert twice.source_window == (1.0, 10.0)
    assert twice.target_window == (0.0, 1.0)


def test_apply_ones_matches_quadrature():
    grid = discretize.log_grid(1e-2, 1e2, 64)
    op = discretize.build('laplace', derive(1, 2, 2), data.ONE, None, grid, grid)
    assert discretize.ones_consistency(op) < 1e-2
    with pytest.raises(ValueError):
        discretize.apply(op, np.ones(3))


def test_compose_check():
    grid_y = discretize.log_grid(1e-1, 1e1, 8)
    grid_x = discretize.log_grid(1e-8, 1e4, 64)
    deviation = discretize.compose_check(derive(1, 2, 2), data.ONE, data.ONE, grid_y, grid_x)
    assert deviation < 1e-4


def test_matrix_file(tempdir, small_grid):
    op = discretize.build('stieltjes', derive(1, 2, 2), data.ONE, data.ONE, small_grid, small_grid)
    path = f'{tempdir}/op.bin'
    discretize.write_matrix(path, op.matrix)
    with open(path, 'rb') as file:
        assert file.read(6) == b'LPQOP1'
    np.testing.assert_array_equal(discretize.read_matrix(path), op.matrix)


def test_matrix_file_errors(tempdir):
    path = f'{tempdir}/bad.bin'
    with open(path, 'wb') as file:
        file.write(b'NOTOPS' + bytes(16))
    with pytest.raises(ExportError):
        discretize.read_matrix(path)
    with open(path, 'wb') as file:
        file.write(b'LPQOP1' + np.array([2, 2], dtype='<u8').tobytes() + bytes(8))
    with pytest.raises(ExportError):
        discretize.read_matrix(path)
    with pytest.raises(ExportError):
        discretize.write_matrix(path, np.ones(3))


def test_write_csv(tempdir, monkeypatch):
    path = f'{tempdir}/op.csv'
    discretize.write_csv(path, np.eye(2))
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=','), np.eye(2))
    monkeypatch.setattr(discretize, 'CSV_LIMIT', 3)
    with pytest.raises(ExportError):
        discretize.write_csv(path, np.eye(2))
