"""
Matrix discretizations of the weighted kernel operators on logarithmic grids.

An operator ``T f(x) = w(x) int k(x, y) f(y) v(y) dy`` is stored as the raw
kernel ``w(x_i) k(x_i, y_j) v(y_j)`` together with both grids. The matrix seen
by the norm estimators is ``omega_i**(1/q) * K_ij * mu_j**(1/p')``, whose
l^p -> l^q norm approximates the L^p -> L^q norm of T.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
import pathlib
from typing import Callable, Iterable, Optional, Tuple, Union

import numpy as np

from lpqlab import quadrature, weights, workers
from lpqlab.errors import ExportError, SpanError
from lpqlab.params import INF, Exponents, reciprocal
from lpqlab.weights import Weight

logger = logging.getLogger(__name__)

MAGIC = b'LPQOP1'
CSV_LIMIT = 10**6
ROW_BLOCK = 64
# share of a cell within which a node is moved onto a breakpoint
SNAP = 0.25

Window = Tuple[float, float]
FULL_WINDOW: Window = (0.0, INF)


class Kind(enum.Enum):
    LAPLACE = 'laplace'
    STIELTJES = 'stieltjes'
    HARDY = 'hardy'
    HARDY_DUAL = 'hardy_dual'
    CUSTOM = 'custom'


@dataclasses.dataclass(frozen=True)
class Grid:
    nodes: np.ndarray = dataclasses.field(compare=False)
    quad_weights: np.ndarray = dataclasses.field(compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        quad_weights = np.asarray(self.quad_weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != quad_weights.shape or not len(nodes):
            raise SpanError('grid nodes and weights must be matching non-empty vectors')
        if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise SpanError('grid nodes must be positive and strictly increasing')
        if np.any(quad_weights <= 0):
            raise SpanError('grid quadrature weights must be positive')
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'quad_weights', quad_weights)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def span(self) -> Window:
        return float(self.nodes[0]), float(self.nodes[-1])

    def mask(self, window: Window) -> np.ndarray:
        """Nodes inside the half-open window [lo, hi)"""
        lo, hi = window
        return (self.nodes >= lo) & (self.nodes < hi)


def _place_breakpoints(nodes: np.ndarray, breakpoints: Iterable[float]) -> np.ndarray:
    """Move the nearest interior node onto each breakpoint, or insert a node there"""
    nodes = nodes.copy()
    u = np.log(nodes)
    du = (u[-1] - u[0]) / (len(u) - 1)
    placed = set()
    for b in sorted(set(breakpoints)):
        if not nodes[0] < b < nodes[-1]:
            continue
        ub = math.log(b)
        j = int(np.argmin(np.abs(u - ub)))
        snap = 0 < j < len(u) - 1 and j not in placed and abs(u[j] - ub) <= SNAP * du
        if snap:
            nodes[j], u[j] = b, ub
        elif nodes[j] != b:
            j = int(np.searchsorted(nodes, b))
            nodes, u = np.insert(nodes, j, b), np.insert(u, j, ub)
            placed = {k + 1 if k >= j else k for k in placed}
        placed.add(j)
    return nodes


def log_grid(
    t_min: float, t_max: float, points_per_decade: int, breakpoints: Iterable[float] = ()
) -> Grid:
    """
    Geometric nodes with the trapezoid rule in u = ln t.

    Every breakpoint inside the span becomes a node, so that weight jumps
    fall on the boundary between two cells.
    """
    if not (0 < t_min < t_max < INF):
        raise SpanError(f'degenerate grid span [{t_min}, {t_max}]')
    if points_per_decade < 1:
        raise SpanError(f'points_per_decade must be positive, got {points_per_decade}')
    decades = math.log10(t_max / t_min)
    n = math.ceil(decades * points_per_decade - 1e-9) + 1
    nodes = _place_breakpoints(np.geomspace(t_min, t_max, n), breakpoints)
    steps = np.diff(np.log(nodes))
    quad_weights = nodes * (np.append(steps, 0.0) + np.insert(steps, 0, 0.0)) / 2
    return Grid(nodes, quad_weights)


def _laplace_kernel(lam: float) -> Callable:
    def k(x, y):
        return np.exp(-x * y**lam)

    return k


def _stieltjes_kernel(lam: float) -> Callable:
    def k(x, y):
        return 1 / (x**lam + y**lam)

    return k


def _hardy_kernel(lam: float, diagonal: float) -> Callable:
    """x^-lam on y < x, ``diagonal * x^-lam`` on y = x"""

    def k(x, y):
        x, y = np.broadcast_arrays(x, y)
        return np.where(y < x, x**-lam, np.where(y == x, diagonal * x**-lam, 0.0))

    return k


def _hardy_dual_kernel(lam: float) -> Callable:
    def k(x, y):
        x, y = np.broadcast_arrays(x, y)
        return np.where(y > x, y**-lam, 0.0)

    return k


def kernel_function(kind: Kind, lam: float) -> Callable:
    if kind is Kind.LAPLACE:
        return _laplace_kernel(lam)
    if kind is Kind.STIELTJES:
        return _stieltjes_kernel(lam)
    if kind is Kind.HARDY:
        # trapezoid weight on the diagonal node
        return _hardy_kernel(lam, 0.5)
    if kind is Kind.HARDY_DUAL:
        return _hardy_dual_kernel(lam)
    raise ValueError('custom operators carry their own kernel')


@dataclasses.dataclass(frozen=True)
class DiscretizedOperator:
    kind: Kind
    source: Grid
    target: Grid
    exps: Exponents
    # w(x_i) k(x_i, y_j) v(y_j), before quadrature scaling
    kernel: np.ndarray = dataclasses.field(repr=False, compare=False)
    kernel_fn: Optional[Callable] = dataclasses.field(default=None, repr=False, compare=False)
    source_window: Window = FULL_WINDOW
    target_window: Window = FULL_WINDOW

    @property
    def shape(self) -> Tuple[int, int]:
        return self.kernel.shape

    @property
    def matrix(self) -> np.ndarray:
        """Quadrature-scaled matrix for the l^p -> l^q norm"""
        row = self.target.quad_weights ** reciprocal(self.exps.q)
        col = self.source.quad_weights ** reciprocal(self.exps.p_conj)
        return row[:, None] * self.kernel * col[None, :]


def _assemble(kernel_fn: Callable, v: Weight, w: Weight, source: Grid, target: Grid) -> np.ndarray:
    y = source.nodes
    vy = v(y)
    wx = w(target.nodes)

    def block(start: int) -> np.ndarray:
        x = target.nodes[start : start + ROW_BLOCK]
        with np.errstate(over='ignore', under='ignore'):
            k = kernel_fn(x[:, None], y[None, :])
        return wx[start : start + ROW_BLOCK, None] * k * vy[None, :]

    blocks = workers.pool_map(block, range(0, len(target), ROW_BLOCK))
    return np.vstack(blocks)


def build(
    kind: Union[Kind, str],
    exps: Exponents,
    v: Weight,
    w: Optional[Weight],
    source: Grid,
    target: Grid,
    kernel_fn: Optional[Callable] = None,
) -> DiscretizedOperator:
    kind = Kind(kind.value if isinstance(kind, enum.Enum) else kind)
    if kind is Kind.CUSTOM:
        if kernel_fn is None:
            raise ValueError('custom operators need kernel_fn')
    else:
        kernel_fn = kernel_function(kind, exps.lam)
    if kind is Kind.LAPLACE or w is None:
        w = weights.constant(1.0)
    kernel = _assemble(kernel_fn, v, w, source, target)
    if np.any(kernel < 0) or not np.all(np.isfinite(kernel)):
        raise ValueError(f'{kind.value} kernel has negative or non-finite entries')
    logger.info('built %s operator %dx%d', kind.value, *kernel.shape)
    return DiscretizedOperator(
        kind=kind,
        source=source,
        target=target,
        exps=exps,
        kernel=kernel,
        kernel_fn=_weighted_kernel(kernel_fn, v, w),
    )


def _weighted_kernel(kernel_fn: Callable, v: Weight, w: Weight) -> Callable:
    def fn(x: float, y):
        y = np.asarray(y, dtype=float)
        return w(np.array([x]))[0] * kernel_fn(x, y) * v(y)

    return fn


def truncate(
    op: DiscretizedOperator,
    source_window: Window = FULL_WINDOW,
    target_window: Window = FULL_WINDOW,
) -> DiscretizedOperator:
    """Zero the columns and rows whose nodes fall outside the half-open windows"""
    cols = op.source.mask(source_window)
    rows = op.target.mask(target_window)
    kernel = op.kernel * rows[:, None] * cols[None, :]
    lo = max(op.source_window[0], source_window[0])
    hi = min(op.source_window[1], source_window[1])
    t_lo = max(op.target_window[0], target_window[0])
    t_hi = min(op.target_window[1], target_window[1])
    return dataclasses.replace(
        op, kernel=kernel, source_window=(lo, hi), target_window=(t_lo, t_hi)
    )


def apply(op: DiscretizedOperator, f) -> np.ndarray:
    """(T f)(x_i) for a vector of samples f(y_j)"""
    f = np.asarray(f, dtype=float)
    if f.shape != (len(op.source),):
        raise ValueError(f'expected a vector of length {len(op.source)}, got shape {f.shape}')
    return op.kernel @ (op.source.quad_weights * f)


def ones_consistency(op: DiscretizedOperator, rel_tol: float = 1e-8) -> float:
    """
    Largest relative gap between ``apply(op, 1)`` and adaptive quadrature of
    the row integrals over the (windowed) source span.
    """
    if op.kernel_fn is None:
        raise ValueError('operator carries no kernel function')
    lo, hi = op.source.span
    lo, hi = max(lo, op.source_window[0]), min(hi, op.source_window[1])
    discrete = apply(op, np.ones(len(op.source)))
    worst = 0.0
    if lo >= hi:
        return 0.0 if not np.any(discrete) else INF
    rows = np.flatnonzero(op.target.mask(op.target_window))
    for i in rows:
        x = float(op.target.nodes[i])
        breakpoints = (x,) if lo < x < hi else ()
        exact = quadrature.integrate(
            lambda y: op.kernel_fn(x, y), (lo, hi), rel_tol=rel_tol, breakpoints=breakpoints
        ).value
        scale = max(abs(exact), abs(discrete[i]))
        if scale > 0:
            worst = max(worst, abs(exact - discrete[i]) / scale)
    return worst


def compose_check(
    exps: Exponents, v: Weight, w: Weight, grid_y: Grid, grid_x: Grid
) -> float:
    """
    Largest relative deviation between the Stieltjes kernel and the
    composition of two Laplace kernels integrated over ``grid_x``:
    int e^{-s y^lam} e^{-s z^lam} ds = 1 / (y^lam + z^lam).
    """
    lam = exps.lam
    y = grid_y.nodes
    vy, wy = v(y), w(y)
    with np.errstate(under='ignore'):
        e = np.exp(-grid_x.nodes[:, None] * y[None, :] ** lam)
    composed = (e.T * grid_x.quad_weights[None, :]) @ e
    composed = wy[:, None] * composed * vy[None, :]
    direct = wy[:, None] * (1 / (y[:, None] ** lam + y[None, :] ** lam)) * vy[None, :]
    mask = direct > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(composed[mask] - direct[mask]) / direct[mask]))


def write_matrix(path: Union[str, pathlib.Path], matrix: np.ndarray):
    """Dense binary layout: magic, two little-endian uint64 dims, row-major float64"""
    matrix = np.ascontiguousarray(matrix, dtype='<f8')
    if matrix.ndim != 2:
        raise ExportError(f'expected a 2-d matrix, got shape {matrix.shape}')
    with pathlib.Path(path).open('wb') as file:
        file.write(MAGIC)
        file.write(np.array(matrix.shape, dtype='<u8').tobytes())
        file.write(matrix.tobytes(order='C'))


def read_matrix(path: Union[str, pathlib.Path]) -> np.ndarray:
    data = pathlib.Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise ExportError(f'{path}: not an {MAGIC.decode()} matrix file')
    header = len(MAGIC) + 16
    if len(data) < header:
        raise ExportError(f'{path}: truncated header')
    n, m = (int(x) for x in np.frombuffer(data[len(MAGIC) : header], dtype='<u8'))
    if len(data) != header + 8 * n * m:
        raise ExportError(f'{path}: expected {n}x{m} entries, file size does not match')
    return np.frombuffer(data[header:], dtype='<f8').reshape(n, m).copy()


def write_csv(path: Union[str, pathlib.Path], matrix: np.ndarray):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size > CSV_LIMIT:
        raise ExportError(
            f'{matrix.shape[0]}x{matrix.shape[1]} matrix is too large for CSV, '
            f'use the binary layout'
        )
    np.savetxt(path, matrix, delimiter=',', fmt='%.17g')
