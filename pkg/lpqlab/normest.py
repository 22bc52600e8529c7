"""
l^p -> l^q norms of non-negative matrices.

Every estimate is a certified lower bound: it is recomputed from a stored
non-negative extremal vector. The p = 1 (q >= 1), q = 1, q = inf and p = inf
cases are solved in closed form; p = q = 2 uses the SVD; everything else runs
a multi-start nonlinear power iteration.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import itertools
import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.optimize

from lpqlab import discretize, workers
from lpqlab.criteria import CriterionSet
from lpqlab.discretize import DiscretizedOperator
from lpqlab.errors import NormError
from lpqlab.params import INF, Direction, Exponents, conjugate
from lpqlab.weights import Weight

logger = logging.getLogger(__name__)

DEFAULT_SEED = 0x5EED
SPAN_SENSITIVITY = 1e-3
BRUTE_FORCE_MAX_COLUMNS = 3
# half-widths in decades of the symmetric grids used by span_limit
SPAN_DECADES = (4, 6, 8)


class Method(enum.Enum):
    EXACT_COLUMN = 'exact-column'
    EXACT_ROW = 'exact-row'
    EXACT_ONES = 'exact-ones'
    EXACT_COLUMN_SUMS = 'exact-column-sums'
    SVD = 'svd'
    NONLINEAR_POWER = 'nonlinear-power'
    BRUTE_FORCE = 'brute-force'

    @property
    def exact(self) -> bool:
        return self in _EXACT


_EXACT = {
    Method.EXACT_COLUMN,
    Method.EXACT_ROW,
    Method.EXACT_ONES,
    Method.EXACT_COLUMN_SUMS,
    Method.SVD,
}


@dataclasses.dataclass(frozen=True)
class NormOptions:
    restarts: int = 8
    max_iter: int = 500
    tol: float = 1e-9
    seed: int = DEFAULT_SEED
    # skip the closed forms and run the iteration
    force_iterative: bool = False


@dataclasses.dataclass(frozen=True)
class NormEstimate:
    lower_bound: float
    method: Method
    extremal: np.ndarray = dataclasses.field(repr=False, compare=False)
    iterations: int = 0
    restarts: int = 0
    converged: bool = True
    p: float = 2.0
    q: float = 2.0
    seed: Optional[int] = None
    # quasi-norm target: the estimate is heuristic
    heuristic: bool = False


def lp_norm(x: np.ndarray, p: float) -> float:
    x = np.abs(np.asarray(x, dtype=float))
    if not x.size:
        return 0.0
    if p == INF:
        return float(np.max(x))
    scale = float(np.max(x))
    if scale == 0:
        return 0.0
    return scale * float(np.sum((x / scale) ** p)) ** (1 / p)


def ratio(matrix: np.ndarray, f: np.ndarray, p: float, q: float) -> float:
    """||M f||_q / ||f||_p, 0 for f = 0"""
    denominator = lp_norm(f, p)
    if denominator == 0:
        return 0.0
    return lp_norm(matrix @ f, q) / denominator


def _normalized(f: np.ndarray, p: float) -> np.ndarray:
    norm = lp_norm(f, p)
    return f / norm if norm > 0 else f


def _estimate(matrix, f, method, p, q, **kwargs) -> NormEstimate:
    f = _normalized(np.abs(np.asarray(f, dtype=float)), p)
    return NormEstimate(
        lower_bound=ratio(matrix, f, p, q), method=method, extremal=f, p=p, q=q, **kwargs
    )


def _unit(m: int, j: int) -> np.ndarray:
    f = np.zeros(m)
    f[j] = 1.0
    return f


def _column_norms(matrix: np.ndarray, q: float) -> np.ndarray:
    return np.array([lp_norm(col, q) for col in matrix.T])


def _exact(matrix: np.ndarray, p: float, q: float) -> Optional[NormEstimate]:
    n, m = matrix.shape
    if p == 1 and q >= 1:
        j = int(np.argmax(_column_norms(matrix, q)))
        return _estimate(matrix, _unit(m, j), Method.EXACT_COLUMN, p, q)
    if q == INF:
        p_conj = conjugate(p)
        i = int(np.argmax([lp_norm(row, p_conj) for row in matrix]))
        row = matrix[i]
        if p == 1:
            f = _unit(m, int(np.argmax(row)))
        elif p == INF:
            f = np.ones(m)
        else:
            # Hölder extremal for the heaviest row
            f = row ** (p_conj - 1)
        return _estimate(matrix, f, Method.EXACT_ROW, p, q)
    if p == INF:
        return _estimate(matrix, np.ones(m), Method.EXACT_ONES, p, q, heuristic=q < 1)
    if q == 1:
        sums = matrix.sum(axis=0)
        return _estimate(matrix, sums ** (conjugate(p) - 1), Method.EXACT_COLUMN_SUMS, p, q)
    if p == 2 and q == 2:
        _, _, vt = np.linalg.svd(matrix, full_matrices=False)
        # Perron: the top right singular vector of a non-negative matrix can be taken >= 0
        return _estimate(matrix, np.abs(vt[0]), Method.SVD, p, q)
    return None


def _starts(matrix: np.ndarray, q: float, opts: NormOptions):
    n, m = matrix.shape
    starts = [np.ones(m)]
    order = np.argsort(-_column_norms(matrix, q), kind='stable')
    for j in order[: min(2, m)]:
        starts.append(_unit(m, int(j)) + 1e-3)
    for k in itertools.count():
        if len(starts) >= max(opts.restarts, 1):
            break
        rng = np.random.default_rng([opts.seed, k])
        starts.append(rng.random(m) + 1e-3)
    return starts[: max(opts.restarts, 1)]


def _power_step(matrix: np.ndarray, f: np.ndarray, p: float, q: float) -> np.ndarray:
    y = matrix @ f
    with np.errstate(divide='ignore'):
        yq = np.where(y > 0, y ** (q - 1), 0.0)
    g = matrix.T @ yq
    return g ** (1 / (p - 1))


def _vertex_step(matrix: np.ndarray, f: np.ndarray, p: float, q: float) -> np.ndarray:
    """Conditional-gradient move to the best vertex of the l^1 ball"""
    y = matrix @ f
    with np.errstate(divide='ignore'):
        yq = np.where(y > 0, y ** (q - 1), 0.0)
    g = matrix.T @ yq
    return _unit(len(f), int(np.argmax(g)))


def _iterate(
    matrix: np.ndarray, start: np.ndarray, p: float, q: float, opts: NormOptions
) -> Tuple[np.ndarray, float, int, bool]:
    step = _vertex_step if p == 1 else _power_step
    f = _normalized(start, p)
    value = ratio(matrix, f, p, q)
    for iteration in range(1, opts.max_iter + 1):
        candidate = _normalized(step(matrix, f, p, q), p)
        new_value = ratio(matrix, candidate, p, q)
        if not np.all(np.isfinite(candidate)):
            return f, value, iteration, False
        if new_value < value:
            # a drop within tolerance is rounding at the fixed point
            return f, value, iteration, value - new_value <= opts.tol * value
        change = (new_value - value) / new_value if new_value > 0 else 0.0
        f, value = candidate, new_value
        if change < opts.tol:
            return f, value, iteration, True
    return f, value, opts.max_iter, False


def _polish(matrix: np.ndarray, f: np.ndarray, p: float, q: float) -> np.ndarray:
    """L-BFGS-B ascent of log(||Mf||_q / ||f||_p) over f >= 0"""
    floor = 1e-300

    def objective(x):
        y = np.maximum(matrix @ x, floor)
        sq = np.sum(y**q)
        xp = np.maximum(x, 0.0)
        sp = np.sum(xp**p)
        if sp <= 0 or sq <= 0:
            return 0.0, np.zeros_like(x)
        value = math.log(sq) / q - math.log(sp) / p
        grad = matrix.T @ (y ** (q - 1)) / sq - np.maximum(xp, floor) ** (p - 1) / sp
        return -value, -grad

    result = scipy.optimize.minimize(
        objective, f, jac=True, method='L-BFGS-B', bounds=[(0, None)] * len(f)
    )
    candidate = np.maximum(result.x, 0.0)
    return candidate if ratio(matrix, candidate, p, q) > ratio(matrix, f, p, q) else f


def _iterative(matrix: np.ndarray, p: float, q: float, opts: NormOptions) -> NormEstimate:
    starts = _starts(matrix, q, opts)

    def run(start):
        f, value, iterations, converged = _iterate(matrix, start, p, q, opts)
        if q < 1:
            f = _polish(matrix, f, p, q)
        return f, ratio(matrix, f, p, q), iterations, converged

    results = workers.pool_map(run, starts)
    # ties resolve to the earliest start
    best = max(range(len(results)), key=lambda i: (results[i][1], -i))
    f, _, _, converged = results[best]
    iterations = sum(r[2] for r in results)
    if not converged:
        logger.warning('power iteration did not converge for p=%s, q=%s', p, q)
    return _estimate(
        matrix,
        f,
        Method.NONLINEAR_POWER,
        p,
        q,
        iterations=iterations,
        restarts=len(starts),
        converged=converged,
        seed=opts.seed,
        heuristic=q < 1,
    )


def _check(matrix: np.ndarray, p: float, q: float) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise NormError(f'expected a non-empty 2-d matrix, got shape {matrix.shape}')
    if not p >= 1:
        raise NormError(f'p must satisfy p >= 1, got {p}')
    if not q > 0:
        raise NormError(f'q must satisfy q > 0, got {q}')
    if np.any(matrix < 0) or not np.all(np.isfinite(matrix)):
        raise NormError('matrix must be finite and non-negative')
    return matrix


@functools.singledispatch
def norm_pq(matrix, p: float, q: float, opts: NormOptions = NormOptions()) -> NormEstimate:
    matrix = _check(matrix, p, q)
    if not np.any(matrix):
        return _estimate(matrix, _unit(matrix.shape[1], 0), Method.EXACT_COLUMN, p, q)
    if not opts.force_iterative:
        estimate = _exact(matrix, p, q)
        if estimate is not None:
            logger.info('norm %.9g via %s', estimate.lower_bound, estimate.method.value)
            return estimate
    if p == INF:
        # iterate on a large finite p; the ones vector is the answer anyway
        p_iter = 64.0
        estimate = _iterative(matrix, p_iter, q, opts)
        return _estimate(
            matrix,
            estimate.extremal,
            Method.NONLINEAR_POWER,
            p,
            q,
            iterations=estimate.iterations,
            restarts=estimate.restarts,
            converged=estimate.converged,
            seed=opts.seed,
            heuristic=q < 1,
        )
    if q == INF:
        raise NormError('the iterative path needs q < inf')
    estimate = _iterative(matrix, p, q, opts)
    logger.info(
        'norm %.9g via %s (%d restarts)',
        estimate.lower_bound,
        estimate.method.value,
        estimate.restarts,
    )
    return estimate


@norm_pq.register
def _(op: DiscretizedOperator, p: float, q: float, opts: NormOptions = NormOptions()):
    return norm_pq(op.matrix, p, q, opts)


def _sphere_points(m: int, resolution: int) -> np.ndarray:
    """Directions in the closed non-negative orthant, one per row"""
    angles = np.linspace(0.0, math.pi / 2, resolution)
    if m == 1:
        return np.ones((1, 1))
    if m == 2:
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    theta, phi = np.meshgrid(angles, angles, indexing='ij')
    theta, phi = theta.ravel(), phi.ravel()
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1
    )


def _direction(angles: np.ndarray, m: int) -> np.ndarray:
    if m == 2:
        (theta,) = angles
        return np.array([math.cos(theta), math.sin(theta)])
    theta, phi = angles
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def _row_norms(x: np.ndarray, p: float) -> np.ndarray:
    x = np.abs(x)
    scale = np.max(x, axis=1)
    if p == INF:
        return scale
    safe = np.where(scale > 0, scale, 1.0)
    return np.where(scale > 0, safe * np.sum((x / safe[:, None]) ** p, axis=1) ** (1 / p), 0.0)


def _ratios(matrix: np.ndarray, directions: np.ndarray, p: float, q: float) -> np.ndarray:
    return _row_norms(directions @ matrix.T, q) / _row_norms(directions, p)


def brute_force_norm(
    matrix, p: float, q: float, angular_resolution: int = 201
) -> float:
    """Exhaustive angular search over the non-negative unit sphere, then local refinement"""
    matrix = _check(matrix, p, q)
    n, m = matrix.shape
    if m > BRUTE_FORCE_MAX_COLUMNS:
        raise NormError(f'brute force supports at most {BRUTE_FORCE_MAX_COLUMNS} columns, got {m}')
    directions = _sphere_points(m, angular_resolution)
    values = _ratios(matrix, directions, p, q)
    best = float(np.max(values))
    if m == 1 or best == 0:
        return best
    i = int(np.argmax(values))
    step = (math.pi / 2) / (angular_resolution - 1)
    if m == 2:
        x0 = np.array([math.atan2(directions[i, 1], directions[i, 0])])
    else:
        x0 = np.array(
            [
                math.acos(min(1.0, directions[i, 2])),
                math.atan2(directions[i, 1], directions[i, 0]),
            ]
        )
    bounds = [(max(0.0, x - step), min(math.pi / 2, x + step)) for x in x0]

    def objective(angles):
        return -ratio(matrix, _direction(angles, m), p, q)

    result = scipy.optimize.minimize(objective, x0, method='Powell', bounds=bounds)
    return max(best, -float(result.fun))


@dataclasses.dataclass(frozen=True)
class BoundReport:
    estimate: float
    criterion: Optional[float]
    lower: Optional[float]
    upper: Optional[float]
    lower_ok: Optional[bool]
    upper_ok: Optional[bool]
    ratio: Optional[float]
    ratio_only: bool
    # extra (name, lower, upper, ok) brackets such as the L^1 -> L^1 factors
    brackets: Tuple[Tuple[str, float, float, bool], ...] = ()
    heuristic: bool = False
    note: str = ''

    @property
    def violated(self) -> bool:
        return self.upper_ok is False or any(not ok for *_, ok in self.brackets)


def _combination(cs: CriterionSet, terms) -> float:
    total = 0.0
    for tag, coef in terms:
        value = cs.value(tag)
        if value == 0:
            continue
        total += coef * value
    return total


def _primary(cs: CriterionSet) -> Optional[str]:
    for role in cs.regime.roles:
        if role.bounded is Direction.EQUIVALENT:
            return role.tag
    for role in cs.regime.roles:
        if role.bounded is not None:
            return role.tag
    return None


def bound_check(
    estimate: NormEstimate,
    cs: CriterionSet,
    tol_opt: float = 0.05,
    tol_quad: float = 0.02,
) -> BoundReport:
    """
    lower_ok: estimate >= alpha * criterion * (1 - tol_opt), a check of the optimizer;
    upper_ok: estimate <= beta * criterion * (1 + tol_quad), a check of the theorem.
    """
    value = estimate.lower_bound
    pc = cs.constants
    tag = _primary(cs)
    criterion = cs.value(tag) if tag is not None else None
    ratio_value = value / criterion if criterion and math.isfinite(criterion) else None
    if not pc.specified or not (pc.lower or pc.upper):
        return BoundReport(
            estimate=value,
            criterion=criterion,
            lower=None,
            upper=None,
            lower_ok=None,
            upper_ok=None,
            ratio=ratio_value,
            ratio_only=True,
            heuristic=estimate.heuristic,
            note='equivalence constants unspecified on this branch',
        )
    lower = _combination(cs, pc.lower) if pc.lower else None
    upper = _combination(cs, pc.upper) if pc.upper else None
    lower_ok = None if lower is None else value >= lower * (1 - tol_opt)
    upper_ok = None if upper is None else value <= upper * (1 + tol_quad)
    brackets = []
    if pc.laplace_l1_lower is not None and 'Bbar_q' in cs.entries:
        sup = cs.value('Bbar_q')
        lo, hi = pc.laplace_l1_lower * sup, pc.laplace_l1_upper * sup
        ok = lo * (1 - tol_opt) <= value <= hi * (1 + tol_quad)
        brackets.append(('l1', lo, hi, ok))
    if upper_ok is False:
        logger.error('norm estimate %.9g exceeds the upper bound %.9g', value, upper)
    if lower_ok is False:
        logger.warning('norm estimate %.9g below the lower bound %.9g', value, lower)
    return BoundReport(
        estimate=value,
        criterion=criterion,
        lower=lower,
        upper=upper,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        ratio=ratio_value,
        ratio_only=False,
        brackets=tuple(brackets),
        heuristic=estimate.heuristic,
        note='exact' if pc.exact else '',
    )


def span_sensitivity(op: DiscretizedOperator, estimate: NormEstimate) -> float:
    """Share of the estimate carried by the first and last source columns"""
    if estimate.lower_bound == 0:
        return 0.0
    f = np.zeros_like(estimate.extremal)
    f[[0, -1]] = estimate.extremal[[0, -1]]
    norm = lp_norm(estimate.extremal, estimate.p)
    if norm == 0:
        return 0.0
    share = lp_norm(op.matrix @ f, estimate.q) / norm / estimate.lower_bound
    if share > SPAN_SENSITIVITY:
        logger.warning('boundary columns carry %.3g of the norm estimate', share)
    return share


@dataclasses.dataclass(frozen=True)
class SpanLimit:
    decades: Tuple[float, ...]
    estimates: Tuple[NormEstimate, ...] = dataclasses.field(repr=False)
    limit: float
    # l in N(L) = limit - A / (L + l)^2
    end_length: float

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(e.lower_bound for e in self.estimates)


def extrapolate_span(spans: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """
    (N_inf, l) for N(L) = N_inf - A / (L + l)^2 through three (L, N) pairs.

    Falls back to l = 0 on the last two pairs when no end length fits, and to
    the last value when the estimates stop growing.
    """
    if len(spans) != 3 or len(values) != 3:
        raise NormError('span extrapolation needs exactly three spans')
    (l1, l2, l3), (n1, n2, n3) = spans, values
    if not 0 < l1 < l2 < l3:
        raise NormError(f'spans must be positive and increasing, got {tuple(spans)}')
    if not n1 < n2 < n3:
        logger.debug('estimates %s do not grow with the span', tuple(values))
        return float(n3), 0.0
    rho = (n2 - n1) / (n3 - n2)

    def excess(end):
        a, b, c = (l1 + end) ** -2, (l2 + end) ** -2, (l3 + end) ** -2
        return (a - b) / (b - c) - rho

    lo, hi = -0.9 * l1, 100 * l3
    end = 0.0
    if excess(lo) * excess(hi) < 0:
        end = float(scipy.optimize.brentq(excess, lo, hi))
    else:
        logger.debug('no end length fits rho=%.6g, two-point fit', rho)
    amplitude = (n3 - n2) / ((l2 + end) ** -2 - (l3 + end) ** -2)
    return float(n3 + amplitude / (l3 + end) ** 2), end


def span_limit(
    kind: Union[discretize.Kind, str],
    exps: Exponents,
    v: Weight,
    w: Optional[Weight] = None,
    points_per_decade: int = 64,
    decades: Sequence[float] = SPAN_DECADES,
    opts: NormOptions = NormOptions(),
) -> SpanLimit:
    """
    Norm on (0, inf) extrapolated from the grids 10^-h .. 10^h, h in ``decades``.

    Truncating a Hilbert-type operator to a log-span L lowers its norm by
    A / (L + l)^2 to leading order; the three estimates fix the limit, A and l.
    """
    estimates = []
    for h in decades:
        grid = discretize.log_grid(10.0**-h, 10.0**h, points_per_decade)
        op = discretize.build(kind, exps, v, w, grid, grid)
        estimates.append(norm_pq(op, exps.p, exps.q, opts))
    spans = [2 * h * math.log(10) for h in decades]
    limit, end = extrapolate_span(spans, [e.lower_bound for e in estimates])
    logger.info('span limit %.9g (end length %.3g)', limit, end)
    return SpanLimit(tuple(decades), tuple(estimates), limit, end)
