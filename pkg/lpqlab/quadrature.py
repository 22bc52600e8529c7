"""
Integration, supremum search and endpoint-limit probing on (0, inf) for
integrands that behave like powers near 0 and inf.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.optimize

from lpqlab.errors import QuadratureError

logger = logging.getLogger(__name__)

INF = math.inf

REL_TOL = 1e-8
SUP_TOL = 1e-6
LIMIT_TOL = 1e-6
PROBE_SPAN = (1e-9, 1e9)
FLAT_EXPONENT = 0.05
DIVERGENCE_SLACK = 1e-6
PLATEAU_TOL = 1e-9
# decades added per extension of the core span, and the hard cap
SPAN_STEP = 3
MAX_EXTENSIONS = 7
SEGMENT_DECADES = 3


def _sample(f: Callable, ts) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    try:
        values = np.asarray(f(ts), dtype=float)
        if values.shape != ts.shape:
            raise ValueError
    except (TypeError, ValueError):
        values = np.array([float(f(t)) for t in ts])
    return values


def _scalar(f: Callable, t: float) -> float:
    return float(_sample(f, [t])[0])


def fit_exponent(xs: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(value) against log(x) over positive samples"""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (values > 0) & np.isfinite(values) & (xs > 0)
    if np.count_nonzero(mask) < 2:
        return None
    slope, _ = np.polyfit(np.log(xs[mask]), np.log(values[mask]), 1)
    return float(slope)


@dataclasses.dataclass(frozen=True)
class IntegralResult:
    value: float
    abs_error: Optional[float]
    endpoint_exponents: Tuple[Optional[float], Optional[float]]
    subdivisions: int
    divergent_at: Optional[float] = None


def _decade_fit(f: Callable, lo: float, hi: float) -> Tuple[Optional[float], np.ndarray]:
    ts = np.geomspace(lo, hi, 5)
    values = _sample(f, ts)
    return fit_exponent(ts, values), values


def _tail(f: Callable, edge: float, toward: float) -> Tuple[float, float, Optional[float], float]:
    """
    Integral of f between ``toward`` (0 or inf) and ``edge`` from a power-law
    fit. The edge moves outward while the fitted exponent keeps drifting.

    Returns (value, error, exponent, final edge).
    """
    step = 10.0 ** (-SPAN_STEP if toward == 0 else SPAN_STEP)
    decade = 10.0 if toward == 0 else 0.1

    def fit(at):
        return _decade_fit(f, min(at, at * decade), max(at, at * decade))[0]

    kappa = fit(edge)
    drift = 0.0
    for _ in range(MAX_EXTENSIONS):
        if kappa is None:
            break
        further = edge * step
        with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
            if not np.all(np.isfinite(_sample(f, [further, further * decade]))):
                break
            new_kappa = fit(further)
        if new_kappa is None:
            break
        drift = abs(new_kappa - kappa)
        if drift <= 1e-3:
            break
        edge, kappa = further, new_kappa
    edge_value = _scalar(f, edge)
    if kappa is None or edge_value == 0:
        return 0.0, 0.0, kappa, edge
    if toward == 0:
        if kappa <= -1 + DIVERGENCE_SLACK:
            return INF, INF, kappa, edge
        value = edge_value * edge / (kappa + 1)
    else:
        if kappa >= -1 - DIVERGENCE_SLACK:
            return INF, INF, kappa, edge
        value = -edge_value * edge / (kappa + 1)
    return value, abs(value) * max(drift, REL_TOL), kappa, edge


def _core_span(c1: float, c2: float, breakpoints: Iterable[float]) -> Tuple[float, float]:
    inside = [b for b in breakpoints if c1 < b < c2]
    lo = c1 if c1 > 0 else PROBE_SPAN[0] * min(1.0, c2 if c2 < INF else 1.0)
    hi = c2 if c2 < INF else PROBE_SPAN[1] * max(1.0, c1)
    if c1 == 0 and inside:
        lo = min(lo, min(inside) / 10)
    if c2 == INF and inside:
        hi = max(hi, max(inside) * 10)
    return lo, hi


def _segment_nodes(lo: float, hi: float, breakpoints: Iterable[float]) -> np.ndarray:
    u0, u1 = math.log10(lo), math.log10(hi)
    count = max(1, math.ceil((u1 - u0) / SEGMENT_DECADES))
    nodes = set(np.linspace(u0, u1, count + 1).tolist())
    nodes.update(math.log10(b) for b in breakpoints if lo < b < hi)
    return np.log(10.0) * np.array(sorted(nodes))


def integrate(
    f: Callable,
    interval: Tuple[float, float],
    rel_tol: float = REL_TOL,
    breakpoints: Iterable[float] = (),
) -> IntegralResult:
    """
    Integral of a non-negative f over (c1, c2) with 0 <= c1 < c2 <= inf.

    The core span is integrated in u = log t segment by segment; pieces
    toward 0 and inf are closed with a fitted power-law tail, and a fitted
    exponent at or past -1 is reported as divergence.
    """
    c1, c2 = float(interval[0]), float(interval[1])
    if not (0 <= c1 < c2 <= INF):
        raise QuadratureError(f'degenerate interval ({c1}, {c2})')
    breakpoints = tuple(breakpoints)
    lo, hi = _core_span(c1, c2, breakpoints)

    kappa0 = kappa1 = None
    head = tail = 0.0
    head_err = tail_err = 0.0
    if c1 == 0:
        head, head_err, kappa0, lo = _tail(f, lo, 0.0)
        if head == INF:
            return IntegralResult(INF, None, (kappa0, None), 0, divergent_at=0.0)
    if c2 == INF:
        tail, tail_err, kappa1, hi = _tail(f, hi, INF)
        if tail == INF:
            return IntegralResult(INF, None, (kappa0, kappa1), 0, divergent_at=INF)

    def g(u):
        t = math.exp(u)
        value = _scalar(f, t)
        if not math.isfinite(value):
            raise QuadratureError(f'integrand is {value} at t={t:.17g}')
        return value * t

    total, error, subdivisions = head, head_err, 0
    nodes = _segment_nodes(lo, hi, breakpoints)
    for u0, u1 in zip(nodes, nodes[1:]):
        value, err, info = scipy.integrate.quad(
            g, u0, u1, epsabs=0.0, epsrel=rel_tol, limit=500, full_output=1
        )[:3]
        total += value
        error += err
        subdivisions += info['last']
    total += tail
    error += tail_err
    return IntegralResult(total, error, (kappa0, kappa1), subdivisions)


class LimitKind(enum.Enum):
    ZERO = 'zero'
    POSITIVE = 'positive'
    INFINITE = 'infinite'
    INCONCLUSIVE = 'inconclusive'


@dataclasses.dataclass(frozen=True)
class LimitVerdict:
    kind: LimitKind
    value: Optional[float]
    samples: Tuple[Tuple[float, float], ...]
    fitted_exponent: Optional[float]

    @classmethod
    def zero(cls) -> LimitVerdict:
        return cls(LimitKind.ZERO, 0.0, (), None)


def _distance(ts: np.ndarray, endpoint: float) -> np.ndarray:
    if endpoint == 0:
        return ts
    if endpoint == INF:
        return 1 / ts
    return np.abs(ts - endpoint)


def classify_sequence(
    ts: Sequence[float],
    values: Sequence[float],
    endpoint: float,
    tol: float = LIMIT_TOL,
) -> LimitVerdict:
    """
    Classify a sequence sampled toward ``endpoint``.

    The fitted exponent is the log-log slope against the distance to the
    endpoint, so a positive exponent always means decay.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    samples = tuple(zip(ts.tolist(), values.tolist()))
    if np.any(np.isnan(values)):
        return LimitVerdict(LimitKind.INCONCLUSIVE, None, samples, None)
    if np.any(np.isinf(values[-3:])):
        return LimitVerdict(LimitKind.INFINITE, INF, samples, None)
    last = values[-3:]
    kappa = fit_exponent(_distance(ts[-4:], endpoint), values[-4:])
    if len(last) == 3 and np.all(last < tol):
        if np.all(last == 0) or (kappa is not None and kappa >= FLAT_EXPONENT):
            return LimitVerdict(LimitKind.ZERO, 0.0, samples, kappa)
    if kappa is None:
        return LimitVerdict(LimitKind.INCONCLUSIVE, None, samples, kappa)
    if abs(kappa) < FLAT_EXPONENT and values[-1] > tol:
        return LimitVerdict(LimitKind.POSITIVE, float(values[-1]), samples, kappa)
    if kappa <= -FLAT_EXPONENT:
        return LimitVerdict(LimitKind.INFINITE, INF, samples, kappa)
    return LimitVerdict(LimitKind.INCONCLUSIVE, None, samples, kappa)


def probe_points(endpoint: float, start: float, count: int, approach: int = 1) -> np.ndarray:
    k = np.arange(count, dtype=float)
    if endpoint == 0:
        return start * 10.0**-k
    if endpoint == INF:
        return start * 10.0**k
    return endpoint + approach * start * 10.0**-k


def limit_probe(
    f: Callable,
    endpoint: float,
    tol: float = LIMIT_TOL,
    start: Optional[float] = None,
    points: int = 12,
    max_points: int = 60,
    approach: int = 1,
) -> LimitVerdict:
    """
    Sample f on a ratio-10 sequence toward ``endpoint`` and classify its limit.

    Finite endpoints are approached from above (``approach=1``) or below
    (``approach=-1``) with ``start`` as the initial distance. A decaying
    sequence that has not yet dropped below ``tol`` is extended up to
    ``max_points`` samples.
    """
    if start is None:
        if endpoint in (0, INF):
            start = 1.0
        else:
            start = 0.1 * (endpoint if approach < 0 else max(endpoint, 1.0))
    count = points
    while True:
        ts = probe_points(endpoint, start, count, approach)
        with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
            try:
                values = _sample(f, ts)
            except OverflowError:
                return LimitVerdict(LimitKind.INFINITE, INF, (), None)
        verdict = classify_sequence(ts, values, endpoint, tol)
        decaying = (
            verdict.kind is LimitKind.INCONCLUSIVE
            and verdict.fitted_exponent is not None
            and verdict.fitted_exponent >= FLAT_EXPONENT
        )
        if not decaying or count >= max_points:
            return verdict
        count = min(max_points, count + 6)


@dataclasses.dataclass(frozen=True)
class SupResult:
    value: float
    argmax: Optional[float]
    plateau: bool
    edge: Optional[float] = None
    samples: Optional[Tuple[np.ndarray, np.ndarray]] = dataclasses.field(
        default=None, repr=False, compare=False
    )


def sup_grid(
    interval: Tuple[float, float],
    grid_density: int,
    breakpoints: Iterable[float] = (),
    span: Tuple[float, float] = PROBE_SPAN,
) -> np.ndarray:
    c1, c2 = float(interval[0]), float(interval[1])
    lo = c1 * (1 + PLATEAU_TOL) if c1 > 0 else span[0] * min(1.0, c2 if c2 < INF else 1.0)
    hi = c2 * (1 - PLATEAU_TOL) if c2 < INF else span[1] * max(1.0, c1)
    if lo >= hi:
        raise QuadratureError(f'degenerate interval ({c1}, {c2})')
    n = max(2, math.ceil(math.log10(hi / lo) * grid_density) + 1)
    ts = set(np.geomspace(lo, hi, n).tolist())
    for b in breakpoints:
        for x in (b * (1 - PLATEAU_TOL), b, b * (1 + PLATEAU_TOL)):
            if lo < x < hi:
                ts.add(x)
    return np.array(sorted(ts))


def _longest_run(mask: np.ndarray) -> int:
    best = run = 0
    for flag in mask:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def sup_on_interval(
    f: Callable,
    interval: Tuple[float, float],
    grid_density: int = 64,
    breakpoints: Iterable[float] = (),
    span: Tuple[float, float] = PROBE_SPAN,
    xtol: float = SUP_TOL,
) -> SupResult:
    """
    Supremum of f over the open interval.

    Grid search on a logarithmic grid, bounded Brent refinement around the
    best interior node, and a limit probe when the best node sits next to
    0 or inf.
    """
    c1, c2 = float(interval[0]), float(interval[1])
    ts = sup_grid((c1, c2), grid_density, breakpoints, span)
    with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
        values = _sample(f, ts)
    if np.any(np.isnan(values)):
        bad = ts[np.isnan(values)][0]
        raise QuadratureError(f'function is nan at t={bad:.17g}')
    best = float(np.max(values))
    if best == 0:
        return SupResult(0.0, float(ts[0]), True, None, (ts, values))
    if best == INF:
        i = int(np.argmax(values == INF))
        return SupResult(INF, float(ts[i]), False, None, (ts, values))

    near = values >= best * (1 - PLATEAU_TOL)
    plateau = _longest_run(near) >= 3
    i = int(np.argmax(near))
    value, argmax = best, float(ts[i])

    if not plateau and 0 < i < len(ts) - 1:
        u0, u1 = math.log(ts[i - 1]), math.log(ts[i + 1])
        result = scipy.optimize.minimize_scalar(
            lambda u: -_scalar(f, math.exp(u)),
            bounds=(u0, u1),
            method='bounded',
            options={'xatol': xtol},
        )
        if result.success and -result.fun > value:
            value, argmax = float(-result.fun), float(math.exp(result.x))

    edge = None
    for endpoint, touches, start in ((0.0, near[0], ts[0]), (INF, near[-1], ts[-1])):
        if not touches or endpoint != (c1 if endpoint == 0 else c2):
            continue
        probe = limit_probe(f, endpoint, start=float(start))
        logger.debug('sup edge probe at %s: %s', endpoint, probe.kind.value)
        if probe.kind is LimitKind.INFINITE:
            value, edge = INF, endpoint
        elif probe.kind is LimitKind.POSITIVE and probe.value > value:
            value, edge = probe.value, endpoint
        elif edge is None:
            edge = endpoint
    return SupResult(value, argmax, plateau, edge, (ts, values))
