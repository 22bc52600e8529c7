"""
Numeric compactness probes: tail norms under the splitting
``T = T(f chi_[0,a)) + T(f chi_[a,b)) + T(f chi_[b,inf))``, singular value
decay at p = q = 2, and a cross-check of both against the analytic verdict.

Spectral decay is a signature only; every discretization is finite rank.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from typing import Optional, Tuple

import numpy as np

from lpqlab import criteria, discretize, normest, quadrature, weights, workers
from lpqlab.discretize import DiscretizedOperator, Grid
from lpqlab.errors import SpanError
from lpqlab.params import INF, Branch, Exponents, OperatorKind, classify, constants
from lpqlab.quadrature import LimitKind, LimitVerdict
from lpqlab.verdict import Answer, Verdict
from lpqlab.weights import Weight

logger = logging.getLogger(__name__)

# relative estimator noise tolerated in monotonicity and triangle checks
NOISE = 1e-3
SPECTRUM_TOL = 1e-8
SPECTRUM_MAX_ITER = 2000
RANK_EPS = 1e-3


@dataclasses.dataclass(frozen=True)
class TailSplit:
    a: float
    b: float
    middle: float
    head: float
    tail: float
    triangle_ok: Optional[bool]
    head_bound: Optional[float] = None
    tail_bound: Optional[float] = None
    middle_bound: Optional[float] = None


@dataclasses.dataclass(frozen=True)
class TailDecayReport:
    a_sequence: Tuple[float, ...]
    b_sequence: Tuple[float, ...]
    splits: Tuple[TailSplit, ...]
    full_norm: float
    head_verdict: LimitVerdict
    tail_verdict: LimitVerdict
    monotone: bool
    heuristic: bool = False

    @property
    def tail_norms(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((s.head, s.tail) for s in self.splits)


def default_splits(grid: Grid) -> int:
    """Largest k such that 10^-k and 10^k lie strictly inside the grid span"""
    lo, hi = grid.span
    if not lo < 1 < hi:
        raise SpanError(f'grid span [{lo:g}, {hi:g}] must contain 1 to split around it')
    k = min(math.log10(1 / lo), math.log10(hi))
    k = math.ceil(k - 1e-9) - 1
    if k < 1:
        raise SpanError(f'grid span [{lo:g}, {hi:g}] is too narrow for a tail split')
    return k


def _split_points(grid: Grid, splits: int) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = grid.span
    ks = np.arange(1, splits + 1, dtype=float)
    a_seq, b_seq = 10.0**-ks, 10.0**ks
    if a_seq[-1] <= lo or b_seq[-1] >= hi:
        raise SpanError(
            f'split points [{a_seq[-1]:g}, {b_seq[-1]:g}] fall outside the grid span '
            f'[{lo:g}, {hi:g}]; extend the grid or lower splits'
        )
    return a_seq, b_seq


def _laplace_bounds(
    exps: Exponents, v: Weight, a: float, b: float
) -> Tuple[Optional[float], Optional[float], Optional[float]]:
    """Analytic bounds on the head, the tail and the middle piece"""
    regime = classify(exps, OperatorKind.LAPLACE)
    head = tail = middle = None
    head_v, tail_v = v.restricted(0.0, a), v.restricted(b, INF)
    if regime.branch is Branch.LAPLACE_I:
        beta = constants(regime, exps).beta
        head = 2 * beta * criteria.laplace_A(exps, head_v)[0].value
        tail = beta * criteria.laplace_A(exps, tail_v)[0].value
    elif regime.branch is Branch.LAPLACE_II and exps.q > 1:
        beta = constants(regime, exps).beta
        factor = max(2.0, (exps.r / exps.p_conj) ** (1 / exps.r))
        head = beta * factor * criteria.laplace_B(exps, head_v)['B_L'].value
        tail = beta * criteria.laplace_B(exps, tail_v)['B_L'].value
    lam, q = exps.lam, exps.q
    if 1 < exps.p < INF and 1 <= q < INF:
        # double-norm bound V_a(b)^(1/p') (a^lam q)^(-1/q)
        moment = weights.moment_integral(v, exps.p_conj, 0.0, (a, b))
        if moment.finite:
            middle = moment.value ** (1 / exps.p_conj) * (a**lam * q) ** (-1 / q)
    elif exps.p == 1 and q < INF:
        # rank-one bound for L^1 -> L^q
        middle = q ** (-1 / q) * a ** (-lam / q) * weights.running_sup(v, a, b)
    return head, tail, middle


def _monotone(values, noise: float) -> bool:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return True
    scale = max(float(np.max(values)), 0.0)
    return bool(np.all(np.diff(values) <= noise * scale + 1e-300))


def tail_decay(
    kind: OperatorKind,
    exps: Exponents,
    v: Weight,
    w: Optional[Weight] = None,
    splits: Optional[int] = None,
    grid: Optional[Grid] = None,
    opts: normest.NormOptions = normest.NormOptions(),
    op: Optional[DiscretizedOperator] = None,
) -> TailDecayReport:
    """
    Norms of the head T(f chi_[0,a)) and the tail T(f chi_[b,inf)) for
    a_k = 10^-k, b_k = 10^k on a fixed grid, with their limit verdicts.
    """
    if op is None:
        grid = grid or discretize.log_grid(1e-4, 1e4, 64)
        op = discretize.build(kind.value, exps, v, w, grid, grid)
    grid = op.source
    splits = default_splits(grid) if splits is None else splits
    a_seq, b_seq = _split_points(grid, splits)
    p, q = exps.p, exps.q
    full = normest.norm_pq(op, p, q, opts)

    def one(k: int) -> TailSplit:
        a, b = float(a_seq[k]), float(b_seq[k])
        norms = [
            normest.norm_pq(discretize.truncate(op, window), p, q, opts).lower_bound
            for window in ((a, b), (0.0, a), (b, INF))
        ]
        middle, head, tail = norms
        triangle = None
        if q >= 1:
            triangle = full.lower_bound <= (middle + head + tail) * (1 + NOISE)
        bounds = (None, None, None)
        if kind is OperatorKind.LAPLACE:
            bounds = _laplace_bounds(exps, v, a, b)
        return TailSplit(a, b, middle, head, tail, triangle, *bounds)

    results = tuple(workers.pool_map(one, range(splits)))
    tol = max(NOISE * full.lower_bound, quadrature.LIMIT_TOL)
    heads = [s.head for s in results]
    tails = [s.tail for s in results]
    head_verdict = quadrature.classify_sequence(a_seq, heads, 0.0, tol)
    tail_verdict = quadrature.classify_sequence(b_seq, tails, INF, tol)
    monotone = _monotone(heads, NOISE) and _monotone(tails, NOISE)
    if not monotone:
        logger.warning('tail norms are not monotone within %.0e', NOISE)
    for split in results:
        if split.triangle_ok is False:
            logger.warning('triangle check failed at a=%g, b=%g', split.a, split.b)
    logger.info('tails: head %s, tail %s', head_verdict.kind.value, tail_verdict.kind.value)
    return TailDecayReport(
        a_sequence=tuple(a_seq.tolist()),
        b_sequence=tuple(b_seq.tolist()),
        splits=results,
        full_norm=full.lower_bound,
        head_verdict=head_verdict,
        tail_verdict=tail_verdict,
        monotone=monotone,
        heuristic=full.heuristic,
    )


@dataclasses.dataclass(frozen=True)
class SpectrumReport:
    singular_values: Tuple[float, ...]
    decay_exponent: Optional[float]
    rank_eps: Optional[int]
    eps: float = RANK_EPS
    iterations: int = 0
    converged: bool = True


def hilbert_matrix(op: DiscretizedOperator) -> np.ndarray:
    """The p = q = 2 scaling of the kernel, whatever exponents op carries"""
    row = np.sqrt(op.target.quad_weights)
    col = np.sqrt(op.source.quad_weights)
    return row[:, None] * op.kernel * col[None, :]


def spectrum(
    op: DiscretizedOperator,
    k: int = 12,
    tol: float = SPECTRUM_TOL,
    eps: float = RANK_EPS,
    seed: int = normest.DEFAULT_SEED,
) -> SpectrumReport:
    """Top-k singular values by block orthogonal iteration on M^T M"""
    matrix = hilbert_matrix(op)
    n, m = matrix.shape
    k = min(k, n, m)
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.random((m, k)))
    sigma = np.zeros(k)
    converged = False
    iteration = 0
    for iteration in range(1, SPECTRUM_MAX_ITER + 1):
        basis, _ = np.linalg.qr(matrix.T @ (matrix @ basis))
        # Rayleigh-Ritz on the current subspace
        new_sigma = np.linalg.svd(matrix @ basis, compute_uv=False)
        scale = new_sigma[0] if new_sigma[0] > 0 else 1.0
        if np.max(np.abs(new_sigma - sigma)) <= tol * scale:
            sigma = new_sigma
            converged = True
            break
        sigma = new_sigma
    if not converged:
        logger.warning('spectrum did not converge in %d iterations', SPECTRUM_MAX_ITER)
    sigma = np.sort(sigma)[::-1]
    sigma = np.where(sigma < sigma[0] * 1e-15, 0.0, sigma) if sigma[0] > 0 else sigma
    below = np.flatnonzero(sigma < eps * sigma[0]) if sigma[0] > 0 else np.array([0])
    rank_eps = int(below[0]) if len(below) else None
    exponent = quadrature.fit_exponent(np.arange(1, k + 1), sigma)
    return SpectrumReport(
        singular_values=tuple(float(s) for s in sigma),
        decay_exponent=None if exponent is None else -exponent,
        rank_eps=rank_eps,
        eps=eps,
        iterations=iteration,
        converged=converged,
    )


class Severity(enum.Enum):
    INFO = 'info'
    WARNING = 'warning'
    ERROR = 'error'


@dataclasses.dataclass(frozen=True)
class Finding:
    severity: Severity
    message: str


@dataclasses.dataclass(frozen=True)
class ConsistencyReport:
    findings: Tuple[Finding, ...]

    @property
    def has_errors(self) -> bool:
        return any(f.severity is Severity.ERROR for f in self.findings)

    @property
    def has_warnings(self) -> bool:
        return any(f.severity is Severity.WARNING for f in self.findings)

    @property
    def consistent(self) -> bool:
        return not (self.has_errors or self.has_warnings)


_DECAYS = {LimitKind.ZERO}
_PERSISTS = {LimitKind.POSITIVE, LimitKind.INFINITE}


def _limit_sides(analytic: Verdict) -> Tuple[bool, bool]:
    """Whether the compactness No rests on a limit at 0 and/or at inf"""
    at_zero = at_inf = False
    for record in analytic.cited('compact'):
        head, _, where = record.observation.partition(' at ')
        if head not in ('limit positive', 'limit infinite'):
            continue
        if where == repr(0.0):
            at_zero = True
        elif where == 'inf':
            at_inf = True
    return at_zero, at_inf


def cross_validate(
    analytic: Verdict,
    tails: Optional[TailDecayReport] = None,
    spec: Optional[SpectrumReport] = None,
) -> ConsistencyReport:
    """Flag disagreements between the analytic verdict and numeric signatures"""
    findings = []

    def add(severity: Severity, message: str):
        findings.append(Finding(severity, message))
        level = logging.INFO if severity is Severity.INFO else logging.WARNING
        logger.log(level, 'cross-validation %s: %s', severity.value, message)

    compact = analytic.compact
    if tails is not None:
        head, tail = tails.head_verdict.kind, tails.tail_verdict.kind
        sides = f'head {head.value}, tail {tail.value}'
        if compact is Answer.YES:
            if head in _PERSISTS or tail in _PERSISTS:
                add(Severity.ERROR, f'compact but tail norms persist ({sides})')
            elif head not in _DECAYS or tail not in _DECAYS:
                add(Severity.WARNING, f'compact but tail decay is inconclusive ({sides})')
        elif compact is Answer.NO:
            at_zero, at_inf = _limit_sides(analytic)
            if at_zero and head in _DECAYS:
                add(Severity.ERROR, 'criterion limit at 0 persists but head norms vanish')
            if at_inf and tail in _DECAYS:
                add(Severity.ERROR, 'criterion limit at inf persists but tail norms vanish')
            if not (at_zero or at_inf) and head in _DECAYS and tail in _DECAYS:
                add(Severity.WARNING, 'not compact but both tail norms vanish on this grid')
        else:
            add(Severity.INFO, f'analytic compactness inconclusive ({sides})')
        if not tails.monotone:
            add(Severity.INFO, 'tail norms are not monotone within estimator noise')
        if any(s.triangle_ok is False for s in tails.splits):
            add(Severity.WARNING, 'triangle inequality check failed on a split')
    if spec is not None:
        fast = spec.rank_eps is not None
        if compact is Answer.YES and not fast:
            count = len(spec.singular_values)
            add(
                Severity.WARNING,
                f'compact but the top {count} singular values stay above {spec.eps:g} of the first',
            )
        elif compact is Answer.NO and fast:
            add(Severity.INFO, 'not compact; the fast spectral decay is a discretization signature')
    return ConsistencyReport(tuple(findings))
