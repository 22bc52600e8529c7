"""
Built-in corpus of closed-form instances and oracle suites.

Every check is a registered subclass of ``Check``; ``run_checks`` runs them
in definition order and never raises, a crashing check is reported as an
error row.

Classical norms are only reachable in the limit of an infinite span: on a
grid covering a log-span L the truncated Hilbert-type operators fall short of
their norm by a term of order 1/L^2. The classical checks extrapolate the
estimates of three nested symmetric grids, the first of which is the default
grid, and compare the limit with the classical value. The Hardy check also
compares the default-grid estimate with the exact finite-interval norm.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import scipy.optimize

from lpqlab import criteria, diagnostics, discretize, normest, report, weights
from lpqlab.params import INF, OperatorKind, derive
from lpqlab.verdict import Answer, compactness_verdict

logger = logging.getLogger(__name__)

NORM_TOL = 0.02
FAST_NORM_TOL = 0.05
FORM_TOL = 1e-6


@dataclasses.dataclass
class CheckResult(report.Row):
    check: str
    expected: str
    observed: str
    status: str

    @property
    def passed(self) -> bool:
        return self.status == 'ok'


def _density(fast: bool) -> int:
    return 16 if fast else 64


def _grid(fast: bool) -> discretize.Grid:
    return discretize.log_grid(1e-4, 1e4, _density(fast))


def _fmt(value: float) -> str:
    return 'inf' if value == INF else f'{value:.6g}'


class Check:

    _CLASSES: List[type] = []
    name: str
    expected: str

    def run(self, fast: bool) -> Tuple[str, bool]:
        """(observed, passed)"""
        raise NotImplementedError

    @classmethod
    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        Check._CLASSES.append(cls)


def _classical(
    kind: OperatorKind, v, w, classical: float, fast: bool
) -> Tuple[normest.SpanLimit, bool]:
    limit = normest.span_limit(kind.value, derive(1, 2, 2), v, w, _density(fast))
    tol = FAST_NORM_TOL if fast else NORM_TOL
    return limit, abs(limit.limit - classical) <= tol * classical


class LaplaceSqrtPi(Check):
    name = 'laplace-sqrt-pi'
    expected = f'A_L = 1, 0.70711 <= norm <= 2, norm -> {math.sqrt(math.pi):.6g} within 2%'

    def run(self, fast):
        one = weights.constant(1.0)
        cs = criteria.evaluate(derive(1, 2, 2), OperatorKind.LAPLACE, one)
        a_l = cs.value('A_L')
        limit, ok = _classical(OperatorKind.LAPLACE, one, None, math.sqrt(math.pi), fast)
        # the first span is the default grid
        bounds = normest.bound_check(limit.estimates[0], cs)
        ok = ok and abs(a_l - 1) <= 1e-6 and bounds.lower_ok is True and bounds.upper_ok is True
        observed = f'A_L {_fmt(a_l)}, norm {_fmt(limit.values[0])} -> {_fmt(limit.limit)}'
        return observed, ok


class StieltjesPi(Check):
    name = 'stieltjes-pi'
    expected = f'A_S = 1, norm -> {math.pi:.6g} within 2%'

    def run(self, fast):
        one = weights.constant(1.0)
        cs = criteria.evaluate(derive(1, 2, 2), OperatorKind.STIELTJES, one, one)
        a_s = cs.value('A_S')
        limit, ok = _classical(OperatorKind.STIELTJES, one, one, math.pi, fast)
        observed = f'A_S {_fmt(a_s)}, norm {_fmt(limit.values[0])} -> {_fmt(limit.limit)}'
        return observed, ok and abs(a_s - 1) <= 1e-6


def hardy_interval_norm(t_min: float, t_max: float) -> float:
    """
    L^2 norm of x^-1 int_{t_min}^x on (t_min, t_max): 2 / sqrt(1 + 4 w^2)
    with w the least root of w cos(wL) + sin(wL) / 2 = 0, L = ln(t_max / t_min).
    """
    span = math.log(t_max / t_min)

    def g(w):
        return w * math.cos(w * span) + math.sin(w * span) / 2

    w = scipy.optimize.brentq(g, math.pi / (2 * span), math.pi / span)
    return 2 / math.sqrt(1 + 4 * w * w)


class HardyTwo(Check):
    name = 'hardy-two'
    expected = 'A = 1, norm matches the finite-interval value, norm -> 2 within 2%'

    def run(self, fast):
        one = weights.constant(1.0)
        a = criteria.evaluate(derive(1, 2, 2), OperatorKind.HARDY, one, one).value('A')
        limit, ok = _classical(OperatorKind.HARDY, one, one, 2.0, fast)
        estimate = limit.values[0]
        target = hardy_interval_norm(*_grid(fast).span)
        tol = FAST_NORM_TOL if fast else NORM_TOL
        ok = ok and abs(a - 1) <= 1e-6 and abs(estimate - target) <= tol * target
        observed = f'A {_fmt(a)}, norm {_fmt(estimate)} vs {_fmt(target)} -> {_fmt(limit.limit)}'
        return observed, ok


class ExactL1(Check):
    name = 'exact-l1'
    expected = f'norm = q^(-1/q) esssup B_q = {2 ** -0.5:.6g}'

    def run(self, fast):
        exps = derive(1, 1, 2)
        v = weights.indicator(1, 2)
        cs = criteria.evaluate(exps, OperatorKind.LAPLACE, v)
        formula = 2**-0.5 * cs.value('B_q')
        grid = _grid(fast)
        op = discretize.build('laplace', exps, v, None, grid, grid)
        estimate = normest.norm_pq(op, 1, 2).lower_bound
        ok = abs(estimate - formula) <= 1e-3 and abs(formula - 2**-0.5) <= 1e-6
        return f'norm {_fmt(estimate)}, formula {_fmt(formula)}', ok


class ComposeCheck(Check):
    name = 'compose'
    expected = 'max deviation < 1e-4'

    def run(self, fast):
        one = weights.constant(1.0)
        grid_y = discretize.log_grid(1e-2, 1e2, 8 if fast else 16)
        grid_x = discretize.log_grid(1e-8, 1e4, 32 if fast else 64)
        deviation = discretize.compose_check(derive(1, 2, 2), one, one, grid_y, grid_x)
        return f'{deviation:.3g}', deviation < 1e-4


def _gap(entry: criteria.CriterionValue) -> float:
    return INF if entry.cross_check is None else entry.cross_check


class LaplaceBForms(Check):
    name = 'b-l-forms'
    expected = f'direct and by-parts B_L agree to {FORM_TOL:g} on random power weights'

    def run(self, fast):
        rng = np.random.default_rng(normest.DEFAULT_SEED)
        exps = derive(1, 4, 2)
        worst = 0.0
        for _ in range(10 if fast else 50):
            v = weights.random_piecewise(rng)
            worst = max(worst, _gap(criteria.laplace_B(exps, v)['B_L']))
        return f'worst gap {worst:.3g}', worst <= FORM_TOL


class HardyBForms(Check):
    name = 'b-h-forms'
    expected = f'both forms of B_H and B_H* agree to {FORM_TOL:g} on random power weights'

    def run(self, fast):
        rng = np.random.default_rng([normest.DEFAULT_SEED, 1])
        exps = derive(1, 3, 2)
        worst = 0.0
        for _ in range(10 if fast else 50):
            v, w = weights.random_piecewise(rng), weights.random_piecewise(rng)
            values = criteria.stieltjes_hardy_form(exps, v, w)
            worst = max(worst, _gap(values['B_H']), _gap(values['B_H*']))
        return f'worst gap {worst:.3g}', worst <= FORM_TOL


# (lambda, p, q) on Laplace branches (i) and (ii)
BOUND_SUITE = ((1, 2, 2), (1, 4, 2))


class TwoSidedBounds(Check):
    name = 'two-sided-bounds'
    expected = 'alpha * criterion * 0.95 <= norm <= beta * criterion * 1.02'

    def run(self, fast):
        count = 20 if fast else 100
        density = 16 if fast else 32
        below = above = 0
        for k, (lam, p, q) in enumerate(BOUND_SUITE):
            exps = derive(lam, p, q)
            rng = np.random.default_rng([normest.DEFAULT_SEED, k])
            for _ in range(count):
                v = weights.random_piecewise(rng)
                grid = discretize.log_grid(1e-4, 1e4, density, v.breakpoints())
                op = discretize.build('laplace', exps, v, None, grid, grid)
                cs = criteria.evaluate(exps, OperatorKind.LAPLACE, v)
                report = normest.bound_check(normest.norm_pq(op, p, q), cs)
                below += report.lower_ok is not True
                above += report.upper_ok is not True
        total = count * len(BOUND_SUITE)
        return f'{below} below, {above} above of {total}', below == above == 0


class Sandwich(Check):
    name = 'sandwich'
    expected = '(H + H*) f / 2 <= S f <= (H + H*) f'

    def run(self, fast):
        one = weights.constant(1.0)
        exps = derive(1, 2, 2)
        grid = discretize.log_grid(1e-2, 1e2, 16)
        ops = {
            kind: discretize.build(kind, exps, one, one, grid, grid)
            for kind in ('stieltjes', 'hardy', 'hardy_dual')
        }
        rng = np.random.default_rng(normest.DEFAULT_SEED)
        failures = 0
        count = 10 if fast else 50
        for _ in range(count):
            f = rng.random(len(grid))
            s = discretize.apply(ops['stieltjes'], f)
            both = discretize.apply(ops['hardy'], f) + discretize.apply(ops['hardy_dual'], f)
            slack = 1e-9 * (1 + both)
            if np.any(both / 2 > s + slack) or np.any(s > both + slack):
                failures += 1
        return f'{failures} of {count} vectors violate', failures == 0


class Oracle(Check):
    name = 'oracle'
    expected = '|norm_pq - brute force| <= 1e-4 (q >= 1)'

    def run(self, fast):
        rng = np.random.default_rng(normest.DEFAULT_SEED)
        ps = [1.0, 1.5, 2.0, 4.0, INF]
        qs = [0.5, 1.0, 2.0, 3.0, INF]
        worst = 0.0
        heuristic_miss = 0.0
        for _ in range(20 if fast else 200):
            n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
            matrix = rng.random((n, m))
            p, q = ps[rng.integers(len(ps))], qs[rng.integers(len(qs))]
            opts = normest.NormOptions(restarts=32 if q < 1 else 8)
            estimate = normest.norm_pq(matrix, p, q, opts).lower_bound
            oracle = normest.brute_force_norm(matrix, p, q)
            if q >= 1:
                worst = max(worst, abs(estimate - oracle))
            else:
                heuristic_miss = max(heuristic_miss, oracle - estimate)
        ok = worst <= 1e-4 and heuristic_miss <= 1e-3
        return f'worst {worst:.2g}, quasi-norm miss {heuristic_miss:.2g}', ok


# (operator, lambda, p, q, v, w, bounded, compact)
VERDICT_CORPUS = (
    ('laplace', 1, 2, 2, weights.indicator(0, 1), None, Answer.YES, Answer.NO),
    ('laplace', 1, 2, 2, weights.indicator(1, 2), None, Answer.YES, Answer.YES),
    ('laplace', 1, 2, 4, weights.power(-0.25), None, Answer.YES, Answer.NO),
    (
        'stieltjes',
        1,
        2,
        2,
        weights.constant(1.0),
        weights.constant(1.0),
        Answer.YES,
        Answer.NO,
    ),
)


class VerdictCorpus(Check):
    name = 'verdict-corpus'
    expected = 'verdicts as listed, cross-validation without errors'

    def run(self, fast):
        observed = []
        ok = True
        for operator, lam, p, q, v, w, bounded, compact in VERDICT_CORPUS:
            kind = OperatorKind(operator)
            exps = derive(lam, p, q)
            verdict = compactness_verdict(criteria.evaluate(exps, kind, v, w))
            grid = _grid(fast)
            op = discretize.build(operator, exps, v, w, grid, grid)
            tails = diagnostics.tail_decay(kind, exps, v, w, op=op)
            spec: Optional[diagnostics.SpectrumReport] = None
            if p == q == 2:
                spec = diagnostics.spectrum(op)
            consistency = diagnostics.cross_validate(verdict, tails, spec)
            observed.append(f'{verdict.bounded.value}/{verdict.compact.value}')
            ok &= verdict.bounded is bounded and verdict.compact is compact
            ok &= not consistency.has_errors
        return ', '.join(observed), ok


def run_checks(fast: bool = False, keyword: Optional[str] = None) -> List[CheckResult]:
    results = []
    for cls in Check._CLASSES:
        check = cls()
        if keyword and keyword not in check.name:
            continue
        logger.info('selftest: %s', check.name)
        try:
            observed, ok = check.run(fast)
            status = 'ok' if ok else 'FAIL'
        except Exception as e:
            logger.exception('selftest %s crashed', check.name)
            observed, status = f'{type(e).__name__}: {e}', 'error'
        results.append(CheckResult(check.name, check.expected, observed, status))
    return results
