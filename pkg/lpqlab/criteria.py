"""
Criterion functionals for the weighted Laplace, Stieltjes and Hardy operators.

Every functional is computed from the weight calculus in ``lpqlab.weights``
and the numeric substrate in ``lpqlab.quadrature``. Divergent functionals come
back as ``inf`` with the offending endpoint recorded; they are never raised.
"""

from __future__ import annotations

import dataclasses
import functools
import logging
import math
from typing import Callable, Dict, Iterable, Optional, Tuple, Union

import numpy as np

from lpqlab import quadrature, weights
from lpqlab.params import (
    INF,
    Branch,
    Exponents,
    OperatorKind,
    BranchConstants,
    Regime,
    classify,
    constants,
    dual_tag,
    laplace_corner,
)
from lpqlab.quadrature import LimitVerdict, SupResult
from lpqlab.weights import Weight

logger = logging.getLogger(__name__)

CURVE_DENSITY = 64
NESTED_DENSITY = 16
INNER_DENSITY = 32
SEQUENCE_POINTS = 12
NESTED_TOL = 1e-7

Interval = Tuple[float, float]
FULL_AXIS: Interval = (0.0, INF)


@dataclasses.dataclass(frozen=True)
class CriterionValue:
    name: str
    value: float
    abs_error: Optional[float] = 0.0
    argmax: Optional[float] = None
    divergent_at: Optional[float] = None
    note: str = ''
    # relative discrepancy against an independently computed form
    cross_check: Optional[float] = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


@dataclasses.dataclass(frozen=True)
class CriterionCurve:
    name: str
    point_fn: Callable = dataclasses.field(repr=False, compare=False)
    sup: SupResult
    limits: Tuple[Optional[LimitVerdict], Optional[LimitVerdict]]
    endpoints: Interval = FULL_AXIS
    note: str = ''

    @property
    def value(self) -> float:
        return self.sup.value

    @property
    def argmax(self) -> Optional[float]:
        return self.sup.argmax

    @property
    def finite(self) -> bool:
        return math.isfinite(self.sup.value)


Entry = Union[CriterionValue, CriterionCurve]


@dataclasses.dataclass
class CriterionSet:
    regime: Regime
    entries: Dict[str, Entry]
    constants: BranchConstants
    # informational values outside the branch's theorem (alternate forms, bounds)
    extras: Dict[str, Entry] = dataclasses.field(default_factory=dict)

    def __getitem__(self, tag: str) -> Entry:
        return self.entries[tag]

    def value(self, tag: str) -> float:
        return self.entries[tag].value


def _power(x, e: float):
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        return np.power(x, e)


def _mul(*factors):
    """Pointwise product with the measure-theoretic convention 0 * inf = 0"""
    arrays = [np.asarray(f, dtype=float) for f in factors]
    out = np.ones(np.broadcast(*arrays).shape)
    zero = np.zeros(out.shape, dtype=bool)
    with np.errstate(invalid='ignore', over='ignore'):
        for a in arrays:
            out = out * a
            zero |= a == 0
    return np.where(zero, 0.0, out)


def norm_fn(wt: Weight, s: float, anchor: float, direction: str) -> Callable:
    """
    t -> L^s norm of ``wt`` over (anchor, t) ('right') or (t, anchor) ('left');
    ``s = inf`` gives the running essential supremum.
    """
    if s == INF:
        return weights.running_sup_function(wt, anchor, direction)
    moment = weights.cumulative(wt, s, 0.0, anchor, direction)

    def fn(t):
        return _power(moment(t), 1 / s)

    return fn


def interval_norm(wt: Weight, s: float, interval: Interval) -> float:
    c1, c2 = interval
    if s == INF:
        return weights.running_sup(wt, c1, c2)
    moment = weights.moment_integral(wt, s, 0.0, (c1, c2))
    return moment.value ** (1 / s) if moment.finite else INF


def _breakpoints(*wts: Weight) -> Tuple[float, ...]:
    points = set()
    for wt in wts:
        points.update(wt.breakpoints())
    return tuple(sorted(points))


def _limit(fn: Callable, endpoint: float, approach: int) -> LimitVerdict:
    if endpoint in (0.0, INF):
        return quadrature.limit_probe(fn, endpoint)
    return quadrature.limit_probe(fn, endpoint, approach=approach)


def make_curve(
    name: str,
    fn: Callable,
    interval: Interval = FULL_AXIS,
    breakpoints: Iterable[float] = (),
    density: int = CURVE_DENSITY,
    limits: bool = True,
    note: str = '',
) -> CriterionCurve:
    c1, c2 = interval
    sup = quadrature.sup_on_interval(fn, interval, grid_density=density, breakpoints=breakpoints)
    pair: Tuple[Optional[LimitVerdict], Optional[LimitVerdict]] = (None, None)
    if limits:
        pair = (_limit(fn, c1, 1), _limit(fn, c2, -1))
    logger.info('%s: sup %.6g at t=%s', name, sup.value, sup.argmax)
    return CriterionCurve(
        name=name, point_fn=fn, sup=sup, limits=pair, endpoints=interval, note=note
    )


def integral_value(
    name: str,
    integrand: Callable,
    interval: Interval,
    exponent: float,
    breakpoints: Iterable[float] = (),
    rel_tol: float = quadrature.REL_TOL,
    factor: float = 1.0,
    note: str = '',
) -> CriterionValue:
    """factor * (integral of integrand over the interval) ** exponent"""
    result = quadrature.integrate(integrand, interval, rel_tol=rel_tol, breakpoints=breakpoints)
    if result.divergent_at is not None:
        return CriterionValue(
            name, INF, None, divergent_at=result.divergent_at, note=note or 'divergent'
        )
    if result.value <= 0:
        return CriterionValue(name, 0.0, 0.0, note=note)
    value = factor * result.value**exponent
    error = value * abs(exponent) * result.abs_error / result.value
    return CriterionValue(name, value, error, note=note)


def _moment_value(name: str, moment: weights.MomentValue, exponent: float) -> CriterionValue:
    if not moment.finite:
        return CriterionValue(name, INF, None, divergent_at=moment.divergent_at, note='divergent')
    if moment.value == 0:
        return CriterionValue(name, 0.0, 0.0)
    value = moment.value**exponent
    return CriterionValue(name, value, value * exponent * moment.abs_error / moment.value)


def relative_gap(a: float, b: float) -> Optional[float]:
    if not (math.isfinite(a) and math.isfinite(b)):
        return None if a != b else 0.0
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


# --- Laplace -----------------------------------------------------------------


def _laplace_kernel_factor(lam: float, c2: float, power: float) -> Callable:
    """t -> (t^-lam - c2^-lam) ** power"""
    tail = 0.0 if c2 == INF else c2**-lam

    def fn(t):
        t = np.asarray(t, dtype=float)
        return _power(np.maximum(_power(t, -lam) - tail, 0.0), power)

    return fn


def laplace_A(
    exps: Exponents, v: Weight, interval: Interval = FULL_AXIS
) -> Tuple[CriterionCurve, CriterionValue]:
    """A_L curve on the interval together with the D term"""
    c1, c2 = interval
    lam, q = exps.lam, exps.q
    kernel = _laplace_kernel_factor(lam, c2, 1 / q)
    v_norm = norm_fn(v, exps.p_conj, c1, 'right')

    def fn(t):
        return _mul(kernel(t), v_norm(t))

    curve = make_curve('A_L', fn, interval, v.breakpoints())
    if c2 == INF:
        d = CriterionValue('D', 0.0, 0.0, note='vanishes on an unbounded interval')
    else:
        d_value = c2 ** (-lam / q) * interval_norm(v, exps.p_conj, (c1, c2))
        d = CriterionValue('D', d_value, 0.0)
    return curve, d


def laplace_B(
    exps: Exponents, v: Weight, interval: Interval = FULL_AXIS
) -> Dict[str, CriterionValue]:
    """
    B_L in the direct and integrated-by-parts forms, B_p when q = 1 and the
    L^{p'} norm of B_q when q < 1.
    """
    lam, p, q, p_conj, r = exps.lam, exps.p, exps.q, exps.p_conj, exps.r
    c1, c2 = interval
    if not (1 < p < INF and q < p):
        raise ValueError(f'B_L needs 1 < p < inf and q < p, got p={p}, q={q}')
    out: Dict[str, CriterionValue] = {}
    bps = v.breakpoints()

    if q == 1:
        moment = weights.moment_integral(v, p_conj, -lam * p_conj, interval)
        out['B_p'] = _moment_value('B_p', moment, 1 / p_conj)
    if q < 1:
        moment = weights.moment_integral(v, p_conj, -lam * p_conj / q, interval)
        out['B_q_norm'] = _moment_value('B_q_norm', moment, 1 / p_conj)
    if q == 1:
        return out

    V = weights.cumulative(v, p_conj, 0.0, c1, 'right')
    direct_kernel = _laplace_kernel_factor(lam, c2, r / q)
    r_over_q_conj = r * exps.inv_q_conj

    def direct(t):
        vt = v(t)
        return _mul(direct_kernel(t), _power(V(t), r_over_q_conj), _power(vt, p_conj))

    by_parts_kernel = _laplace_kernel_factor(lam, c2, r / q - 1)

    def by_parts(t):
        t = np.asarray(t, dtype=float)
        return _mul(_power(V(t), r / p_conj), _power(t, -lam - 1), by_parts_kernel(t))

    b_direct = integral_value('B_L', direct, interval, 1 / r, bps)
    b_parts = integral_value(
        'B_L_by_parts', by_parts, interval, 1 / r, bps, factor=(lam * p_conj / q) ** (1 / r)
    )
    gap = relative_gap(b_direct.value, b_parts.value)
    out['B_L'] = dataclasses.replace(b_direct, cross_check=gap)
    out['B_L_by_parts'] = dataclasses.replace(b_parts, cross_check=gap)
    if gap is not None and gap > 1e-6:
        logger.warning('B_L forms disagree by %.3g (relative)', gap)
    return out


def laplace_Bq(
    exps: Exponents, v: Weight, interval: Interval = FULL_AXIS
) -> Dict[str, Entry]:
    """esssup B_q, the B̄_q curve with its limits and, for q < 1, B_q'"""
    lam, q = exps.lam, exps.q
    c1, c2 = interval
    bps = v.breakpoints()
    exact = weights.running_sup(v.times_power(-lam / q), c1, c2)

    def b_q(t):
        t = np.asarray(t, dtype=float)
        return _mul(_power(t, -lam / q), v(t))

    envelope = weights.running_sup_function(v, c1, 'right')

    def bbar_q(t):
        t = np.asarray(t, dtype=float)
        return _mul(_power(t, -lam / q), envelope(t))

    b_curve = make_curve('B_q', b_q, interval, bps, limits=False)
    b_curve = dataclasses.replace(b_curve, sup=dataclasses.replace(b_curve.sup, value=exact))
    out: Dict[str, Entry] = {
        'B_q': b_curve,
        'Bbar_q': make_curve('Bbar_q', bbar_q, interval, bps),
    }
    if q < 1:
        s = q / (1 - q)
        kernel = _laplace_kernel_factor(lam, c2, s)

        def density(t):
            t = np.asarray(t, dtype=float)
            return _mul(kernel(t), _power(t, -lam - 1), _power(envelope(t), s))

        out["B_q'"] = integral_value("B_q'", density, interval, (1 - q) / q, bps)
    return out


def laplace_extremes(exps: Exponents, v: Weight) -> Dict[str, CriterionValue]:
    """The corner constants for p = inf or q = inf"""
    lam, q = exps.lam, exps.q
    out = {
        'C_1': _moment_value('C_1', weights.moment_integral(v, 1.0, 0.0, FULL_AXIS), 1.0),
        'C_inf': CriterionValue('C_inf', weights.running_sup(v, 0.0, INF)),
        "C_p'": CriterionValue("C_p'", interval_norm(v, exps.p_conj, FULL_AXIS)),
    }
    if q < INF:
        out['C_q=1'] = _moment_value(
            'C_q=1', weights.moment_integral(v, 1.0, -lam, FULL_AXIS), 1.0
        )
        out['C_q<1'] = _moment_value(
            'C_q<1', weights.moment_integral(v, 1.0, -lam / q, FULL_AXIS), 1.0
        )
        running = weights.cumulative(v, 1.0, 0.0, 0.0, 'right')

        def density(t):
            t = np.asarray(t, dtype=float)
            return _mul(_power(t, -lam), _power(running(t), q - 1), v(t))

        out['C_q>1'] = integral_value('C_q>1', density, FULL_AXIS, 1 / q, v.breakpoints())
    return out


# --- Stieltjes ---------------------------------------------------------------


class _StieltjesInner:
    """Cached inner integrals of the Stieltjes kernel at fixed t"""

    def __init__(self, exps: Exponents, v: Weight, w: Weight, rel_tol: float = NESTED_TOL):
        self.exps = exps
        self.v = v
        self.w = w
        self.rel_tol = rel_tol
        self.w_bps = w.breakpoints()
        self.v_bps = v.breakpoints()
        self.w_part = functools.lru_cache(maxsize=None)(self._w_part)
        self.v_part = functools.lru_cache(maxsize=None)(self._v_part)
        self.v_sup = functools.lru_cache(maxsize=None)(self._v_sup)

    def _kernel_integral(self, wt: Weight, s: float, t: float, bps) -> float:
        lam = self.exps.lam
        tl = t**lam

        def f(x):
            x = np.asarray(x, dtype=float)
            return _mul(_power(wt(x), s), _power(_power(x, lam) + tl, -s))

        return quadrature.integrate(f, FULL_AXIS, rel_tol=self.rel_tol, breakpoints=bps).value

    def _w_part(self, t: float, s: float) -> float:
        """integral of w^s / (x^lam + t^lam)^s"""
        return self._kernel_integral(self.w, s, t, self.w_bps)

    def _v_part(self, t: float, s: float) -> float:
        """integral of v^s / (t^lam + y^lam)^s"""
        return self._kernel_integral(self.v, s, t, self.v_bps)

    def _v_sup(self, t: float) -> float:
        """esssup over y of v(y) / (t^lam + y^lam)"""
        lam = self.exps.lam
        tl = t**lam

        def f(y):
            y = np.asarray(y, dtype=float)
            return _mul(self.v(y), 1 / (tl + _power(y, lam)))

        return quadrature.sup_on_interval(
            f, FULL_AXIS, grid_density=INNER_DENSITY, breakpoints=self.v_bps
        ).value


def _pointwise(fn: Callable[[float], float]) -> Callable:
    def wrapped(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([fn(float(x)) for x in t])

    return wrapped


def stieltjes_A(exps: Exponents, v: Weight, w: Weight) -> Dict[str, Entry]:
    """A_S (1 < p <= q) and A_1S (p = 1 <= q)"""
    lam, p, q, p_conj = exps.lam, exps.p, exps.q, exps.p_conj
    inner = _StieltjesInner(exps, v, w)
    bps = _breakpoints(v, w)
    out: Dict[str, Entry] = {}
    if v.is_zero or w.is_zero:
        name = 'A_S' if p > 1 else 'A_1S'
        return {name: make_curve(name, lambda t: np.zeros_like(t), limits=False)}

    def w_factor(t: float) -> float:
        return t**lam * inner.w_part(t, q) ** (1 / q)

    if p > 1:

        def a_s(t: float) -> float:
            wf = w_factor(t)
            if wf == 0:
                return 0.0
            vf = inner.v_part(t, p_conj) ** (1 / p_conj)
            return 0.0 if vf == 0 else wf * vf

        out['A_S'] = make_curve('A_S', _pointwise(a_s), FULL_AXIS, bps, density=NESTED_DENSITY)
    else:

        def a_1s(t: float) -> float:
            wf = w_factor(t)
            return 0.0 if wf == 0 else wf * inner.v_sup(t)

        out['A_1S'] = make_curve(
            'A_1S', _pointwise(a_1s), FULL_AXIS, bps, density=NESTED_DENSITY, limits=False
        )
    return out


def stieltjes_B(exps: Exponents, v: Weight, w: Weight) -> Dict[str, CriterionValue]:
    """B_S (1 < q < p) and the exact q = 1 norm Lambda"""
    lam, p, q, p_conj, r = exps.lam, exps.p, exps.q, exps.p_conj, exps.r
    if not (1 < p < INF and q < p):
        raise ValueError(f'B_S and Lambda need 1 < p < inf and q < p, got p={p}, q={q}')
    inner = _StieltjesInner(exps, v, w, rel_tol=NESTED_TOL / 2)
    bps = v.breakpoints()
    out: Dict[str, CriterionValue] = {}
    outer_tol = NESTED_TOL / 2

    if q == 1:

        def density(t: float) -> float:
            vt = float(v(np.array([t]))[0])
            if vt == 0:
                return 0.0
            return (inner.w_part(t, 1.0) * vt) ** p_conj

        out['Lambda'] = integral_value(
            'Lambda', _pointwise(density), FULL_AXIS, 1 / p_conj, bps, rel_tol=outer_tol
        )
    elif q > 1:
        r_q_conj = r * exps.inv_q_conj

        def density(t: float) -> float:
            vt = float(v(np.array([t]))[0])
            if vt == 0:
                return 0.0
            w_side = inner.w_part(t, q) ** (r / q)
            # integral of v^p' / (1 + (y/t)^lam)^p' = t^(lam p') * v_part
            v_side = (t ** (lam * p_conj) * inner.v_part(t, p_conj)) ** r_q_conj
            return float(_mul(w_side, v_side, vt**p_conj))

        out['B_S'] = integral_value(
            'B_S', _pointwise(density), FULL_AXIS, 1 / r, bps, rel_tol=outer_tol
        )
    return out


def corner_norm(kind: OperatorKind, exps: Exponents, v: Weight, w: Weight) -> CriterionValue:
    """
    Exact norm of a non-negative kernel operator when p = inf or q = inf:
    ``||T 1||_q`` for p = inf and ``sup_x ||w(x) k(x, .) v||_{p'}`` for q = inf.
    """
    p, q = exps.p, exps.q
    if kind is OperatorKind.STIELTJES:
        lam = exps.lam
        inner = _StieltjesInner(exps, v, w)
        bps = _breakpoints(v, w)
        if p == INF:
            # T1(x) = w(x) * integral of v / (x^lam + y^lam)
            def image(x: float) -> float:
                return inner.v_part(x, 1.0)

            if q == INF:
                fn = _pointwise(lambda x: float(w(np.array([x]))[0]) * image(x))
                sup = quadrature.sup_on_interval(fn, FULL_AXIS, NESTED_DENSITY, bps)
                return CriterionValue('N', sup.value, argmax=sup.argmax, note='sup of T1')

            def density(x: float) -> float:
                wx = float(w(np.array([x]))[0])
                return 0.0 if wx == 0 else (wx * image(x)) ** q

            return integral_value('N', _pointwise(density), FULL_AXIS, 1 / q, bps)

        def row(x: float) -> float:
            wx = float(w(np.array([x]))[0])
            if wx == 0:
                return 0.0
            if exps.p_conj == INF:
                return wx * inner.v_sup(x)
            return wx * inner.v_part(x, exps.p_conj) ** (1 / exps.p_conj)

        sup = quadrature.sup_on_interval(_pointwise(row), FULL_AXIS, NESTED_DENSITY, bps)
        return CriterionValue('N', sup.value, argmax=sup.argmax, note=f'sup of rows, lam={lam}')

    phi, psi = hardy_weights(kind, exps, v, w)
    return _hardy_corner(kind, exps, phi, psi, FULL_AXIS)


# --- Hardy -------------------------------------------------------------------


def hardy_weights(
    kind: OperatorKind, exps: Exponents, v: Weight, w: Weight
) -> Tuple[Weight, Weight]:
    """(phi, psi) of H = x^-lam w int_0^x f v and of H* = w int_x^inf f y^-lam v"""
    if kind is OperatorKind.HARDY:
        return v, w.times_power(-exps.lam)
    return v.times_power(-exps.lam), w


def _hardy_corner(
    kind: OperatorKind, exps: Exponents, phi: Weight, psi: Weight, interval: Interval
) -> CriterionValue:
    c1, c2 = interval
    p, q = exps.p, exps.q
    forward = kind is OperatorKind.HARDY
    anchor, direction = (c1, 'right') if forward else (c2, 'left')
    bps = _breakpoints(phi, psi)
    s = 1.0 if p == INF else exps.p_conj
    inner = norm_fn(phi, s, anchor, direction)

    if q == INF:

        def row(t):
            return _mul(psi(np.asarray(t, dtype=float)), inner(t))

        sup = quadrature.sup_on_interval(row, interval, CURVE_DENSITY, bps)
        return CriterionValue('N', sup.value, argmax=sup.argmax, note='sup of rows')

    def density(t):
        return _power(_mul(psi(np.asarray(t, dtype=float)), inner(t)), q)

    return integral_value('N', density, interval, 1 / q, bps, note='norm of T1')


def hardy_criteria(
    exps: Exponents,
    phi: Weight,
    psi: Weight,
    interval: Interval = FULL_AXIS,
    direction: str = 'forward',
) -> Dict[str, Entry]:
    """
    Criteria for H f = psi(x) int_{c1}^x f phi ('forward') or
    H* f = psi(x) int_x^{c2} f phi ('dual') on the interval.
    """
    kind = OperatorKind.HARDY if direction == 'forward' else OperatorKind.HARDY_DUAL
    c1, c2 = interval
    p, q, p_conj = exps.p, exps.q, exps.p_conj
    bps = _breakpoints(phi, psi)
    if direction == 'forward':
        phi_side = norm_fn(phi, p_conj, c1, 'right')
        psi_side = norm_fn(psi, q, c2, 'left') if q < INF else None
        envelope = weights.running_sup_function(phi, c1, 'right')
    else:
        phi_side = norm_fn(phi, p_conj, c2, 'left')
        psi_side = norm_fn(psi, q, c1, 'right') if q < INF else None
        envelope = weights.running_sup_function(phi, c2, 'left')

    def tag(name):
        return dual_tag(name, kind)

    out: Dict[str, Entry] = {}
    if p == INF or q == INF:
        out['N'] = _hardy_corner(kind, exps, phi, psi, interval)
        return out
    if 1 < p <= q:

        def a(t):
            return _mul(phi_side(t), psi_side(t))

        out[tag('A')] = make_curve(tag('A'), a, interval, bps)
    elif p > 1:
        r = exps.r

        def b_density(t):
            t = np.asarray(t, dtype=float)
            return _mul(
                _power(phi_side(t), r),
                _power(psi_side(t), q * r / p),
                _power(psi(t), q),
            )

        note = 'q = 1 endpoint of the B criterion' if q == 1 else ''
        out[tag('B')] = integral_value(tag('B'), b_density, interval, 1 / r, bps, note=note)
    elif q < 1:
        s = q / (1 - q)

        def density(t):
            t = np.asarray(t, dtype=float)
            return _mul(_power(envelope(t), s), _power(psi_side(t), q * s), _power(psi(t), q))

        out[tag('B_q<1')] = integral_value(tag('B_q<1'), density, interval, 1 / s, bps)
    else:

        def b1(t):
            return _mul(envelope(t), psi_side(t))

        out[tag('B_1<=q')] = make_curve(tag('B_1<=q'), b1, interval, bps)
    return out


def stieltjes_hardy_form(exps: Exponents, v: Weight, w: Weight) -> Dict[str, Entry]:
    """Hardy-type criteria A_H, A_H*, B_H, B_H*, B_1H, B_1H* for S"""
    lam, p, q, p_conj = exps.lam, exps.p, exps.q, exps.p_conj
    bps = _breakpoints(v, w)
    V0 = norm_fn(v, p_conj, 0.0, 'right')  # V_0(t)^(1/p')
    Vt = norm_fn(v.times_power(-lam), p_conj, INF, 'left')  # 𝒱_t(inf)^(1/p')
    out: Dict[str, Entry] = {}
    if q == INF or p == INF:
        return out
    Wt = norm_fn(w.times_power(-lam), q, INF, 'left')  # 𝒲_t(inf)^(1/q)
    W0 = norm_fn(w, q, 0.0, 'right')  # W_0(t)^(1/q)

    if 1 < p <= q:
        out['A_H'] = make_curve('A_H', lambda t: _mul(V0(t), Wt(t)), FULL_AXIS, bps)
        out['A_H*'] = make_curve('A_H*', lambda t: _mul(Vt(t), W0(t)), FULL_AXIS, bps)
    elif p > 1 and q != 1:
        r = exps.r

        def b_h(t):
            t = np.asarray(t, dtype=float)
            return _mul(
                _power(V0(t), r), _power(Wt(t), q * r / p), _power(t, -lam * q), _power(w(t), q)
            )

        def b_h_star(t):
            t = np.asarray(t, dtype=float)
            return _mul(_power(Vt(t), r), _power(W0(t), q * r / p), _power(w(t), q))

        main = integral_value('B_H', b_h, FULL_AXIS, 1 / r, bps)
        main_star = integral_value('B_H*', b_h_star, FULL_AXIS, 1 / r, bps)
        if q > 1:
            factor = (q / p_conj) ** (1 / r)
            r_q_conj = r * exps.inv_q_conj

            def b_h_alt(t):
                t = np.asarray(t, dtype=float)
                return _mul(
                    _power(V0(t), p_conj * r_q_conj),
                    _power(Wt(t), r),
                    _power(v(t), p_conj),
                )

            def b_h_star_alt(t):
                t = np.asarray(t, dtype=float)
                return _mul(
                    _power(Vt(t), p_conj * r_q_conj),
                    _power(W0(t), r),
                    _power(t, -lam * p_conj),
                    _power(v(t), p_conj),
                )

            alt = integral_value('B_H_alt', b_h_alt, FULL_AXIS, 1 / r, bps, factor=factor)
            alt_star = integral_value(
                'B_H*_alt', b_h_star_alt, FULL_AXIS, 1 / r, bps, factor=factor
            )
            main = dataclasses.replace(main, cross_check=relative_gap(main.value, alt.value))
            main_star = dataclasses.replace(
                main_star, cross_check=relative_gap(main_star.value, alt_star.value)
            )
            out['B_H_alt'] = alt
            out['B_H*_alt'] = alt_star
        out['B_H'] = main
        out['B_H*'] = main_star
    elif p == 1 and q < 1:
        s = q / (1 - q)
        v_env = weights.running_sup_function(v, 0.0, 'right')
        v_tail_env = weights.running_sup_function(v, INF, 'left')

        def b_1h(t):
            t = np.asarray(t, dtype=float)
            return _mul(
                _power(v_env(t), s), _power(Wt(t), q * s), _power(t, -lam * q), _power(w(t), q)
            )

        def b_1h_star(t):
            t = np.asarray(t, dtype=float)
            return _mul(
                _power(_power(t, -lam) * v_tail_env(t), s),
                _power(W0(t), q * s),
                _power(w(t), q),
            )

        out['B_1H'] = integral_value('B_1H', b_1h, FULL_AXIS, 1 / s, bps)
        out['B_1H*'] = integral_value('B_1H*', b_1h_star, FULL_AXIS, 1 / s, bps)
    return out


def stieltjes_p1(
    exps: Exponents,
    v: Weight,
    w: Weight,
    a: float = 1.0,
    b: float = 1.0,
    points: int = SEQUENCE_POINTS,
) -> Dict[str, Entry]:
    """
    S_H, S_H* and the truncated sequences
    a -> sup_{0<t<a}[S_{H,a} + S_{H*,a}] and b -> sup_{b<t}[S_{H,b} + S_{H*,b}].
    """
    lam, q = exps.lam, exps.q
    bps = _breakpoints(v, w)
    w_lam = w.times_power(-lam)
    v_env0 = weights.running_sup_function(v, 0.0, 'right')
    v_env_inf = weights.running_sup_function(v, INF, 'left')
    Wt = norm_fn(w_lam, q, INF, 'left')
    W0 = norm_fn(w, q, 0.0, 'right')

    def s_h(t):
        return _mul(v_env0(t), Wt(t))

    def s_h_star(t):
        t = np.asarray(t, dtype=float)
        return _mul(v_env_inf(t), _power(t, -lam), W0(t))

    out: Dict[str, Entry] = {
        'S_H': make_curve('S_H', s_h, FULL_AXIS, bps, limits=False),
        'S_H*': make_curve('S_H*', s_h_star, FULL_AXIS, bps, limits=False),
    }

    def truncated_a(a_k: float) -> float:
        env_a = weights.running_sup_function(v, a_k, 'left')
        Wa = norm_fn(w_lam, q, a_k, 'left')

        def fn(t):
            t = np.asarray(t, dtype=float)
            return _mul(v_env0(t), Wa(t)) + _mul(env_a(t), _power(t, -lam), W0(t))

        return quadrature.sup_on_interval(fn, (0.0, a_k), NESTED_DENSITY, bps).value

    def truncated_b(b_k: float) -> float:
        env_b = weights.running_sup_function(v, b_k, 'right')
        Wb = norm_fn(w, q, b_k, 'right')

        def fn(t):
            t = np.asarray(t, dtype=float)
            return _mul(env_b(t), Wt(t)) + _mul(v_env_inf(t), _power(t, -lam), Wb(t))

        return quadrature.sup_on_interval(fn, (b_k, INF), NESTED_DENSITY, bps).value

    out['S_a'] = _sequence_curve('S_a', truncated_a, 0.0, a, points)
    out['S_b'] = _sequence_curve('S_b', truncated_b, INF, b, points)
    return out


def _sequence_curve(
    name: str, fn: Callable[[float], float], endpoint: float, start: float, points: int
) -> CriterionCurve:
    ts = quadrature.probe_points(endpoint, start, points)
    values = np.array([fn(float(t)) for t in ts])
    verdict = quadrature.classify_sequence(ts, values, endpoint)
    i = int(np.argmax(values))
    sup = SupResult(float(values[i]), float(ts[i]), False, None, (ts, values))
    limits = (verdict, None) if endpoint == 0 else (None, verdict)
    return CriterionCurve(
        name=name,
        point_fn=_pointwise(fn),
        sup=sup,
        limits=limits,
        endpoints=(0.0, INF),
        note='truncation sequence',
    )


def double_norm(
    exps: Exponents,
    kernel: OperatorKind,
    v: Weight,
    w: Weight,
    interval: Interval,
) -> Dict[str, CriterionValue]:
    """
    M_T = || ||w(x) k(x, .) v(.)||_{p', (a, b)} ||_q and, for the Laplace
    kernel with 0 < a < b < inf, the closed bound V_a(b)^(1/p') / (a^lam q)^(1/q).
    """
    lam, p, q, p_conj = exps.lam, exps.p, exps.q, exps.p_conj
    a, b = interval
    if not (1 < p < INF and 1 <= q < INF):
        raise ValueError(f'M_T needs 1 < p < inf and 1 <= q < inf, got p={p}, q={q}')
    if kernel is OperatorKind.LAPLACE:
        w = weights.constant(1.0)

        def k(x: float, y):
            return np.exp(-x * _power(y, lam))

    elif kernel is OperatorKind.STIELTJES:

        def k(x: float, y):
            return 1 / (x**lam + _power(y, lam))

    else:
        raise ValueError(f'M_T is defined for the laplace and stieltjes kernels, got {kernel}')
    v_bps = v.breakpoints()

    @functools.lru_cache(maxsize=None)
    def row_norm(x: float) -> float:
        def f(y):
            y = np.asarray(y, dtype=float)
            return _power(_mul(k(x, y), v(y)), p_conj)

        return quadrature.integrate(f, (a, b), rel_tol=NESTED_TOL / 2, breakpoints=v_bps).value

    def density(x: float) -> float:
        wx = float(w(np.array([x]))[0])
        if wx == 0:
            return 0.0
        return (wx * row_norm(x) ** (1 / p_conj)) ** q

    out = {
        'M_T': integral_value(
            'M_T', _pointwise(density), FULL_AXIS, 1 / q, w.breakpoints(), rel_tol=NESTED_TOL / 2
        )
    }
    if kernel is OperatorKind.LAPLACE and 0 < a < b < INF:
        moment = weights.moment_integral(v, p_conj, 0.0, (a, b))
        bound = (moment.value ** (q / p_conj) / (a**lam * q)) ** (1 / q)
        out['M_T_bound'] = CriterionValue('M_T_bound', bound, 0.0, note='closed bound on M_T')
    return out


# --- assembly ----------------------------------------------------------------


def _vw_remark(exps: Exponents, v: Weight, w: Weight, a_s: Entry) -> Optional[CriterionValue]:
    """A(t) = t^(-lam/2) V_0(t)^(1/p') for w = v and p = q' <= q = p'"""
    if v != w or exps.q_conj is None or abs(exps.p - exps.q_conj) > 1e-12:
        return None
    V0 = norm_fn(v, exps.p_conj, 0.0, 'right')
    curve = make_curve(
        'A_vw',
        lambda t: _mul(_power(np.asarray(t, dtype=float), -exps.lam / 2), V0(t)),
        FULL_AXIS,
        v.breakpoints(),
        limits=False,
    )
    squared = curve.value**2
    ok = not math.isfinite(squared) or a_s.value >= squared * (1 - 1e-3)
    return CriterionValue(
        'A_vw',
        curve.value,
        argmax=curve.argmax,
        note=f'A_S >= A^2 {"holds" if ok else "fails"}',
    )


def _laplace_entries(regime: Regime, exps: Exponents, v: Weight):
    branch = regime.branch
    interval = regime.interval
    entries: Dict[str, Entry] = {}
    extras: Dict[str, Entry] = {}
    if branch is Branch.LAPLACE_I:
        curve, d = laplace_A(exps, v, interval)
        entries['A_L'] = curve
        (entries if regime.role('D') else extras)['D'] = d
    elif branch in {Branch.LAPLACE_II, Branch.LAPLACE_III}:
        values = laplace_B(exps, v, interval)
        for tag, value in values.items():
            (entries if regime.role(tag) else extras)[tag] = value
        if interval[1] < INF:
            entries['D'] = laplace_A(exps, v, interval)[1]
    elif branch in {Branch.LAPLACE_IV, Branch.LAPLACE_V}:
        values = laplace_Bq(exps, v, interval)
        for tag, value in values.items():
            (entries if regime.role(tag) else extras)[tag] = value
        if regime.role('D'):
            c1, c2 = interval
            d = c2 ** (-exps.lam / exps.q) * weights.running_sup(v, c1, c2)
            entries['D'] = CriterionValue('D', d, 0.0)
    else:
        values = laplace_extremes(exps, v.restricted(*interval))
        for tag, value in values.items():
            (entries if regime.role(tag) else extras)[tag] = value
        if laplace_corner(exps) == 'C_inf':
            entries['C_inf'] = values['C_inf']
    return entries, extras


def _stieltjes_entries(regime: Regime, exps: Exponents, v: Weight, w: Weight):
    branch = regime.branch
    entries: Dict[str, Entry] = {}
    extras: Dict[str, Entry] = {}

    def place(values):
        for tag, value in values.items():
            (entries if regime.role(tag) or tag in regime.limits else extras)[tag] = value

    if branch is Branch.STIELTJES_I:
        place(stieltjes_A(exps, v, w))
        place(stieltjes_hardy_form(exps, v, w))
        remark = _vw_remark(exps, v, w, entries['A_S'])
        if remark is not None:
            extras['A_vw'] = remark
    elif branch is Branch.STIELTJES_II:
        if exps.q == 1:
            place(stieltjes_B(exps, v, w))
        else:
            place(stieltjes_hardy_form(exps, v, w))
            if exps.q > 1:
                place(stieltjes_B(exps, v, w))
    elif branch is Branch.STIELTJES_III:
        place(stieltjes_hardy_form(exps, v, w))
    elif branch is Branch.STIELTJES_IV:
        place(stieltjes_p1(exps, v, w))
        place(stieltjes_A(exps, v, w))
    else:
        entries['N'] = corner_norm(OperatorKind.STIELTJES, exps, v, w)
    return entries, extras


def evaluate(
    exps: Exponents,
    kind: OperatorKind,
    v: Weight,
    w: Optional[Weight] = None,
    interval: Interval = FULL_AXIS,
) -> CriterionSet:
    """Assemble every criterion the classified branch names"""
    if w is None:
        w = weights.constant(1.0)
    if kind is OperatorKind.STIELTJES and tuple(interval) != FULL_AXIS:
        logger.warning('interval restriction applies to laplace and hardy only; ignored')
        interval = FULL_AXIS
    regime = classify(exps, kind, interval)
    branch_constants = constants(regime, exps)
    logger.info('branch %s', regime.branch.value)
    if exps.p_conj < INF:
        weights.check_local_integrability(v, exps.p_conj, 'v')
    if kind is OperatorKind.LAPLACE:
        entries, extras = _laplace_entries(regime, exps, v)
    elif kind is OperatorKind.STIELTJES:
        entries, extras = _stieltjes_entries(regime, exps, v, w)
    else:
        phi, psi = hardy_weights(kind, exps, v, w)
        direction = 'forward' if kind is OperatorKind.HARDY else 'dual'
        entries = hardy_criteria(exps, phi, psi, regime.interval, direction)
        extras = {}
    return CriterionSet(regime=regime, entries=entries, constants=branch_constants, extras=extras)
