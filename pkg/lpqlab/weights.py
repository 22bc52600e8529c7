"""
Weight functions on (0, inf).

A weight is a finite list of pieces ``c * t**a * log(1 + t)**l`` on closed
intervals ``[lo, hi]``; the weight vanishes outside all pieces. Tabulated
weights are converted to power-law pieces between consecutive samples.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from lpqlab import quadrature
from lpqlab.errors import ConfigError, WeightError

logger = logging.getLogger(__name__)

INF = math.inf


@dataclasses.dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    c: float
    a: float = 0.0
    l: float = 0.0  # noqa: E741

    def __post_init__(self):
        if not (0 <= self.lo < self.hi <= INF):
            raise WeightError(f'invalid piece interval [{self.lo}, {self.hi}]')
        if not self.c >= 0 or math.isinf(self.c):
            raise WeightError(f'piece coefficient must be finite and non-negative, got {self.c}')

    def raw(self, t):
        """The piece formula without the interval restriction"""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            value = self.c * np.power(t, self.a)
            if self.l:
                value = value * np.power(np.log1p(t), self.l)
        return value

    def power(self, s: float, m: float = 0.0) -> Piece:
        """The piece of v**s * t**m"""
        return Piece(self.lo, self.hi, self.c**s, self.a * s + m, self.l * s)

    def limit_at(self, endpoint: float) -> float:
        """Limit of the piece formula at 0 or inf"""
        if endpoint == 0:
            exponent = self.a + self.l
            if exponent > 0:
                return 0.0
            return self.c if exponent == 0 else INF
        if self.a != 0:
            return INF if self.a > 0 else 0.0
        if self.l != 0:
            return INF if self.l > 0 else 0.0
        return self.c

    def value_at(self, t: float) -> float:
        if t == 0 or t == INF:
            return self.limit_at(t)
        return float(self.raw(t))


@dataclasses.dataclass(frozen=True)
class Weight:
    pieces: Tuple[Piece, ...]
    table: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        for left, right in zip(self.pieces, self.pieces[1:]):
            if right.lo < left.hi:
                raise WeightError(
                    f'pieces [{left.lo}, {left.hi}] and [{right.lo}, {right.hi}] overlap'
                )

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise WeightError('weights are evaluated at t > 0 only')
        out = np.zeros_like(t)
        # left piece wins at a shared breakpoint
        for piece in reversed(self.pieces):
            mask = (t >= piece.lo) & (t <= piece.hi)
            if np.any(mask):
                out = np.where(mask, piece.raw(t), out)
        return out

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    def breakpoints(self) -> Tuple[float, ...]:
        points = set()
        for piece in self.pieces:
            points.update((piece.lo, piece.hi))
        return tuple(sorted(x for x in points if 0 < x < INF))

    def scaled(self, c: float) -> Weight:
        if c < 0:
            raise WeightError(f'scale factor must be non-negative, got {c}')
        if c == 0:
            return zero()
        return Weight(
            tuple(dataclasses.replace(piece, c=piece.c * c) for piece in self.pieces),
        )

    def times_power(self, m: float) -> Weight:
        return Weight(
            tuple(dataclasses.replace(piece, a=piece.a + m) for piece in self.pieces),
        )

    def powered(self, s: float, m: float = 0.0) -> Weight:
        return Weight(tuple(piece.power(s, m) for piece in self.pieces))

    def restricted(self, c1: float, c2: float) -> Weight:
        """The weight multiplied by the indicator of [c1, c2]"""
        pieces = []
        for piece in self.pieces:
            lo, hi = max(piece.lo, c1), min(piece.hi, c2)
            if lo < hi:
                pieces.append(dataclasses.replace(piece, lo=lo, hi=hi))
        return Weight(tuple(pieces))

    def describe(self) -> str:
        if self.table is not None:
            return f'table[{len(self.table)}]'
        if not self.pieces:
            return '0'
        return ' + '.join(
            f'{p.c:g}*t^{p.a:g}'
            + (f'*log1p(t)^{p.l:g}' if p.l else '')
            + f' on [{p.lo:g}, {p.hi:g}]'
            for p in self.pieces
        )


def piecewise(pieces: Iterable[Piece]) -> Weight:
    kept = sorted((piece for piece in pieces if piece.c > 0), key=lambda piece: piece.lo)
    return Weight(tuple(kept))


def constant(c: float = 1.0) -> Weight:
    return piecewise([Piece(0.0, INF, c)])


def zero() -> Weight:
    return Weight(())


def indicator(lo: float, hi: float, c: float = 1.0) -> Weight:
    return piecewise([Piece(lo, hi, c)])


def power(a: float, c: float = 1.0, l: float = 0.0) -> Weight:  # noqa: E741
    return piecewise([Piece(0.0, INF, c, a, l)])


def tabulated(samples: Sequence[Tuple[float, float]]) -> Weight:
    """Power-law interpolation between samples, zero outside the table"""
    samples = [(float(t), float(v)) for t, v in samples]
    if not samples:
        raise WeightError('empty weight table')
    ts = [t for t, _ in samples]
    if ts[0] <= 0 or any(b <= a for a, b in zip(ts, ts[1:])):
        raise WeightError('table abscissae must be positive and strictly increasing')
    if any(v < 0 or not math.isfinite(v) for _, v in samples):
        raise WeightError('table values must be finite and non-negative')
    pieces: List[Piece] = []
    if len(samples) == 1:
        t, v = samples[0]
        logger.warning('single-sample table at t=%g is zero almost everywhere', t)
    for (t0, v0), (t1, v1) in zip(samples, samples[1:]):
        if v0 == 0 or v1 == 0:
            continue
        a = math.log(v1 / v0) / math.log(t1 / t0)
        pieces.append(Piece(t0, t1, v0 / t0**a, a))
    return Weight(tuple(pieces), table=tuple(samples))


def random_piecewise(
    rng: np.random.Generator,
    span: Tuple[float, float] = (0.1, 10.0),
    max_pieces: int = 3,
    exponents: Tuple[float, float] = (-1.0, 1.0),
) -> Weight:
    """
    Up to ``max_pieces`` power pieces c t^a inside ``span``, with gaps.

    Breakpoints are drawn from 4 * max_pieces equal slots in log t, so no
    piece is narrower than one slot.
    """
    slots = np.linspace(*np.log10(span), 4 * max_pieces + 1)
    count = int(rng.integers(1, max_pieces + 1))
    edges = 10.0 ** np.sort(rng.choice(slots, size=count + 1, replace=False))
    pieces = []
    for k, (lo, hi) in enumerate(zip(edges, edges[1:])):
        if k and rng.random() < 0.25:
            continue
        c, a = rng.uniform(0.5, 2.0), rng.uniform(*exponents)
        pieces.append(Piece(float(lo), float(hi), float(c), float(a)))
    return piecewise(pieces)


def evaluate(wt: Weight, t: float) -> float:
    if not t > 0:
        raise WeightError(f'weights are evaluated at t > 0 only, got {t}')
    return float(wt(np.array([t]))[0])


def _critical_point(piece: Piece) -> Optional[float]:
    """Interior stationary point of t**a * log1p(t)**l, if any"""
    if piece.l == 0 or piece.a == 0:
        return None
    target = -piece.a / piece.l
    # s / ((1 + s) log1p(s)) decreases from 1 at 0 to 0 at inf
    if not 0 < target < 1:
        return None

    def h(u):
        s = math.exp(u)
        return s / ((1 + s) * math.log1p(s)) - target

    lo, hi = -40.0, 40.0
    if h(lo) * h(hi) > 0:
        return None
    return math.exp(scipy.optimize.brentq(h, lo, hi, xtol=1e-14))


def _piece_sup(piece: Piece, x0: float, x1: float) -> float:
    candidates = [piece.value_at(x0), piece.value_at(x1)]
    if piece.l == 0:
        return max(candidates)
    s = _critical_point(piece)
    if s is not None and x0 < s < x1:
        candidates.append(piece.value_at(s))
    return max(candidates)


def running_sup(wt: Weight, lo: float, hi: float) -> float:
    """
    Essential supremum of the weight over the open interval (lo, hi).

    v̄_{c1}(t) is ``running_sup(wt, c1, t)`` and the dual envelope over
    (t, c2) is ``running_sup(wt, t, c2)``.
    """
    if not (0 <= lo < hi <= INF):
        raise WeightError(f'empty interval ({lo}, {hi})')
    best = 0.0
    for piece in wt.pieces:
        x0, x1 = max(piece.lo, lo), min(piece.hi, hi)
        if x0 < x1:
            best = max(best, _piece_sup(piece, x0, x1))
            if best == INF:
                break
    return best


def running_sup_function(wt: Weight, anchor: float, direction: str) -> Callable:
    """t -> sup over (anchor, t) ('right') or over (t, anchor) ('left'), vectorized"""

    def fn(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        for i, x in enumerate(t):
            lo, hi = (anchor, x) if direction == 'right' else (x, anchor)
            out[i] = running_sup(wt, lo, hi) if lo < hi else 0.0
        return out

    return fn


@dataclasses.dataclass(frozen=True)
class MomentValue:
    value: float
    abs_error: Optional[float] = 0.0
    divergent_at: Optional[float] = None

    @property
    def finite(self) -> bool:
        return self.divergent_at is None

    @classmethod
    def divergent(cls, endpoint: float) -> MomentValue:
        return cls(value=INF, abs_error=None, divergent_at=endpoint)


def _power_antiderivative(c: float, e: float, x0: float, x1: float) -> MomentValue:
    """c * integral of t**e over [x0, x1]"""
    k = e + 1
    if x0 == 0 and k <= 0:
        return MomentValue.divergent(0.0)
    if x1 == INF and k >= 0:
        return MomentValue.divergent(INF)
    if k == 0:
        return MomentValue(c * math.log(x1 / x0))
    if x0 == 0:
        return MomentValue(c * x1**k / k)
    if x1 == INF:
        return MomentValue(-c * x0**k / k)
    # x0**k * expm1(k log(x1/x0)) / k stays accurate when x1 ~ x0
    log_ratio = math.log(x1 / x0)
    with np.errstate(over='ignore'):
        value = c * math.exp(k * math.log(x0)) * math.expm1(k * log_ratio) / k
    return MomentValue(value)


def _log_piece_diverges(piece: Piece, x0: float, x1: float) -> Optional[float]:
    if x0 == 0 and piece.a + piece.l <= -1:
        return 0.0
    if x1 == INF and (piece.a > -1 or (piece.a == -1 and piece.l >= -1)):
        return INF
    return None


def _piece_moment(piece: Piece, x0: float, x1: float, rel_tol: float) -> MomentValue:
    if piece.l == 0:
        return _power_antiderivative(piece.c, piece.a, x0, x1)
    endpoint = _log_piece_diverges(piece, x0, x1)
    if endpoint is not None:
        return MomentValue.divergent(endpoint)
    result = quadrature.integrate(piece.raw, (x0, x1), rel_tol=rel_tol)
    if math.isinf(result.value):
        return MomentValue.divergent(result.divergent_at)
    return MomentValue(result.value, result.abs_error)


def moment_integral(
    wt: Weight,
    s: float,
    m: float,
    interval: Tuple[float, float],
    rel_tol: float = quadrature.REL_TOL,
) -> MomentValue:
    """Integral of v(t)**s * t**m over the interval"""
    c1, c2 = interval
    if s <= 0:
        raise WeightError(f'moment power must be positive, got {s}')
    if not (0 <= c1 < c2 <= INF):
        raise WeightError(f'degenerate moment interval ({c1}, {c2})')
    total, error = 0.0, 0.0
    for piece in wt.pieces:
        x0, x1 = max(piece.lo, c1), min(piece.hi, c2)
        if x0 >= x1:
            continue
        part = _piece_moment(piece.power(s, m), x0, x1, rel_tol)
        if not part.finite:
            return part
        total += part.value
        error += part.abs_error
    return MomentValue(total, error)


def cumulative(wt: Weight, s: float, m: float, anchor: float, direction: str) -> Callable:
    """
    Vectorized t -> integral of v**s t**m over (anchor, t) ('right')
    or over (t, anchor) ('left'); divergent values come back as inf.
    """
    pieces = [piece.power(s, m) for piece in wt.pieces]
    closed = all(piece.l == 0 for piece in pieces)

    def bounds(t):
        return (anchor, t) if direction == 'right' else (t, anchor)

    def fn(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        if closed:
            for piece in pieces:
                out += _vector_power_integral(piece, t, anchor, direction)
            return out
        for i, x in enumerate(t):
            lo, hi = bounds(x)
            if lo < hi:
                out[i] = moment_integral(wt, s, m, (lo, hi)).value
        return out

    return fn


def _vector_power_integral(piece: Piece, t: np.ndarray, anchor: float, direction: str):
    if direction == 'right':
        x0 = np.full_like(t, max(piece.lo, anchor))
        x1 = np.minimum(piece.hi, t)
    else:
        x0 = np.maximum(piece.lo, t)
        x1 = np.full_like(t, min(piece.hi, anchor))
    active = x1 > x0
    out = np.zeros_like(t)
    if not np.any(active):
        return out
    k = piece.a + 1
    a0, a1 = x0[active], x1[active]
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        if k == 0:
            vals = piece.c * (np.log(a1) - np.log(a0))
        else:
            vals = piece.c * (np.power(a1, k) - np.power(a0, k)) / k
        if k <= 0:
            vals = np.where(a0 == 0, INF, vals)
        if k >= 0:
            vals = np.where(a1 == INF, INF, vals)
        if k < 0:
            vals = np.where((a1 == INF) & (a0 > 0), -piece.c * np.power(a0, k) / k, vals)
        if k > 0:
            vals = np.where((a0 == 0) & (a1 < INF), piece.c * np.power(a1, k) / k, vals)
    out[active] = vals
    return out


@dataclasses.dataclass(frozen=True)
class IntegrabilityReport:
    name: str
    power: float
    local: bool


def check_local_integrability(wt: Weight, s: float, name: str = 'v') -> IntegrabilityReport:
    """
    Check that the s-th power of the weight is integrable on every [0, t].

    Pieces are finite away from 0, so only the origin can fail. Divergence is
    logged and reported, never raised: criteria turn it into an infinite value.
    """
    if s == INF:
        local = running_sup(wt, 0.0, 1.0) < INF
    else:
        local = moment_integral(wt, s, 0.0, (0.0, 1.0)).finite
    if not local:
        logger.warning('%s^%g is not locally integrable at 0; criteria may diverge', name, s)
    return IntegrabilityReport(name=name, power=s, local=local)


def _number(value, path: str) -> float:
    if value == 'inf':
        return INF
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'expected a number, got {value!r}', path)
    return float(value)


_PIECE_KEYS = {'from', 'to', 'c', 'a', 'l'}


def from_literal(literal, path: str = 'v') -> Weight:
    """
    Parse a weight literal: a number (constant weight), a list of
    ``{"from", "to", "c", "a", "l"}`` pieces or ``{"table": [[t, v], ...]}``.
    """
    if isinstance(literal, (int, float)) and not isinstance(literal, bool):
        return constant(float(literal)) if literal else zero()
    if isinstance(literal, dict):
        unknown = set(literal) - {'table'}
        if unknown:
            raise ConfigError(f'unknown keys {sorted(unknown)}', path)
        rows = literal.get('table')
        if not isinstance(rows, list) or not all(
            isinstance(row, list) and len(row) == 2 for row in rows
        ):
            raise ConfigError('table must be a list of [t, v] pairs', f'{path}.table')
        try:
            return tabulated(
                [
                    (_number(t, f'{path}.table[{i}]'), _number(v, f'{path}.table[{i}]'))
                    for i, (t, v) in enumerate(rows)
                ]
            )
        except WeightError as e:
            raise ConfigError(str(e), f'{path}.table') from e
    if not isinstance(literal, list):
        raise ConfigError('weight must be a number, a list of pieces or a table', path)
    pieces = []
    for i, item in enumerate(literal):
        where = f'{path}[{i}]'
        if not isinstance(item, dict):
            raise ConfigError('piece must be an object', where)
        unknown = set(item) - _PIECE_KEYS
        if unknown:
            raise ConfigError(f'unknown keys {sorted(unknown)}', where)
        try:
            pieces.append(
                Piece(
                    lo=_number(item.get('from', 0), f'{where}.from'),
                    hi=_number(item.get('to', 'inf'), f'{where}.to'),
                    c=_number(item.get('c', 1), f'{where}.c'),
                    a=_number(item.get('a', 0), f'{where}.a'),
                    l=_number(item.get('l', 0), f'{where}.l'),
                )
            )
        except WeightError as e:
            raise ConfigError(str(e), where) from e
    try:
        return piecewise(pieces)
    except WeightError as e:
        raise ConfigError(str(e), path) from e
