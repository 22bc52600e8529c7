from __future__ import annotations

import math


class LPQError(Exception):
    """Base exception class for lpqlab"""


class ParameterDomainError(LPQError):
    """Exponents outside lambda > 0, p >= 1, q > 0"""

    @classmethod
    def check(cls, lam: float, p: float, q: float):
        for name, value in (('lambda', lam), ('p', p), ('q', q)):
            if not isinstance(value, (int, float)) or math.isnan(value):
                raise cls(f'{name} must be a number, got {value!r}')
        if not (0 < lam < math.inf):
            raise cls(f'lambda must be a positive finite number, got {lam}')
        if p < 1:
            raise cls(f'p must satisfy p >= 1, got {p}')
        if q <= 0:
            raise cls(f'q must satisfy q > 0, got {q}')


class BranchMismatch(LPQError):
    """Requested quantity is not defined on this branch"""


class IncompleteCriteria(LPQError):
    """Criterion set lacks an entry its branch requires"""


class WeightError(LPQError):
    """Invalid weight definition or evaluation"""


class QuadratureError(LPQError):
    """Integrand could not be evaluated"""


class SpanError(LPQError):
    """Grid span does not cover the requested points"""


class NormError(LPQError):
    """Invalid norm estimation request"""


class ConfigError(LPQError):
    """Invalid job configuration"""

    def __init__(self, message: str, path: str = ''):
        self.path = path
        super().__init__(f'{path}: {message}' if path else message)


class ExportError(LPQError):
    """Matrix cannot be written in the requested layout"""
