"""
Exponent bookkeeping and dispatch of (p, q, operator) to a theorem branch.

Infinite exponents are represented by ``math.inf`` and every comparison used
for dispatch is exact.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Optional, Tuple

from lpqlab.errors import BranchMismatch, ParameterDomainError

INF = math.inf


def conjugate(p: float) -> float:
    """p' = p/(p-1), with 1' = inf and inf' = 1"""
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def reciprocal(x: Optional[float]) -> float:
    if x is None:
        raise ValueError('reciprocal of an absent exponent')
    return 0.0 if x == INF else 1 / x


@dataclasses.dataclass(frozen=True)
class Exponents:
    lam: float
    p: float
    q: float
    p_conj: float
    q_conj: Optional[float]
    r: Optional[float]

    @property
    def inv_q_conj(self) -> float:
        """1/q' = 1 - 1/q, also meaningful (negative) when q < 1"""
        return 1 - reciprocal(self.q)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.lam, self.p, self.q)


def derive(lam: float, p: float, q: float) -> Exponents:
    ParameterDomainError.check(lam, p, q)
    lam, p, q = float(lam), float(p), float(q)
    if q == INF:
        q_conj: Optional[float] = 1.0
    elif q > 1:
        q_conj = q / (q - 1)
    else:
        q_conj = None
    r = p * q / (p - q) if q < p < INF else None
    return Exponents(lam=lam, p=p, q=q, p_conj=conjugate(p), q_conj=q_conj, r=r)


class OperatorKind(enum.Enum):
    LAPLACE = 'laplace'
    STIELTJES = 'stieltjes'
    HARDY = 'hardy'
    HARDY_DUAL = 'hardy_dual'


class Branch(enum.Enum):
    LAPLACE_I = 'laplace-i'
    LAPLACE_II = 'laplace-ii'
    LAPLACE_III = 'laplace-iii'
    LAPLACE_IV = 'laplace-iv'
    LAPLACE_V = 'laplace-v'
    LAPLACE_EXT = 'laplace-ext'
    STIELTJES_I = 'stieltjes-i'
    STIELTJES_II = 'stieltjes-ii'
    STIELTJES_III = 'stieltjes-iii'
    STIELTJES_IV = 'stieltjes-iv'
    STIELTJES_EXT = 'stieltjes-ext'
    HARDY_I = 'hardy-i'
    HARDY_II = 'hardy-ii'
    HARDY_III = 'hardy-iii'
    HARDY_IV = 'hardy-iv'
    HARDY_EXT = 'hardy-ext'


class Direction(enum.Enum):
    NECESSARY = 'necessary'
    SUFFICIENT = 'sufficient'
    EQUIVALENT = 'equivalent'


EQ = Direction.EQUIVALENT
NEC = Direction.NECESSARY
SUF = Direction.SUFFICIENT


@dataclasses.dataclass(frozen=True)
class Role:
    tag: str
    bounded: Optional[Direction]
    compact: Optional[Direction]


@dataclasses.dataclass(frozen=True)
class Regime:
    kind: OperatorKind
    branch: Branch
    roles: Tuple[Role, ...]
    # tags whose recorded limits must all be Zero for a compactness Yes
    limits: Tuple[str, ...] = ()
    interval: Tuple[float, float] = (0.0, INF)

    @property
    def tags(self) -> Tuple[str, ...]:
        return tuple(role.tag for role in self.roles) + tuple(
            tag for tag in self.limits if tag not in {role.tag for role in self.roles}
        )

    def role(self, tag: str) -> Optional[Role]:
        for role in self.roles:
            if role.tag == tag:
                return role
        return None

    @property
    def is_full_axis(self) -> bool:
        return self.interval == (0.0, INF)


def dual_tag(tag: str, kind: OperatorKind) -> str:
    """Hardy criteria carry a star on the dual side: B_q<1 -> B*_q<1"""
    if kind is not OperatorKind.HARDY_DUAL or tag == 'N':
        return tag
    head, sep, tail = tag.partition('_')
    return f'{head}*{sep}{tail}'


def _laplace_branch(p: float, q: float) -> Branch:
    if p == INF or q == INF:
        return Branch.LAPLACE_EXT
    if p == 1:
        return Branch.LAPLACE_IV if q < 1 else Branch.LAPLACE_V
    if p <= q:
        return Branch.LAPLACE_I
    if q >= 1:
        return Branch.LAPLACE_II
    return Branch.LAPLACE_III


_GENERIC = {
    OperatorKind.STIELTJES: (
        Branch.STIELTJES_I,
        Branch.STIELTJES_II,
        Branch.STIELTJES_III,
        Branch.STIELTJES_IV,
        Branch.STIELTJES_EXT,
    ),
    OperatorKind.HARDY: (
        Branch.HARDY_I,
        Branch.HARDY_II,
        Branch.HARDY_III,
        Branch.HARDY_IV,
        Branch.HARDY_EXT,
    ),
}
_GENERIC[OperatorKind.HARDY_DUAL] = _GENERIC[OperatorKind.HARDY]


def _generic_branch(kind: OperatorKind, p: float, q: float) -> Branch:
    i, ii, iii, iv, ext = _GENERIC[kind]
    if p == INF or q == INF:
        return ext
    if p == 1:
        return iii if q < 1 else iv
    return i if p <= q else ii


def branch_of(kind: OperatorKind, p: float, q: float) -> Branch:
    if kind is OperatorKind.LAPLACE:
        return _laplace_branch(p, q)
    return _generic_branch(kind, p, q)


def laplace_corner(exps: Exponents) -> str:
    """Criterion tag deciding the p = inf or q = inf Laplace corner"""
    p, q = exps.p, exps.q
    if p == INF and q == INF:
        return 'C_1'
    if q == INF:
        return 'C_inf' if p == 1 else "C_p'"
    if q == 1:
        return 'C_q=1'
    return 'C_q>1'


def _laplace_roles(branch: Branch, exps: Exponents, finite_right: bool):
    with_d = (Role('D', EQ, EQ),) if finite_right else ()
    suf_d = (Role('D', SUF, SUF),) if finite_right else ()
    if branch is Branch.LAPLACE_I:
        return (Role('A_L', EQ, EQ),) + with_d, ('A_L',)
    if branch is Branch.LAPLACE_II:
        if exps.q == 1:
            return (Role('B_p', EQ, EQ),), ()
        return (Role('B_L', EQ, EQ),) + with_d, ()
    if branch is Branch.LAPLACE_III:
        return (Role('B_L', SUF, SUF), Role('B_q_norm', NEC, NEC)) + suf_d, ()
    if branch is Branch.LAPLACE_IV:
        return (Role("B_q'", SUF, SUF), Role('B_q', NEC, NEC)) + suf_d, ()
    if branch is Branch.LAPLACE_V:
        return (Role('B_q', EQ, None), Role('Bbar_q', None, EQ)), ('Bbar_q',)
    corner = laplace_corner(exps)
    if exps.p == INF and exps.q < 1:
        return (Role('C_q>1', SUF, SUF), Role('C_q<1', NEC, NEC)), ()
    if corner == 'C_inf':
        # L^1 -> L^inf is never compact for a nonzero weight
        return (Role('C_inf', EQ, None),), ()
    return (Role(corner, EQ, EQ),), ()


def _stieltjes_roles(branch: Branch, exps: Exponents):
    if branch is Branch.STIELTJES_I:
        return (
            Role('A_S', EQ, None),
            Role('A_H', EQ, EQ),
            Role('A_H*', EQ, EQ),
        ), ('A_H', 'A_H*')
    if branch is Branch.STIELTJES_II:
        if exps.q == 1:
            return (Role('Lambda', EQ, EQ),), ()
        roles = (Role('B_H', EQ, EQ), Role('B_H*', EQ, EQ))
        if exps.q > 1:
            roles += (Role('B_S', EQ, None),)
        return roles, ()
    if branch is Branch.STIELTJES_III:
        return (Role('B_1H', EQ, EQ), Role('B_1H*', EQ, EQ)), ()
    if branch is Branch.STIELTJES_IV:
        return (
            Role('S_H', EQ, EQ),
            Role('S_H*', EQ, EQ),
            Role('A_1S', EQ, None),
        ), ('S_a', 'S_b')
    return (Role('N', EQ, None),), ()


def _hardy_roles(kind: OperatorKind, branch: Branch):
    def tag(name):
        return dual_tag(name, kind)

    if branch is Branch.HARDY_I:
        return (Role(tag('A'), EQ, EQ),), (tag('A'),)
    if branch is Branch.HARDY_II:
        # q <= 1 < p: bounded regular operators are compact
        return (Role(tag('B'), EQ, EQ),), ()
    if branch is Branch.HARDY_III:
        return (Role(tag('B_q<1'), EQ, None),), ()
    if branch is Branch.HARDY_IV:
        return (Role(tag('B_1<=q'), EQ, None),), ()
    return (Role('N', EQ, None),), ()


def classify(
    exps: Exponents,
    kind: OperatorKind,
    interval: Tuple[float, float] = (0.0, INF),
) -> Regime:
    branch = branch_of(kind, exps.p, exps.q)
    c1, c2 = float(interval[0]), float(interval[1])
    if kind is OperatorKind.LAPLACE:
        roles, limits = _laplace_roles(branch, exps, c2 < INF)
    elif kind is OperatorKind.STIELTJES:
        roles, limits = _stieltjes_roles(branch, exps)
    else:
        roles, limits = _hardy_roles(kind, branch)
    return Regime(kind=kind, branch=branch, roles=roles, limits=limits, interval=(c1, c2))


@dataclasses.dataclass(frozen=True)
class BranchConstants:
    branch: Branch
    # norm >= sum(coef * value) over ``lower``; norm <= sum(coef * value) over ``upper``
    lower: Tuple[Tuple[str, float], ...] = ()
    upper: Tuple[Tuple[str, float], ...] = ()
    alpha_q: Optional[float] = None
    beta_q: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    laplace_l1_lower: Optional[float] = None
    laplace_l1_upper: Optional[float] = None
    gamma_s: Optional[float] = None
    specified: bool = True
    exact: bool = False


def alpha_beta_q(q: float) -> Tuple[float, float]:
    """(alpha^q, beta^q) for 1 < q < inf"""
    if not 1 < q < INF:
        raise BranchMismatch(f'alpha/beta are defined for 1 < q < inf, got q={q}')
    alpha_q = min(2.0, 2.0 ** (q - 1))
    beta_q = 2 / (q - 1) if q <= 2 else 2.0 ** (q - 1)
    return alpha_q, beta_q


def _weighted(tags: Tuple[str, ...], coef: float) -> Tuple[Tuple[str, float], ...]:
    return tuple((tag, coef) for tag in tags)


def _laplace_constants(regime: Regime, exps: Exponents) -> BranchConstants:
    lam, p, q = exps.lam, exps.p, exps.q
    branch = regime.branch
    d = ('D',) if regime.role('D') else ()
    if branch is Branch.LAPLACE_I:
        a_q, b_q = alpha_beta_q(q)
        alpha, beta = a_q ** (1 / q), b_q ** (1 / q)
        a1 = alpha * q ** (-2 / q)
        b1 = beta * exps.q_conj ** reciprocal(exps.p_conj)
        return BranchConstants(
            branch=branch,
            lower=_weighted(('A_L',) + d, a1),
            upper=_weighted(('A_L',) + d, b1),
            alpha_q=a_q,
            beta_q=b_q,
            alpha=a1,
            beta=b1,
        )
    if branch is Branch.LAPLACE_II:
        if q == 1:
            return BranchConstants(
                branch=branch,
                lower=(('B_p', 1.0),),
                upper=(('B_p', 1.0),),
                alpha=1.0,
                beta=1.0,
                exact=True,
            )
        a_q, b_q = alpha_beta_q(q)
        alpha, beta = a_q ** (1 / q), b_q ** (1 / q)
        a2 = alpha * (exps.p_conj * q / exps.r) ** exps.inv_q_conj * q ** (-1 / q)
        b2 = beta * exps.p_conj**exps.inv_q_conj
        return BranchConstants(
            branch=branch,
            lower=_weighted(('B_L',) + d, a2),
            upper=_weighted(('B_L',) + d, b2),
            alpha_q=a_q,
            beta_q=b_q,
            alpha=a2,
            beta=b2,
        )
    if branch is Branch.LAPLACE_III:
        r = exps.r
        a3 = q ** (-1 / q)
        b3 = p ** (1 / p) * exps.p_conj**exps.inv_q_conj * q ** (-2 / q) * r ** (1 / r)
        return BranchConstants(
            branch=branch,
            lower=(('B_q_norm', a3),),
            upper=_weighted(('B_L',) + d, b3),
            alpha=a3,
            beta=b3,
        )
    if branch is Branch.LAPLACE_IV:
        a4 = q ** (-1 / q)
        b4 = lam ** ((1 - q) / q) * q ** (-2 / q) * (1 - q) ** (-(1 - q) / q)
        return BranchConstants(
            branch=branch,
            lower=(('B_q', a4),),
            upper=(("B_q'", b4),) + _weighted(d, q ** (-2 / q)),
            alpha=a4,
            beta=b4,
        )
    if branch is Branch.LAPLACE_V:
        exact = q ** (-1 / q)
        l1 = (2.0**-lam, 1.0) if q == 1 else (None, None)
        return BranchConstants(
            branch=branch,
            lower=(('B_q', exact),),
            upper=(('B_q', exact),),
            alpha=exact,
            beta=exact,
            laplace_l1_lower=l1[0],
            laplace_l1_upper=l1[1],
            exact=True,
        )
    corner = laplace_corner(exps)
    if corner in {'C_1', 'C_q=1', 'C_inf', "C_p'"}:
        return BranchConstants(
            branch=branch,
            lower=((corner, 1.0),),
            upper=((corner, 1.0),),
            alpha=1.0,
            beta=1.0,
            exact=True,
        )
    return BranchConstants(branch=branch, specified=False)


def constants(regime: Regime, exps: Exponents) -> BranchConstants:
    expected = branch_of(regime.kind, exps.p, exps.q)
    if expected is not regime.branch:
        raise BranchMismatch(
            f'constants for {regime.branch.value} requested with exponents of {expected.value}'
        )
    if regime.kind is OperatorKind.LAPLACE:
        return _laplace_constants(regime, exps)
    if regime.branch is Branch.STIELTJES_II and exps.q == 1:
        return BranchConstants(
            branch=regime.branch,
            lower=(('Lambda', 1.0),),
            upper=(('Lambda', 1.0),),
            alpha=1.0,
            beta=1.0,
            exact=True,
        )
    if regime.branch in {Branch.STIELTJES_EXT, Branch.HARDY_EXT}:
        return BranchConstants(
            branch=regime.branch,
            lower=(('N', 1.0),),
            upper=(('N', 1.0),),
            alpha=1.0,
            beta=1.0,
            exact=True,
        )
    # equivalence constants are not known on these branches
    return BranchConstants(branch=regime.branch, specified=False)
