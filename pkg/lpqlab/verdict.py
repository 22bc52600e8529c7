"""
Boundedness and compactness verdicts.

A verdict is three-valued. Every Yes or No carries at least one evidence
record whose direction licenses it; anything the criteria cannot settle stays
Inconclusive and is never upgraded.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from typing import Dict, List, Optional, Tuple

from lpqlab.criteria import CriterionCurve, CriterionSet, Entry
from lpqlab.errors import IncompleteCriteria
from lpqlab.params import INF, Branch, Direction, OperatorKind
from lpqlab.quadrature import LimitKind

logger = logging.getLogger(__name__)


class Answer(enum.Enum):
    YES = 'yes'
    NO = 'no'
    INCONCLUSIVE = 'inconclusive'


@dataclasses.dataclass(frozen=True)
class Evidence:
    tag: str
    # 'finite', 'infinite', 'undetermined' or 'limit <kind> at <endpoint>'
    observation: str
    value: Optional[float]
    branch: Branch
    direction: Optional[Direction]
    question: str  # 'bounded' or 'compact'
    note: str = ''


@dataclasses.dataclass(frozen=True)
class Verdict:
    bounded: Answer
    compact: Answer
    evidence: Tuple[Evidence, ...] = ()

    def cited(self, question: str) -> Tuple[Evidence, ...]:
        return tuple(e for e in self.evidence if e.question == question)


def _status(entry: Entry) -> str:
    value = entry.value
    if value is None or math.isnan(value):
        return 'undetermined'
    return 'finite' if math.isfinite(value) else 'infinite'


def _entry(cs: CriterionSet, tag: str) -> Entry:
    try:
        return cs.entries[tag]
    except KeyError:
        raise IncompleteCriteria(
            f'{cs.regime.branch.value} needs criterion {tag!r}; '
            f'have {sorted(cs.entries)}'
        ) from None


def _check_complete(cs: CriterionSet):
    for tag in cs.regime.tags:
        _entry(cs, tag)


def _groups(cs: CriterionSet, tags: List[str]) -> List[List[str]]:
    """
    Tags whose finiteness together licenses a conclusion. Laplace bounds are
    sums over all sufficient tags; elsewhere a criterion and its starred dual
    are summed and distinct criteria are alternatives.
    """
    if not tags:
        return []
    if cs.regime.kind is OperatorKind.LAPLACE:
        return [tags]
    grouped: Dict[str, List[str]] = {}
    for tag in tags:
        grouped.setdefault(tag.replace('*', ''), []).append(tag)
    return list(grouped.values())


def _record(cs: CriterionSet, tag: str, direction, question: str, note: str = '') -> Evidence:
    entry = _entry(cs, tag)
    return Evidence(
        tag=tag,
        observation=_status(entry),
        value=entry.value,
        branch=cs.regime.branch,
        direction=direction,
        question=question,
        note=note,
    )


def _decide(
    cs: CriterionSet, question: str
) -> Tuple[Answer, List[Evidence], List[Evidence], List[Evidence]]:
    """
    (answer, yes evidence, no evidence, gap evidence) from finiteness alone
    for the roles the regime assigns to ``question``.
    """
    roles = [
        (role.tag, getattr(role, question))
        for role in cs.regime.roles
        if getattr(role, question) is not None
    ]
    no: List[Evidence] = []
    gap: List[Evidence] = []
    for tag, direction in roles:
        if direction in (Direction.EQUIVALENT, Direction.NECESSARY):
            if _status(_entry(cs, tag)) == 'infinite':
                no.append(_record(cs, tag, direction, question))
        elif _status(_entry(cs, tag)) == 'infinite':
            gap.append(
                _record(cs, tag, direction, question, note='sufficient criterion infinite')
            )
    sufficient = [
        tag for tag, direction in roles if direction in (Direction.EQUIVALENT, Direction.SUFFICIENT)
    ]
    yes: List[Evidence] = []
    for group in _groups(cs, sufficient):
        if all(_status(_entry(cs, tag)) == 'finite' for tag in group):
            yes = [
                _record(cs, tag, getattr(cs.regime.role(tag), question), question)
                for tag in group
            ]
            break
    if no and yes:
        logger.warning(
            '%s: criteria disagree on %s (%s finite, %s infinite)',
            cs.regime.branch.value,
            question,
            '+'.join(e.tag for e in yes),
            '+'.join(e.tag for e in no),
        )
        return Answer.INCONCLUSIVE, yes, no, gap
    if no:
        return Answer.NO, yes, no, gap
    if yes:
        return Answer.YES, yes, no, gap
    return Answer.INCONCLUSIVE, yes, no, gap


def boundedness_verdict(cs: CriterionSet) -> Verdict:
    """
    Yes when an equivalent or sufficient criterion group is finite, No when
    a necessary one is infinite; compactness is left Inconclusive.
    """
    _check_complete(cs)
    answer, yes, no, gap = _decide(cs, 'bounded')
    evidence = no if answer is Answer.NO else yes if answer is Answer.YES else yes + no + gap
    logger.info('%s: bounded %s', cs.regime.branch.value, answer.value)
    return Verdict(bounded=answer, compact=Answer.INCONCLUSIVE, evidence=tuple(evidence))


def _endpoint_label(endpoint: float) -> str:
    return 'inf' if endpoint == INF else repr(endpoint)


def _limit_evidence(cs: CriterionSet) -> Tuple[List[Evidence], List[Evidence], List[Evidence]]:
    """(zero limits, violating limits, undecided limits) over the regime's limit tags"""
    zero: List[Evidence] = []
    bad: List[Evidence] = []
    undecided: List[Evidence] = []
    for tag in cs.regime.limits:
        entry = _entry(cs, tag)
        if not isinstance(entry, CriterionCurve):
            raise IncompleteCriteria(f'{tag!r} carries no limit verdicts')
        present = [
            (endpoint, verdict)
            for endpoint, verdict in zip(entry.endpoints, entry.limits)
            if verdict is not None
        ]
        if not present:
            raise IncompleteCriteria(f'{tag!r} carries no limit verdicts')
        for endpoint, verdict in present:
            record = Evidence(
                tag=tag,
                observation=f'limit {verdict.kind.value} at {_endpoint_label(endpoint)}',
                value=verdict.value,
                branch=cs.regime.branch,
                direction=Direction.NECESSARY,
                question='compact',
            )
            if verdict.kind is LimitKind.ZERO:
                zero.append(record)
            elif verdict.kind is LimitKind.INCONCLUSIVE:
                undecided.append(record)
            else:
                bad.append(record)
    return zero, bad, undecided


def _laplace_l1_linf(cs: CriterionSet) -> Optional[Tuple[Answer, Evidence]]:
    regime = cs.regime
    if regime.branch is not Branch.LAPLACE_EXT or regime.role('C_inf') is None:
        return None
    entry = _entry(cs, 'C_inf')
    if entry.value == 0:
        note = 'zero operator'
        answer = Answer.YES
    else:
        note = 'L^1 -> L^inf is not compact for a nonzero weight'
        answer = Answer.NO
    record = Evidence('C_inf', _status(entry), entry.value, regime.branch, None, 'compact', note)
    return answer, record


def compactness_verdict(cs: CriterionSet) -> Verdict:
    """
    Full verdict: finiteness of the compactness criteria combined with the
    endpoint limits the branch requires, closed under
    compact Yes => bounded Yes and bounded No => compact No.
    """
    bounded = boundedness_verdict(cs)
    evidence = list(bounded.evidence)
    compact = Answer.INCONCLUSIVE

    corner = _laplace_l1_linf(cs)
    has_role = any(role.compact is not None for role in cs.regime.roles)
    if corner is not None:
        compact, record = corner
        evidence.append(record)
    elif has_role:
        answer, yes, no, gap = _decide(cs, 'compact')
        zero, bad, undecided = _limit_evidence(cs)
        if answer is Answer.NO or bad:
            compact = Answer.NO
            evidence += no + bad
        elif answer is Answer.YES and not undecided:
            compact = Answer.YES
            evidence += yes + zero
        else:
            evidence += yes + gap + undecided
    else:
        logger.info('%s: no compactness criterion on this branch', cs.regime.branch.value)

    bounded_answer = bounded.bounded
    if bounded_answer is Answer.NO and compact is not Answer.NO:
        compact = Answer.NO
    if compact is Answer.YES and bounded_answer is not Answer.YES:
        bounded_answer = Answer.YES
        evidence.append(
            Evidence(
                tag='compact',
                observation='compact operators are bounded',
                value=None,
                branch=cs.regime.branch,
                direction=Direction.SUFFICIENT,
                question='bounded',
            )
        )
    logger.info(
        '%s: bounded %s, compact %s',
        cs.regime.branch.value,
        bounded_answer.value,
        compact.value,
    )
    return Verdict(bounded=bounded_answer, compact=compact, evidence=tuple(evidence))

