"""
JSON reports, CSV curve exports and the rows behind the terminal tables.

Floats are written with ``repr`` precision so every value reads back to the
same double; infinities and nans are spelled ``"inf"``, ``"-inf"`` and
``"nan"`` because JSON has no literal for them.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import json
import logging
import math
import pathlib
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Union

import numpy as np
import wcwidth

from lpqlab import fileutil
from lpqlab.criteria import CriterionCurve, Entry
from lpqlab.diagnostics import ConsistencyReport, SpectrumReport, TailDecayReport
from lpqlab.normest import BoundReport, NormEstimate
from lpqlab.params import Exponents, BranchConstants, Regime
from lpqlab.verdict import Verdict

logger = logging.getLogger(__name__)

VERSION = '0.1.0'

_SPECIAL = {'inf': math.inf, '-inf': -math.inf, 'nan': math.nan}


@dataclasses.dataclass
class Report:
    config: dict
    exponents: Exponents
    regime: Optional[Regime] = None
    constants: Optional[BranchConstants] = None
    criteria: Dict[str, Entry] = dataclasses.field(default_factory=dict)
    extras: Dict[str, Entry] = dataclasses.field(default_factory=dict)
    norm: Optional[NormEstimate] = None
    span_sensitivity: Optional[float] = None
    bounds: Optional[BoundReport] = None
    verdict: Optional[Verdict] = None
    tails: Optional[TailDecayReport] = None
    spectrum: Optional[SpectrumReport] = None
    consistency: Optional[ConsistencyReport] = None
    notes: List[str] = dataclasses.field(default_factory=list)
    exit_code: int = 0
    version: str = VERSION
    wall_clock: float = 0.0


@functools.singledispatch
def to_jsonable(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        # fields hidden from repr hold callables and large arrays
        return {
            field.name: to_jsonable(getattr(value, field.name))
            for field in dataclasses.fields(value)
            if field.repr
        }
    return value


@to_jsonable.register
def _(value: float):
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return float(value)


@to_jsonable.register
def _(value: np.generic):
    return to_jsonable(value.item())


@to_jsonable.register
def _(value: np.ndarray):
    return [to_jsonable(x) for x in value.tolist()]


@to_jsonable.register
def _(value: enum.Enum):
    return value.value


@to_jsonable.register
def _(value: dict):
    return {str(key): to_jsonable(item) for key, item in value.items()}


@to_jsonable.register(list)
@to_jsonable.register(tuple)
def _(value):
    return [to_jsonable(item) for item in value]


@to_jsonable.register
def _(value: pathlib.PurePath):
    return str(value)


def dumps(report) -> str:
    return json.dumps(to_jsonable(report), indent=2, ensure_ascii=False) + '\n'


def _revive(value):
    if isinstance(value, str) and value in _SPECIAL:
        return _SPECIAL[value]
    if isinstance(value, list):
        return [_revive(item) for item in value]
    if isinstance(value, dict):
        return {key: _revive(item) for key, item in value.items()}
    return value


def loads(text: str):
    """Parse a report back, turning the spelled-out infinities into floats"""
    return _revive(json.loads(text))


def write_report(report: Report, path: Union[str, pathlib.Path]):
    pathlib.Path(path).write_text(dumps(report), encoding='utf-8')


def write_curves(
    entries: Mapping[str, Entry], directory: Union[str, pathlib.Path]
) -> List[pathlib.Path]:
    """One ``t,value`` CSV per criterion curve, sampled on its sup grid"""
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for tag, entry in entries.items():
        if not isinstance(entry, CriterionCurve) or entry.sup.samples is None:
            continue
        ts, values = entry.sup.samples
        path = directory / fileutil.curve_filename(tag)
        np.savetxt(
            path,
            np.column_stack([ts, values]),
            delimiter=',',
            header='t,value',
            comments='',
            fmt='%.17g',
        )
        written.append(path)
    logger.info('wrote %d curve files to %s', len(written), directory)
    return written


def format_float(value: Optional[float]) -> str:
    if value is None:
        return '-'
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf'
    return f'{value:.6g}'


@dataclasses.dataclass
class Row:
    """A terminal table row; the dataclass fields are the columns, in order"""

    @classmethod
    def headers(cls) -> List[str]:
        return [field.name for field in dataclasses.fields(cls)]

    def cells(self) -> List[str]:
        return [str(getattr(self, name)) for name in self.headers()]


def _line(cells: Sequence[str], widths: Sequence[int]) -> str:
    padded = [cell + ' ' * (width - wcwidth.wcswidth(cell)) for cell, width in zip(cells, widths)]
    # the last column is never padded
    return '  '.join(padded[:-1] + [cells[-1]]) + '\n'


def render_table(rows: Sequence[Row]) -> Iterator[str]:
    """Header, rule and one line per row, columns sized by display width"""
    if not rows:
        return
    if len({type(row) for row in rows}) > 1:
        raise TypeError('the rows of a table must share one row type')
    lines = [rows[0].headers()] + [row.cells() for row in rows]
    widths = [max(map(wcwidth.wcswidth, column)) for column in zip(*lines)]
    yield _line(lines[0], widths)
    yield _line(['-' * width for width in widths], widths)
    for cells in lines[1:]:
        yield _line(cells, widths)


@dataclasses.dataclass
class CriterionRow(Row):
    criterion: str
    value: str
    argmax: str
    limits: str
    bounded: str
    compact: str


@dataclasses.dataclass
class EvidenceRow(Row):
    question: str
    criterion: str
    observation: str
    direction: str
    note: str


def _limits(entry: Entry) -> str:
    if not isinstance(entry, CriterionCurve):
        return '-'
    kinds = [verdict.kind.value if verdict is not None else '-' for verdict in entry.limits]
    return '/'.join(kinds)


def criterion_rows(regime: Regime, entries: Mapping[str, Entry]) -> List[CriterionRow]:
    rows = []
    for tag, entry in entries.items():
        role = regime.role(tag)
        rows.append(
            CriterionRow(
                criterion=tag,
                value=format_float(entry.value),
                argmax=format_float(entry.argmax),
                limits=_limits(entry),
                bounded=role.bounded.value if role and role.bounded else '-',
                compact=role.compact.value if role and role.compact else '-',
            )
        )
    return rows


def evidence_rows(verdict: Verdict) -> List[EvidenceRow]:
    return [
        EvidenceRow(
            question=e.question,
            criterion=e.tag,
            observation=e.observation,
            direction=e.direction.value if e.direction else '-',
            note=e.note or '-',
        )
        for e in verdict.evidence
    ]
