"""Metrics computed from the quad stream alone."""

from __future__ import annotations

import re
from typing import Iterable
from urllib.parse import urlsplit

from ..namespaces import DQM, LABEL, XSD
from ..rdf import IRI, Literal, Quad
from .base import MetricResult, ratio

_TZ = r"(?:Z|[+-](?:(?:0\d|1[0-3]):[0-5]\d|14:00))?"
_DATE = r"(-?(?:[1-9]\d{3,}|0\d{3}))-(0[1-9]|1[0-2])-(0[1-9]|[12]\d|3[01])"
_PATTERNS = {
    XSD.integer: re.compile(r"[+-]?\d+"),
    XSD.decimal: re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)"),
    XSD.double: re.compile(r"(?:[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?|[+-]?INF|NaN)"),
    XSD.boolean: re.compile(r"true|false|1|0"),
    XSD.date: re.compile(_DATE + _TZ),
    XSD.dateTime: re.compile(
        _DATE + r"T(?:(?:[01]\d|2[0-3]):[0-5]\d:[0-5]\d(?:\.\d+)?|24:00:00(?:\.0+)?)" + _TZ),
}
_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def _day_exists(year: int, month: int, day: int) -> bool:
    leap = year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
    limit = 29 if month == 2 and leap else _DAYS[month - 1]
    return day <= limit


def checkable(datatype: str) -> bool:
    return IRI(datatype) in _PATTERNS


def valid_lexical(lexical: str, datatype: str) -> bool:
    """Lexical validity for the six checked XSD datatypes."""
    m = _PATTERNS[IRI(datatype)].fullmatch(lexical)
    if m is None:
        return False
    if datatype in (XSD.date.value, XSD.dateTime.value):
        return _day_exists(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    return True


_CHECKED = frozenset(i.value for i in _PATTERNS)


class DatatypeConsistency:
    """Fraction of typed literals whose lexical form is valid for the datatype."""

    metric_class = DQM.DatatypeConsistencyMetric

    def __init__(self) -> None:
        self.checked = 0
        self.valid = 0

    def add(self, quad: Quad) -> None:
        o = quad.object
        if isinstance(o, Literal) and o.datatype in _CHECKED:
            self.checked += 1
            if valid_lexical(o.lexical, o.datatype):
                self.valid += 1

    def finalize(self, ctx=None) -> MetricResult:
        return ratio(self.metric_class, self.valid, self.checked,
                     empty=1.0, empty_detail="no checkable literals")


class LabeledResourceRatio:
    """Fraction of distinct subject IRIs carrying an ``rdfs:label``."""

    metric_class = DQM.LabelledResourcesMetric

    def __init__(self) -> None:
        self.subjects: set = set()
        self.labelled: set = set()

    def add(self, quad: Quad) -> None:
        if isinstance(quad.subject, IRI):
            self.subjects.add(quad.subject)
            if quad.predicate == LABEL:
                self.labelled.add(quad.subject)

    def finalize(self, ctx=None) -> MetricResult:
        return ratio(self.metric_class, len(self.labelled), len(self.subjects),
                     empty=1.0, empty_detail="no subjects")


def authority(iri: str) -> str:
    return urlsplit(iri).netloc.lower()


class ExternalLinkageRatio:
    """Fraction of distinct object IRIs hosted outside the assessed resource's authority."""

    metric_class = DQM.ExternalLinkageMetric

    def __init__(self, computed_on: IRI) -> None:
        self.home = authority(computed_on.value)
        self.objects: set = set()

    def add(self, quad: Quad) -> None:
        if isinstance(quad.object, IRI):
            self.objects.add(quad.object.value)

    def finalize(self, ctx=None) -> MetricResult:
        external = sum(1 for o in self.objects if authority(o) != self.home)
        return ratio(self.metric_class, external, len(self.objects),
                     empty=0.0, empty_detail="no object IRIs")


def _run(metric, quads: Iterable[Quad]) -> MetricResult:
    for q in quads:
        metric.add(q)
    return metric.finalize()


def datatype_consistency(quads: Iterable[Quad]) -> MetricResult:
    return _run(DatatypeConsistency(), quads)


def labeled_resource_ratio(quads: Iterable[Quad]) -> MetricResult:
    return _run(LabeledResourceRatio(), quads)


def external_linkage_ratio(quads: Iterable[Quad], computed_on: IRI) -> MetricResult:
    return _run(ExternalLinkageRatio(computed_on), quads)
