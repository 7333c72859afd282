from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..namespaces import XSD
from ..rdf import IRI, Literal


@dataclass(frozen=True)
class MetricResult:
    metric_class: IRI
    value: Literal
    unit_measure: Optional[IRI] = None
    detail: Optional[str] = None


@dataclass(frozen=True)
class MetricFailure:
    """A metric that could not be computed; the rest of the job is unaffected."""

    metric_class: IRI
    reason: str


Outcome = Union[MetricResult, MetricFailure]


def ratio(metric_class: IRI, numerator: int, denominator: int, *,
          empty: float, empty_detail: str, detail: Optional[str] = None) -> MetricResult:
    if denominator == 0:
        return MetricResult(metric_class, double_literal(empty), detail=empty_detail)
    return MetricResult(metric_class, double_literal(numerator / denominator),
                        detail=detail or f"{numerator}/{denominator}")


def double_literal(x: float) -> Literal:
    return Literal(repr(float(x)), XSD.double)


def boolean_literal(flag: bool) -> Literal:
    return Literal("true" if flag else "false", XSD.boolean)
