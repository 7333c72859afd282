"""Single-pass assessment: stream the dataset once through every selected metric."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Optional

from ..namespaces import DQM
from ..rdf import IRI, QuadDataset
from ..vocab import MetricDescriptor, shipped_extension
from .base import MetricFailure, MetricResult
from .networked import (
    DereferenceabilityRatio, EndpointAvailability, EndpointLatency, ProbeContext, Prober,
    RDFAvailability,
)
from .offline import DatatypeConsistency, ExternalLinkageRatio, LabeledResourceRatio
from .probe import ProbeSettings, probe_http

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricImpl:
    name: str
    metric_class: IRI
    factory: Callable  # (AssessmentJob) -> metric accumulator
    networked: bool = False


REGISTRY: dict = {}


def register(name: str, metric_class: IRI, factory: Callable, networked: bool = False) -> None:
    REGISTRY[metric_class] = MetricImpl(name, metric_class, factory, networked)


register("datatype_consistency", DQM.DatatypeConsistencyMetric, lambda job: DatatypeConsistency())
register("labeled_resource_ratio", DQM.LabelledResourcesMetric, lambda job: LabeledResourceRatio())
register("external_linkage_ratio", DQM.ExternalLinkageMetric,
         lambda job: ExternalLinkageRatio(job.computed_on))
register("rdf_availability", DQM.RDFAvailabilityMetric,
         lambda job: RDFAvailability(job.computed_on), networked=True)
register("endpoint_availability", DQM.EndPointAvailabilityMetric,
         lambda job: EndpointAvailability(job.probe_settings.endpoint_url), networked=True)
register("endpoint_latency", DQM.EndPointLatencyMetric,
         lambda job: EndpointLatency(job.probe_settings.endpoint_url), networked=True)
register("dereferenceability_ratio", DQM.DereferenceabilityMetric,
         lambda job: DereferenceabilityRatio(job.computed_on, job.probe_settings), networked=True)

OFFLINE_METRICS = ("datatype_consistency", "labeled_resource_ratio", "external_linkage_ratio")


def shipped_descriptors() -> dict:
    """Shipped descriptors keyed by short metric name."""
    by_class = {d.metric_class: d for d in shipped_extension()[0]}
    return {impl.name: by_class[cls] for cls, impl in REGISTRY.items() if cls in by_class}


def resolve_metrics(names, descriptors=None) -> list:
    """Turn short names or metric class IRIs into descriptors, keeping the given order."""
    by_name = shipped_descriptors()
    by_class = {d.metric_class: d for d in by_name.values()}
    for d in descriptors or ():
        by_class[d.metric_class] = d
    out = []
    for name in names:
        if name in by_name:
            out.append(by_name[name])
            continue
        try:
            iri = IRI(name)
        except ValueError:
            raise KeyError(f"unknown metric {name!r}") from None
        if iri not in by_class:
            raise KeyError(f"unknown metric {name!r}")
        out.append(by_class[iri])
    return out


@dataclass
class AssessmentJob:
    target: QuadDataset
    computed_on: IRI
    selected_metrics: list
    timestamp: datetime
    probe_settings: ProbeSettings = field(default_factory=ProbeSettings)
    prober: Prober = probe_http

    def __post_init__(self) -> None:
        if not isinstance(self.computed_on, IRI):
            self.computed_on = IRI(self.computed_on)
        if not self.selected_metrics:
            raise ValueError("an assessment needs at least one metric")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")


def assess(job: AssessmentJob) -> list:
    """Run every selected metric; returns ``(descriptor, MetricResult | MetricFailure)`` pairs.

    The target dataset is iterated exactly once whatever the number of metrics.
    """
    slots: list = []
    for desc in job.selected_metrics:
        impl = REGISTRY.get(desc.metric_class)
        if impl is None:
            slots.append((desc, MetricFailure(desc.metric_class, "no implementation registered")))
        else:
            slots.append((desc, impl.factory(job)))
    active = [m for _, m in slots if not isinstance(m, MetricFailure)]

    for quad in job.target:
        for metric in active:
            metric.add(quad)

    results = []
    with ProbeContext(job.probe_settings, job.prober) as ctx:
        for desc, metric in slots:
            if isinstance(metric, MetricFailure):
                results.append((desc, metric))
                continue
            outcome = metric.finalize(ctx)
            results.append((desc, _conform(desc, outcome)))
    for desc, outcome in results:
        if isinstance(outcome, MetricFailure):
            log.warning("metric %s failed: %s", desc.metric_class.value, outcome.reason)
    return results


def _conform(desc: MetricDescriptor, outcome):
    if isinstance(outcome, MetricFailure):
        return outcome
    if outcome.value.datatype != desc.expected_datatype.value:
        return MetricFailure(desc.metric_class,
                             f"implementation produced {outcome.value.datatype}, "
                             f"descriptor expects {desc.expected_datatype.value}")
    unit = outcome.unit_measure or desc.unit_measure
    return MetricResult(desc.metric_class, outcome.value, unit, outcome.detail)


def successful(results: list) -> list:
    return [(d, r) for d, r in results if isinstance(r, MetricResult)]
