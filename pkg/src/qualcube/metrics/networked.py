"""Metrics that probe HTTP resources during the finalize phase."""

from __future__ import annotations

import random
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Callable, Iterable, Optional
from urllib.parse import urldefrag, urlsplit

from ..namespaces import DQM, SECONDS
from ..rdf import IRI, Quad
from .base import MetricFailure, MetricResult, boolean_literal, double_literal, ratio
from .offline import authority
from .probe import (
    RDF_ACCEPT, SPARQL_ACCEPT, ProbeOutcome, ProbeSettings, ask_url, probe_http,
    rdf_body_check, sparql_boolean_check,
)

# prober(url, accept, settings, check) -> ProbeOutcome
Prober = Callable[..., ProbeOutcome]


class ProbeContext:
    """Runs probes on a bounded pool; identical requests are issued once per job."""

    def __init__(self, settings: ProbeSettings, prober: Prober = probe_http) -> None:
        self.settings = settings
        self.prober = prober
        self._pool = ThreadPoolExecutor(max_workers=settings.max_parallel_probes)
        self._lock = threading.Lock()
        self._cache: dict = {}

    def __enter__(self) -> "ProbeContext":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    def _submit(self, url: str, accept: str, check) -> Future:
        key = (url, accept, check)
        with self._lock:
            fut = self._cache.get(key)
            if fut is None:
                fut = self._pool.submit(self.prober, url, accept, self.settings, check)
                self._cache[key] = fut
        return fut

    def probe(self, url: str, accept: str = RDF_ACCEPT, check=rdf_body_check) -> ProbeOutcome:
        return self._submit(url, accept, check).result()

    def probe_many(self, urls: Iterable[str], accept: str = RDF_ACCEPT,
                   check=rdf_body_check) -> list:
        futures = [self._submit(u, accept, check) for u in urls]
        return [f.result() for f in futures]


class RDFAvailability:
    """Whether the assessed resource dereferences to parseable RDF."""

    metric_class = DQM.RDFAvailabilityMetric

    def __init__(self, computed_on: IRI) -> None:
        self.computed_on = computed_on

    def add(self, quad: Quad) -> None:
        pass

    def finalize(self, ctx: ProbeContext) -> MetricResult:
        outcome = ctx.probe(urldefrag(self.computed_on.value)[0], RDF_ACCEPT, rdf_body_check)
        return MetricResult(self.metric_class, boolean_literal(outcome.ok),
                            detail=outcome.detail or outcome.status.value)


def _endpoint_probe(ctx: ProbeContext, endpoint: str) -> ProbeOutcome:
    return ctx.probe(ask_url(endpoint), SPARQL_ACCEPT, sparql_boolean_check)


class EndpointAvailability:
    """Whether the configured SPARQL endpoint answers ``ASK {}``."""

    metric_class = DQM.EndPointAvailabilityMetric

    def __init__(self, endpoint: Optional[str]) -> None:
        self.endpoint = endpoint

    def add(self, quad: Quad) -> None:
        pass

    def finalize(self, ctx: ProbeContext):
        if not self.endpoint:
            return MetricFailure(self.metric_class, "no SPARQL endpoint URL configured")
        outcome = _endpoint_probe(ctx, self.endpoint)
        return MetricResult(self.metric_class, boolean_literal(outcome.ok),
                            detail=outcome.detail or outcome.status.value)


class EndpointLatency:
    """Seconds taken by the endpoint to answer ``ASK {}``; absent when it never answered."""

    metric_class = DQM.EndPointLatencyMetric
    unit = SECONDS

    def __init__(self, endpoint: Optional[str]) -> None:
        self.endpoint = endpoint

    def add(self, quad: Quad) -> None:
        pass

    def finalize(self, ctx: ProbeContext):
        if not self.endpoint:
            return MetricFailure(self.metric_class, "no SPARQL endpoint URL configured")
        outcome = _endpoint_probe(ctx, self.endpoint)
        if not outcome.answered or outcome.latency is None:
            return MetricFailure(self.metric_class,
                                 f"endpoint did not answer: {outcome.detail or outcome.status.value}")
        return MetricResult(self.metric_class, double_literal(outcome.latency), SECONDS,
                            detail=outcome.status.value)


class DereferenceabilityRatio:
    """Fraction of sampled local subject IRIs that dereference to parseable RDF.

    Local means sharing the assessed resource's authority. The sample is
    drawn with ``random.Random(settings.seed)`` from the sorted candidates,
    so it is reproducible; the seed is recorded in the result detail.
    """

    metric_class = DQM.DereferenceabilityMetric

    def __init__(self, computed_on: IRI, settings: ProbeSettings) -> None:
        self.home = authority(computed_on.value)
        self.settings = settings
        self.local: set = set()

    def add(self, quad: Quad) -> None:
        s = quad.subject
        if isinstance(s, IRI) and s.value not in self.local:
            parts = urlsplit(s.value)
            if parts.scheme in ("http", "https") and parts.netloc.lower() == self.home:
                self.local.add(s.value)

    def sample(self) -> list:
        candidates = sorted(self.local)
        k = self.settings.max_sample_size
        if len(candidates) <= k:
            return candidates
        return sorted(random.Random(self.settings.seed).sample(candidates, k))

    def finalize(self, ctx: ProbeContext) -> MetricResult:
        chosen = self.sample()
        outcomes = ctx.probe_many([urldefrag(u)[0] for u in chosen], RDF_ACCEPT, rdf_body_check)
        good = sum(1 for o in outcomes if o.ok)
        detail = (f"{good}/{len(chosen)} sampled of {len(self.local)} local subjects, "
                  f"seed={self.settings.seed}")
        return ratio(self.metric_class, good, len(chosen), empty=1.0,
                     empty_detail="no local subjects", detail=detail)


def _finalize_alone(metric, settings: ProbeSettings, prober: Prober):
    with ProbeContext(settings, prober) as ctx:
        return metric.finalize(ctx)


def rdf_availability(computed_on: IRI, settings: Optional[ProbeSettings] = None,
                     prober: Prober = probe_http) -> MetricResult:
    return _finalize_alone(RDFAvailability(computed_on), settings or ProbeSettings(), prober)


def endpoint_availability(endpoint: str, settings: Optional[ProbeSettings] = None,
                          prober: Prober = probe_http) -> tuple:
    """(availability result, latency result or failure) from a single probe."""
    settings = settings or ProbeSettings()
    with ProbeContext(settings, prober) as ctx:
        return EndpointAvailability(endpoint).finalize(ctx), EndpointLatency(endpoint).finalize(ctx)


def dereferenceability_ratio(quads: Iterable[Quad], computed_on: IRI,
                             settings: Optional[ProbeSettings] = None,
                             prober: Prober = probe_http) -> MetricResult:
    settings = settings or ProbeSettings()
    metric = DereferenceabilityRatio(computed_on, settings)
    for q in quads:
        metric.add(q)
    return _finalize_alone(metric, settings, prober)
