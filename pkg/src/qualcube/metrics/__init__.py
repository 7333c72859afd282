from .base import MetricFailure, MetricResult
from .engine import (
    OFFLINE_METRICS, REGISTRY, AssessmentJob, assess, resolve_metrics, shipped_descriptors,
    successful,
)
from .networked import (
    ProbeContext, dereferenceability_ratio, endpoint_availability, rdf_availability,
)
from .offline import datatype_consistency, external_linkage_ratio, labeled_resource_ratio
from .probe import (
    RDF_ACCEPT, SPARQL_ACCEPT, ProbeOutcome, ProbeSettings, ProbeStatus, probe_http,
)

__all__ = [
    "AssessmentJob", "MetricFailure", "MetricResult", "OFFLINE_METRICS", "ProbeContext",
    "ProbeOutcome", "ProbeSettings", "ProbeStatus", "RDF_ACCEPT", "REGISTRY", "SPARQL_ACCEPT",
    "assess", "datatype_consistency", "dereferenceability_ratio", "endpoint_availability",
    "external_linkage_ratio", "labeled_resource_ratio", "probe_http", "rdf_availability",
    "resolve_metrics", "shipped_descriptors", "successful",
]
