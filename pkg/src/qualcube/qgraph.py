"""Building, validating and merging daQ quality graphs."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Optional

from . import namespaces as ns
from .metrics.base import MetricResult
from .namespaces import XSD
from .rdf import IRI, BNode, Literal, Quad, QuadDataset, term_key
from .vocab import TBox, closure, default_tbox, instances_of

OBSERVATION_PROPERTIES = (ns.METRIC_PROP, ns.COMPUTED_ON, ns.VALUE, ns.DC_DATE, ns.QB_DATASET_PROP)

VIOLATION_CODES = {
    "V1": "graph typed daq:QualityGraph and entailed qb:DataSet",
    "V2": "exactly one qb:structure, equal to daq:dsd",
    "V3": "observation completeness",
    "V4": "value datatype matches the metric's daq:expectedDataType",
    "V5": "daq:metric objects are daq:Metric instances",
    "V6": "daq:hasObservation and daq:metric are mutually inverse",
    "V7": "metric instances reachable from a category instance",
}


class QualityGraphError(ValueError):
    pass


class MergeError(QualityGraphError):
    pass


# ---- timestamps ---------------------------------------------------------------

_DATETIME = re.compile(
    r"(-?\d{4,})-(\d\d)-(\d\d)T(\d\d):(\d\d):(\d\d)(?:\.(\d+))?(Z|[+-]\d\d:\d\d)?$")


def format_datetime(dt: datetime) -> str:
    """UTC ``xsd:dateTime`` lexical form with a ``Z`` suffix."""
    if dt.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    dt = dt.astimezone(timezone.utc)
    text = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        text += f".{dt.microsecond:06d}".rstrip("0")
    return text + "Z"


def parse_datetime(text: str) -> datetime:
    """Parse an ``xsd:dateTime``; values without a zone are taken as UTC."""
    m = _DATETIME.match(text.strip())
    if not m:
        raise ValueError(f"not an xsd:dateTime: {text!r}")
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    frac = m.group(7) or ""
    micro = int((frac + "000000")[:6])
    tz = timezone.utc
    zone = m.group(8)
    if zone and zone != "Z":
        sign = 1 if zone[0] == "+" else -1
        tz = timezone(sign * timedelta(hours=int(zone[1:3]), minutes=int(zone[4:6])))
    extra = timedelta(0)
    if hour == 24:
        hour, extra = 0, timedelta(days=1)
    return datetime(year, month, day, hour, minute, second, micro, tzinfo=tz) + extra


def datetime_literal(dt: datetime) -> Literal:
    return Literal(format_datetime(dt), XSD.dateTime)


# ---- IRI minting -----------------------------------------------------------------

def local_name(iri: IRI) -> str:
    value = iri.value.rstrip("/#")
    cut = max(value.rfind("#"), value.rfind("/"), value.rfind(":"))
    return value[cut + 1:] or "thing"


def _graph_base(graph_iri: IRI) -> str:
    return graph_iri.value.rstrip("/#")


def observation_iri(graph_iri: IRI, metric_class: IRI, computed_on: IRI, timestamp: datetime) -> IRI:
    key = "\n".join((metric_class.value, computed_on.value, format_datetime(timestamp)))
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:32]
    return IRI(f"{_graph_base(graph_iri)}/obs/{digest}")


def instance_iris(graph_iri: IRI, classes: Iterable[IRI]) -> dict:
    """``graph/instance/<local name>`` per class; clashing local names get a digest suffix."""
    classes = sorted(set(classes), key=lambda c: c.value)
    by_local: dict = {}
    for c in classes:
        by_local.setdefault(local_name(c), []).append(c)
    base = _graph_base(graph_iri)
    out = {}
    for local, members in by_local.items():
        for c in members:
            name = local
            if len(members) > 1:
                name += "-" + hashlib.sha256(c.value.encode("utf-8")).hexdigest()[:8]
            out[c] = IRI(f"{base}/instance/{name}")
    return out


# ---- building ------------------------------------------------------------------------

def build_quality_graph(results: list, computed_on: IRI, timestamp: datetime,
                        graph_iri: IRI, prefixes: Optional[dict] = None) -> QuadDataset:
    """Emit the quality graph for one assessment run as a named graph."""
    g = graph_iri
    seen = set()
    for desc, result in results:
        if not isinstance(result, MetricResult):
            raise QualityGraphError(f"{desc.metric_class.value} has no result to record")
        if desc.metric_class in seen:
            raise QualityGraphError(f"two results for metric class {desc.metric_class.value}")
        seen.add(desc.metric_class)

    quads = {
        Quad(g, ns.TYPE, ns.QUALITY_GRAPH, g),
        Quad(g, ns.TYPE, ns.QB_DATASET, g),
        Quad(g, ns.QB_STRUCTURE, ns.DSD, g),
    }
    classes = [c for d, _ in results for c in (d.category_class, d.dimension_class, d.metric_class)]
    inst = instance_iris(g, classes)
    date = datetime_literal(timestamp)
    for desc, result in results:
        cat, dim, met = inst[desc.category_class], inst[desc.dimension_class], inst[desc.metric_class]
        obs = observation_iri(g, desc.metric_class, computed_on, timestamp)
        quads |= {
            Quad(cat, ns.TYPE, desc.category_class, g),
            Quad(cat, desc.has_dimension_property, dim, g),
            Quad(dim, ns.TYPE, desc.dimension_class, g),
            Quad(dim, desc.has_metric_property, met, g),
            Quad(met, ns.TYPE, desc.metric_class, g),
            Quad(met, ns.HAS_OBSERVATION, obs, g),
            Quad(obs, ns.TYPE, ns.QB_OBSERVATION, g),
            Quad(obs, ns.METRIC_PROP, met, g),
            Quad(obs, ns.COMPUTED_ON, computed_on, g),
            Quad(obs, ns.VALUE, result.value, g),
            Quad(obs, ns.DC_DATE, date, g),
            Quad(obs, ns.QB_DATASET_PROP, g, g),
        }
        if result.unit_measure is not None:
            quads.add(Quad(obs, ns.UNIT_MEASURE, result.unit_measure, g))
    return QuadDataset(quads, prefixes if prefixes is not None else ns.PREFIXES)


# ---- validation ------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    graph: str
    violations: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def codes(self) -> list:
        return [v.code for v in self.violations]

    def to_text(self) -> str:
        """One ``CODE<TAB>subject<TAB>message`` line per violation."""
        return "".join(f"{v.code}\t{v.subject}\t{v.message}\n" for v in self.violations)

    def to_dict(self) -> dict:
        return {
            "graph": self.graph,
            "passed": self.passed,
            "violations": [
                {"code": v.code, "subject": v.subject, "message": v.message}
                for v in self.violations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _name(term) -> str:
    return term.value if isinstance(term, IRI) else str(term)


def validate(data: QuadDataset, graph_iri: IRI, t: Optional[TBox] = None) -> ValidationReport:
    """Check the quality graph ``graph_iri`` against the fixed structure definition."""
    t = closure(t) if t is not None else default_tbox()
    g = graph_iri
    view = QuadDataset(data.graph_view(g))
    out: list = []

    def report(code: str, subject, message: str) -> None:
        out.append(Violation(code, _name(subject), message))

    # V1
    g_types = [c for c in view.objects(g, ns.TYPE) if isinstance(c, IRI)]
    if not any(t.is_subclass(c, ns.QUALITY_GRAPH) for c in g_types):
        report("V1", g, "graph is not typed daq:QualityGraph")
    elif not any(t.is_subclass(c, ns.QB_DATASET) for c in g_types):
        report("V1", g, "graph is not entailed to be a qb:DataSet")

    # V2
    structures = view.objects(g, ns.QB_STRUCTURE)
    if len(structures) != 1:
        report("V2", g, f"{len(structures)} qb:structure statements, expected exactly one")
    elif structures != {ns.DSD}:
        report("V2", g, f"qb:structure is {_name(next(iter(structures)))}, expected daq:dsd")

    has_obs = t.subproperties(ns.HAS_OBSERVATION)
    typed_obs = instances_of(view, ns.QB_OBSERVATION, t)
    observations = set(typed_obs)
    for q in view:
        if q.predicate in OBSERVATION_PROPERTIES and q.subject != g:
            observations.add(q.subject)
        if q.predicate in has_obs and isinstance(q.object, (IRI, BNode)):
            observations.add(q.object)
    metric_instances = instances_of(view, ns.METRIC, t)

    # V3
    for o in sorted(observations, key=term_key):
        if o not in typed_obs:
            report("V3", o, "not typed qb:Observation")
        for prop in OBSERVATION_PROPERTIES:
            values = view.objects(o, prop)
            if len(values) != 1:
                report("V3", o, f"{len(values)} values for {prop.value}, expected exactly one")
        datasets = view.objects(o, ns.QB_DATASET_PROP)
        if len(datasets) == 1 and datasets != {g}:
            report("V3", o, f"qb:dataSet is {_name(next(iter(datasets)))}, expected {g.value}")
        dates = view.objects(o, ns.DC_DATE)
        if len(dates) == 1:
            date = next(iter(dates))
            if not (isinstance(date, Literal) and date.datatype == XSD.dateTime.value
                    and _parses_as_datetime(date.lexical)):
                report("V3", o, "dc:date is not an xsd:dateTime")

    # V5
    metric_objects = {q.object for q in view.match(predicate=ns.METRIC_PROP)}
    for m in sorted(metric_objects, key=term_key):
        if m not in metric_instances:
            report("V5", m, "daq:metric object is not an instance of daq:Metric")

    # V4
    for o in sorted(observations, key=term_key):
        values = view.objects(o, ns.VALUE)
        metrics = view.objects(o, ns.METRIC_PROP)
        if len(values) != 1 or len(metrics) != 1:
            continue
        m = next(iter(metrics))
        if m not in metric_instances:
            continue
        value = next(iter(values))
        expected = set()
        for c in view.objects(m, ns.TYPE):
            if isinstance(c, IRI) and t.is_subclass(c, ns.METRIC):
                dt = t.expected_datatype(c)
                if dt is not None:
                    expected.add(dt)
        if not expected:
            report("V4", o, f"no daq:expectedDataType known for the metric of {_name(m)}")
        elif len(expected) > 1:
            report("V4", o, "metric classes declare conflicting expected datatypes")
        elif not isinstance(value, Literal):
            report("V4", o, "daq:value is not a literal")
        elif value.datatype != next(iter(expected)).value:
            report("V4", o, f"value datatype {value.datatype} != expected "
                            f"{next(iter(expected)).value}")

    # V6
    forward = {(q.subject, q.object) for q in view if q.predicate in has_obs}
    backward = {(q.object, q.subject) for q in view.match(predicate=ns.METRIC_PROP)}
    for m, o in sorted(forward - backward, key=lambda p: (term_key(p[1]), term_key(p[0]))):
        if view.objects(o, ns.METRIC_PROP):
            report("V6", o, f"{_name(m)} daq:hasObservation it, but its daq:metric differs")
    for m, o in sorted(backward - forward, key=lambda p: (term_key(p[1]), term_key(p[0]))):
        report("V6", o, f"daq:metric {_name(m)} lacks the inverse daq:hasObservation")

    # V7
    has_dim = t.subproperties(ns.HAS_DIMENSION)
    has_met = t.subproperties(ns.HAS_METRIC)
    dims = instances_of(view, ns.DIMENSION, t)
    reachable = set()
    for c in instances_of(view, ns.CATEGORY, t):
        for q in view.match(c):
            if q.predicate in has_dim and q.object in dims:
                for q2 in view.match(q.object):
                    if q2.predicate in has_met:
                        reachable.add(q2.object)
    for m in sorted(metric_instances, key=term_key):
        if m not in reachable:
            report("V7", m, "metric instance not reachable from any category instance")

    out.sort(key=lambda v: (v.code, v.subject, v.message))
    return ValidationReport(g.value, tuple(out))


def _parses_as_datetime(text: str) -> bool:
    try:
        parse_datetime(text)
    except ValueError:
        return False
    return True


def quality_graphs(data: QuadDataset) -> list:
    """Named graphs that declare themselves daq:QualityGraph."""
    return [g for g in data.graph_names()
            if Quad(g, ns.TYPE, ns.QUALITY_GRAPH, g) in data]


# ---- reading -------------------------------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    iri: IRI
    metric_instance: IRI
    computed_on: IRI
    value: Literal
    timestamp: datetime
    unit_measure: Optional[IRI] = None
    in_quality_graph: Optional[IRI] = None
    metric_classes: frozenset = field(default_factory=frozenset)

    @property
    def number(self) -> Optional[float]:
        return literal_number(self.value)


def literal_number(lit: Literal) -> Optional[float]:
    """Numeric reading of a value literal; booleans map to 0/1."""
    if lit.datatype == XSD.boolean.value:
        return {"true": 1.0, "1": 1.0, "false": 0.0, "0": 0.0}.get(lit.lexical)
    try:
        return float(lit.lexical)
    except ValueError:
        return None


def read_observations(data: QuadDataset) -> list:
    """Complete observations across every graph, sorted by IRI; incomplete ones are skipped."""
    out = []
    for q in data.match(predicate=ns.TYPE, obj=ns.QB_OBSERVATION):
        o, g = q.subject, q.graph
        if not isinstance(o, IRI):
            continue

        def one(prop):
            vals = sorted(data.objects(o, prop, g), key=term_key)
            return vals[0] if vals else None

        metric, computed_on, value, date = (one(p) for p in
                                            (ns.METRIC_PROP, ns.COMPUTED_ON, ns.VALUE, ns.DC_DATE))
        if not (isinstance(metric, IRI) and isinstance(computed_on, IRI)
                and isinstance(value, Literal) and isinstance(date, Literal)):
            continue
        try:
            ts = parse_datetime(date.lexical)
        except ValueError:
            continue
        unit = one(ns.UNIT_MEASURE)
        classes = frozenset(c for c in data.objects(metric, ns.TYPE, g) if isinstance(c, IRI))
        out.append(Observation(o, metric, computed_on, value, ts,
                               unit if isinstance(unit, IRI) else None, g, classes))
    unique = {(ob.iri, ob.in_quality_graph): ob for ob in out}
    return sorted(unique.values(), key=lambda ob: (ob.iri.value, term_key(ob.in_quality_graph)))


# ---- merging -------------------------------------------------------------------------------

def _scaffold(view: QuadDataset, g: IRI) -> dict:
    """Scaffold instances of a graph keyed by their set of asserted types."""
    observations = {q.subject for q in view.match(predicate=ns.TYPE, obj=ns.QB_OBSERVATION)}
    observations |= {q.subject for q in view.match(predicate=ns.METRIC_PROP)}
    types: dict = {}
    for q in view.match(predicate=ns.TYPE):
        if q.subject != g and q.subject not in observations:
            types.setdefault(q.subject, set()).add(q.object)
    by_types: dict = {}
    for inst in sorted(types, key=term_key):
        by_types.setdefault(frozenset(types[inst]), inst)
    return {inst: frozenset(ts) for inst, ts in types.items()}, by_types


def _source_graph(addition: QuadDataset, g: IRI) -> IRI:
    names = addition.graph_names()
    if g in names:
        return g
    qgs = quality_graphs(addition)
    if len(qgs) == 1:
        return qgs[0]
    if len(names) == 1:
        return names[0]
    raise MergeError("cannot tell which named graph of the addition to merge")


def merge_runs(existing: QuadDataset, addition: QuadDataset, graph_iri: IRI) -> QuadDataset:
    """Union of two runs inside ``graph_iri``; scaffold instances are shared per class.

    Nothing is ever removed. Raises :class:`MergeError` when an observation IRI
    occurs in both runs with different statements.
    """
    g = graph_iri
    if not addition.graph_names():
        return existing
    src = _source_graph(addition, g)
    existing_view = QuadDataset(existing.graph_view(g))
    addition_view = QuadDataset(addition.graph_view(src))
    _, existing_by_types = _scaffold(existing_view, g)
    addition_types, _ = _scaffold(addition_view, src)

    rename = {src: g}
    for inst, ts in addition_types.items():
        target = existing_by_types.get(ts)
        if target is not None:
            rename[inst] = target

    def r(term):
        return rename.get(term, term)

    moved = {Quad(r(q.subject), q.predicate, r(q.object), g) for q in addition_view}

    added_obs = {q.subject for q in moved if q.predicate == ns.TYPE and q.object == ns.QB_OBSERVATION}
    for o in sorted(added_obs, key=term_key):
        before = {(q.predicate, q.object) for q in existing_view.match(o)}
        if before and before != {(q.predicate, q.object) for q in moved if q.subject == o}:
            raise MergeError(f"observation {o.value} exists with different content")

    others = {q for q in addition.quads if q.graph != src}
    prefixes = dict(addition.prefixes)
    prefixes.update(existing.prefixes)
    return QuadDataset(existing.quads | moved | others, prefixes)
