"""The daQ TBox, the fixed Data Cube structure definition and extension loading."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Iterable, Optional

from . import namespaces as ns
from .namespaces import DAQ, OWL, QB, RDF, RDFG, RDFS, XSD
from .rdf import IRI, BNode, Literal, Quad, QuadDataset, parse_document

RECOGNIZED_DATATYPES = frozenset(
    XSD[name] for name in (
        "boolean", "double", "float", "decimal", "integer", "int", "long",
        "nonNegativeInteger", "string", "date", "dateTime", "duration",
    )
)


def _pairs(items: Iterable = ()) -> frozenset:
    return frozenset(items)


@dataclass(frozen=True)
class TBox:
    """Class and property hierarchy plus the annotations extension loading needs.

    Every field is a frozenset of pairs. ``closed`` marks the output of
    :func:`closure`; hierarchy queries on an open TBox close it first.
    """

    sub_class_of: frozenset = field(default_factory=frozenset)
    sub_property_of: frozenset = field(default_factory=frozenset)
    class_assertions: frozenset = field(default_factory=frozenset)
    inverse_of: frozenset = field(default_factory=frozenset)
    domains: frozenset = field(default_factory=frozenset)
    ranges: frozenset = field(default_factory=frozenset)
    expected_datatypes: frozenset = field(default_factory=frozenset)
    units: frozenset = field(default_factory=frozenset)
    labels: frozenset = field(default_factory=frozenset)
    closed: bool = False

    def merge(self, other: "TBox") -> "TBox":
        return TBox(
            self.sub_class_of | other.sub_class_of,
            self.sub_property_of | other.sub_property_of,
            self.class_assertions | other.class_assertions,
            self.inverse_of | other.inverse_of,
            self.domains | other.domains,
            self.ranges | other.ranges,
            self.expected_datatypes | other.expected_datatypes,
            self.units | other.units,
            self.labels | other.labels,
        )

    def _closed(self) -> "TBox":
        return self if self.closed else closure(self)

    # hierarchy queries
    def superclasses(self, cls: IRI) -> frozenset:
        return self._closed()._up_classes.get(cls, frozenset({cls}))

    def subclasses(self, cls: IRI) -> frozenset:
        return self._closed()._down_classes.get(cls, frozenset({cls}))

    def superproperties(self, prop: IRI) -> frozenset:
        return self._closed()._up_props.get(prop, frozenset({prop}))

    def subproperties(self, prop: IRI) -> frozenset:
        return self._closed()._down_props.get(prop, frozenset({prop}))

    def is_subclass(self, sub: IRI, sup: IRI) -> bool:
        return sup in self.superclasses(sub)

    def is_subproperty(self, sub: IRI, sup: IRI) -> bool:
        return sup in self.superproperties(sub)

    def annotation(self, attr: str, subject: IRI) -> set:
        return {o for s, o in getattr(self, attr) if s == subject}

    def label(self, iri: IRI) -> Optional[str]:
        found = sorted(self.annotation("labels", iri))
        return found[0] if found else None

    def expected_datatype(self, cls: IRI) -> Optional[IRI]:
        """Declared expected datatype of ``cls``, inherited from the nearest superclass."""
        own = self.annotation("expected_datatypes", cls)
        if own:
            return sorted(own, key=lambda i: i.value)[0]
        inherited = set()
        for sup in self.superclasses(cls):
            inherited |= self.annotation("expected_datatypes", sup)
        return sorted(inherited, key=lambda i: i.value)[0] if len(inherited) == 1 else None

    # indexes, only populated on closed instances
    @property
    def _up_classes(self) -> dict:
        return _index(self, "sub_class_of", up=True)

    @property
    def _down_classes(self) -> dict:
        return _index(self, "sub_class_of", up=False)

    @property
    def _up_props(self) -> dict:
        return _index(self, "sub_property_of", up=True)

    @property
    def _down_props(self) -> dict:
        return _index(self, "sub_property_of", up=False)


@lru_cache(maxsize=256)
def _index(tbox: TBox, attr: str, up: bool) -> dict:
    out: dict = {}
    for child, parent in getattr(tbox, attr):
        key, val = (child, parent) if up else (parent, child)
        out.setdefault(key, set()).add(val)
    return {k: frozenset(v) for k, v in out.items()}


def _reflexive_transitive(pairs: Iterable, universe: set) -> frozenset:
    up: dict = {n: set() for n in universe}
    for child, parent in pairs:
        up.setdefault(child, set()).add(parent)
        up.setdefault(parent, set())
    result = set()
    for start in up:
        seen = {start}
        stack = [start]
        while stack:
            for parent in up[stack.pop()]:
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        result.update((start, s) for s in seen)
    return frozenset(result)


def closure(t: TBox) -> TBox:
    """Reflexive-transitive closure of both hierarchies; types propagate upward."""
    if t.closed:
        return t
    classes = {c for pair in t.sub_class_of for c in pair}
    classes |= {c for _, c in t.class_assertions}
    classes |= {c for _, c in t.domains} | {c for _, c in t.ranges}
    classes |= {c for c, _ in t.expected_datatypes}
    props = {p for pair in t.sub_property_of for p in pair}
    props |= {p for pair in t.inverse_of for p in pair}
    props |= {p for p, _ in t.domains} | {p for p, _ in t.ranges}

    sub_class = _reflexive_transitive(t.sub_class_of, classes)
    sub_prop = _reflexive_transitive(t.sub_property_of, props)
    up: dict = {}
    for child, parent in sub_class:
        up.setdefault(child, set()).add(parent)
    assertions = {(x, sup) for x, c in t.class_assertions for sup in up.get(c, {c})}
    return replace(t, sub_class_of=sub_class, sub_property_of=sub_prop,
                   class_assertions=frozenset(assertions), closed=True)


def builtin_daq_tbox() -> TBox:
    """The core daQ hierarchy and the Data Cube typing of its properties."""
    cls = RDFS.Class
    prop = RDF.Property
    return TBox(
        sub_class_of=_pairs({
            (ns.QUALITY_GRAPH, ns.QB_DATASET),
            (ns.QUALITY_GRAPH, RDFG.Graph),
        }),
        class_assertions=_pairs({
            (ns.QUALITY_GRAPH, cls), (ns.CATEGORY, cls), (ns.DIMENSION, cls), (ns.METRIC, cls),
            (ns.HAS_DIMENSION, prop), (ns.HAS_METRIC, prop), (ns.HAS_OBSERVATION, prop),
            (ns.EXPECTED_DATATYPE, prop), (ns.REQUIRES, prop),
            (ns.METRIC_PROP, ns.QB_DIMENSION_PROPERTY),
            (ns.COMPUTED_ON, ns.QB_DIMENSION_PROPERTY),
            (ns.VALUE, ns.QB_MEASURE_PROPERTY),
            (ns.UNIT_MEASURE, ns.QB_ATTRIBUTE_PROPERTY),
            (ns.DC_DATE, ns.QB_ATTRIBUTE_PROPERTY),
        }),
        inverse_of=_pairs({(ns.HAS_OBSERVATION, ns.METRIC_PROP)}),
        domains=_pairs({
            (ns.HAS_DIMENSION, ns.CATEGORY), (ns.HAS_METRIC, ns.DIMENSION),
            (ns.HAS_OBSERVATION, ns.METRIC), (ns.METRIC_PROP, ns.QB_OBSERVATION),
            (ns.COMPUTED_ON, ns.QB_OBSERVATION), (ns.VALUE, ns.QB_OBSERVATION),
        }),
        ranges=_pairs({
            (ns.HAS_DIMENSION, ns.DIMENSION), (ns.HAS_METRIC, ns.METRIC),
            (ns.HAS_OBSERVATION, ns.QB_OBSERVATION), (ns.METRIC_PROP, ns.METRIC),
        }),
        labels=_pairs({
            (ns.QUALITY_GRAPH, "Quality Graph"), (ns.CATEGORY, "Category"),
            (ns.DIMENSION, "Dimension"), (ns.METRIC, "Metric"),
        }),
    )


def dsd_definition() -> frozenset:
    """Quads of ``daq:dsd``: two dimensions, one measure, two attributes."""
    dsd = ns.DSD
    components = [
        ("dsd-metric", QB.dimension, ns.METRIC_PROP, [(QB.order, Literal("1", XSD.integer))]),
        ("dsd-computed-on", QB.dimension, ns.COMPUTED_ON, [(QB.order, Literal("2", XSD.integer))]),
        ("dsd-value", QB.measure, ns.VALUE, []),
        ("dsd-unit", QB.attribute, ns.UNIT_MEASURE,
         [(QB.componentRequired, Literal("false", XSD.boolean))]),
        ("dsd-date", QB.attribute, ns.DC_DATE,
         [(QB.componentRequired, Literal("true", XSD.boolean))]),
    ]
    quads = {Quad(dsd, ns.TYPE, ns.QB_DSD)}
    for label, role, prop, extra in components:
        node = BNode(label)
        quads.add(Quad(dsd, QB.component, node))
        quads.add(Quad(node, ns.TYPE, QB.ComponentSpecification))
        quads.add(Quad(node, role, prop))
        for p, o in extra:
            quads.add(Quad(node, p, o))
    return frozenset(quads)


def quality_graph_definition() -> frozenset:
    """``daq:QualityGraph`` with its restriction fixing ``qb:structure`` to ``daq:dsd``."""
    restriction = BNode("qg-structure-restriction")
    return frozenset({
        Quad(ns.QUALITY_GRAPH, ns.TYPE, OWL.Class),
        Quad(ns.QUALITY_GRAPH, ns.SUBCLASS_OF, restriction),
        Quad(restriction, ns.TYPE, OWL.Restriction),
        Quad(restriction, OWL.onProperty, ns.QB_STRUCTURE),
        Quad(restriction, OWL.hasValue, ns.DSD),
    })


def tbox_quads(t: TBox) -> set:
    quads = set()
    for attr, pred in (
        ("sub_class_of", ns.SUBCLASS_OF), ("sub_property_of", ns.SUBPROPERTY_OF),
        ("class_assertions", ns.TYPE), ("inverse_of", ns.INVERSE_OF),
        ("domains", ns.DOMAIN), ("ranges", ns.RANGE),
        ("expected_datatypes", ns.EXPECTED_DATATYPE), ("units", ns.UNIT_MEASURE),
    ):
        for s, o in getattr(t, attr):
            if t.closed and s == o:
                continue
            quads.add(Quad(s, pred, o))
    for s, text in t.labels:
        quads.add(Quad(s, ns.LABEL, Literal(text, language="en")))
    return quads


def vocabulary_dataset(t: Optional[TBox] = None) -> QuadDataset:
    """The built-in vocabulary (or ``t``) with the DSD, ready to dump as Turtle."""
    quads = tbox_quads(t if t is not None else builtin_daq_tbox())
    quads |= quality_graph_definition() | dsd_definition()
    return QuadDataset(quads, ns.PREFIXES)


def tbox_from_dataset(data: QuadDataset) -> TBox:
    """Collect hierarchy statements and annotations from every graph of ``data``."""
    buckets: dict = {name: set() for name in (
        "sub_class_of", "sub_property_of", "class_assertions", "inverse_of",
        "domains", "ranges", "expected_datatypes", "units")}
    by_pred = {
        ns.SUBCLASS_OF: "sub_class_of", ns.SUBPROPERTY_OF: "sub_property_of",
        ns.TYPE: "class_assertions", ns.INVERSE_OF: "inverse_of",
        ns.DOMAIN: "domains", ns.RANGE: "ranges",
        ns.EXPECTED_DATATYPE: "expected_datatypes", ns.UNIT_MEASURE: "units",
    }
    labels = set()
    for q in data:
        if q.predicate == ns.LABEL and isinstance(q.subject, IRI) and isinstance(q.object, Literal):
            labels.add((q.subject, q.object.lexical))
            continue
        name = by_pred.get(q.predicate)
        if name and isinstance(q.subject, IRI) and isinstance(q.object, IRI):
            buckets[name].add((q.subject, q.object))
    return TBox(labels=frozenset(labels), **{k: frozenset(v) for k, v in buckets.items()})


@dataclass(frozen=True)
class MetricDescriptor:
    metric_class: IRI
    dimension_class: IRI
    category_class: IRI
    has_metric_property: IRI
    has_dimension_property: IRI
    expected_datatype: IRI
    unit_measure: Optional[IRI] = None
    label: Optional[str] = None


class ExtensionError(ValueError):
    """An extension TBox does not follow the Category/Dimension/Metric pattern."""

    def __init__(self, defects: list) -> None:
        self.defects = list(defects)
        super().__init__("; ".join(self.defects))


def _most_specific(candidates: dict, t: TBox) -> dict:
    """Keep properties whose range is not strictly above another candidate's range."""
    keep = {}
    for p, rng in candidates.items():
        if not any(r != rng and t.is_subclass(r, rng) for r in candidates.values()):
            keep[p] = rng
    return keep


def _single(values: set) -> Optional[IRI]:
    return next(iter(values)) if len(values) == 1 else None


def load_extension(ext: QuadDataset, base: Optional[TBox] = None) -> tuple:
    """Describe every concrete metric class an extension declares.

    Returns ``(descriptors, merged_closed_tbox)``; raises :class:`ExtensionError`
    listing every defect found.
    """
    base = base if base is not None else builtin_daq_tbox()
    ext_tbox = tbox_from_dataset(ext)
    merged = closure(base.merge(ext_tbox))
    declared = {c for c, _ in ext_tbox.sub_class_of}
    metric_classes = sorted(
        (c for c in declared
         if c != ns.METRIC and merged.is_subclass(c, ns.METRIC)
         and not any(sub != c and not merged.is_subclass(c, sub) for sub in merged.subclasses(c))),
        key=lambda i: i.value,
    )
    has_metric_props = [p for p in merged.subproperties(ns.HAS_METRIC) if p != ns.HAS_METRIC]
    has_dim_props = [p for p in merged.subproperties(ns.HAS_DIMENSION) if p != ns.HAS_DIMENSION]

    descriptors, defects = [], []
    for m in metric_classes:
        problems = []
        ranged = {}
        for p in has_metric_props:
            rng = _single(merged.annotation("ranges", p))
            if rng is not None and merged.is_subclass(m, rng):
                ranged[p] = rng
        ranged = _most_specific(ranged, merged)
        dimension = has_metric = category = has_dimension = None
        if not ranged:
            problems.append("no sub-property of daq:hasMetric has it in its range")
        elif len(ranged) > 1:
            problems.append("several daq:hasMetric sub-properties apply: "
                            + ", ".join(sorted(p.value for p in ranged)))
        else:
            has_metric = next(iter(ranged))
            dimension = _single(merged.annotation("domains", has_metric))
            if dimension is None or not merged.is_subclass(dimension, ns.DIMENSION):
                problems.append(f"{has_metric.value} has no single domain below daq:Dimension")
                dimension = None
        if dimension is not None:
            ranged = {}
            for p in has_dim_props:
                rng = _single(merged.annotation("ranges", p))
                if rng is not None and merged.is_subclass(dimension, rng):
                    ranged[p] = rng
            ranged = _most_specific(ranged, merged)
            cats = {p: _single(merged.annotation("domains", p)) for p in ranged}
            if not ranged:
                problems.append(f"dimension {dimension.value} has no daq:hasDimension "
                                "sub-property leading to it")
            elif len(set(cats.values())) > 1:
                problems.append(f"dimension {dimension.value} has multiple parent categories: "
                                + ", ".join(sorted(str(c) for c in cats.values())))
            else:
                has_dimension = sorted(ranged, key=lambda i: i.value)[0]
                category = cats[has_dimension]
                if category is None or not merged.is_subclass(category, ns.CATEGORY):
                    problems.append(f"{has_dimension.value} has no single domain below daq:Category")
                    category = None
        datatype = merged.expected_datatype(m)
        if datatype is None:
            problems.append("no daq:expectedDataType")
        elif datatype not in RECOGNIZED_DATATYPES:
            problems.append(f"unrecognised expected datatype {datatype.value}")
        if problems:
            defects.extend(f"{m.value}: {p}" for p in problems)
            continue
        units = merged.annotation("units", m)
        descriptors.append(MetricDescriptor(
            metric_class=m, dimension_class=dimension, category_class=category,
            has_metric_property=has_metric, has_dimension_property=has_dimension,
            expected_datatype=datatype,
            unit_measure=sorted(units, key=lambda i: i.value)[0] if units else None,
            label=merged.label(m),
        ))
    if defects:
        raise ExtensionError(defects)
    return descriptors, merged


def instances_of(data: QuadDataset, class_iri: IRI, t: TBox) -> set:
    """Resources typed ``class_iri`` or any of its transitive subclasses."""
    subs = t.subclasses(class_iri)
    return {q.subject for q in data.match(predicate=ns.TYPE) if q.object in subs}


@lru_cache(maxsize=1)
def shipped_extension() -> tuple:
    """Descriptors and merged TBox of the bundled metric vocabulary."""
    text = resources.files("qualcube.data").joinpath("metrics.ttl").read_bytes()
    return load_extension(parse_document(text, "ttl"), builtin_daq_tbox())


def shipped_extension_dataset() -> QuadDataset:
    text = resources.files("qualcube.data").joinpath("metrics.ttl").read_bytes()
    return parse_document(text, "ttl")


def default_tbox(extra: Iterable[QuadDataset] = ()) -> TBox:
    """Built-in vocabulary, shipped metrics and any extra extension datasets, closed."""
    t = shipped_extension()[1]
    for ext in extra:
        t = closure(t.merge(tbox_from_dataset(ext)))
    return t
