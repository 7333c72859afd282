"""Namespace IRIs used throughout the toolkit, documented in one place.

=================  ==================================================
prefix             namespace
=================  ==================================================
daq                http://purl.org/eis/vocab/daq#
dqm                http://purl.org/eis/vocab/dqm#  (shipped metrics)
qb                 http://purl.org/linked-data/cube#
sdmx-attribute     http://purl.org/linked-data/sdmx/2009/attribute#
dc                 http://purl.org/dc/terms/
rdf                http://www.w3.org/1999/02/22-rdf-syntax-ns#
rdfs               http://www.w3.org/2000/01/rdf-schema#
owl                http://www.w3.org/2002/07/owl#
xsd                http://www.w3.org/2001/XMLSchema#
rdfg               http://www.w3.org/2004/03/trix/rdfg-1/
unit               http://qudt.org/vocab/unit/
=================  ==================================================
"""

from __future__ import annotations

from .rdf.terms import IRI


class Namespace:
    def __init__(self, base: str) -> None:
        self.base = base

    def __getattr__(self, name: str) -> IRI:
        if name.startswith("__"):
            raise AttributeError(name)
        return IRI(self.base + name)

    def __getitem__(self, name: str) -> IRI:
        return IRI(self.base + name)

    def __contains__(self, iri: object) -> bool:
        return isinstance(iri, IRI) and iri.value.startswith(self.base)

    def __str__(self) -> str:
        return self.base


DAQ = Namespace("http://purl.org/eis/vocab/daq#")
DQM = Namespace("http://purl.org/eis/vocab/dqm#")
QB = Namespace("http://purl.org/linked-data/cube#")
SDMX_ATTRIBUTE = Namespace("http://purl.org/linked-data/sdmx/2009/attribute#")
DC = Namespace("http://purl.org/dc/terms/")
RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
RDFG = Namespace("http://www.w3.org/2004/03/trix/rdfg-1/")
UNIT = Namespace("http://qudt.org/vocab/unit/")

PREFIXES = {
    "daq": DAQ.base,
    "dqm": DQM.base,
    "qb": QB.base,
    "sdmx-attribute": SDMX_ATTRIBUTE.base,
    "dc": DC.base,
    "rdf": RDF.base,
    "rdfs": RDFS.base,
    "owl": OWL.base,
    "xsd": XSD.base,
    "rdfg": RDFG.base,
    "unit": UNIT.base,
}

# well-known terms
QUALITY_GRAPH = DAQ.QualityGraph
CATEGORY = DAQ.Category
DIMENSION = DAQ.Dimension
METRIC = DAQ.Metric
HAS_DIMENSION = DAQ.hasDimension
HAS_METRIC = DAQ.hasMetric
HAS_OBSERVATION = DAQ.hasObservation
METRIC_PROP = DAQ.metric
COMPUTED_ON = DAQ.computedOn
VALUE = DAQ.value
EXPECTED_DATATYPE = DAQ.expectedDataType
DSD = DAQ.dsd
REQUIRES = DAQ.requires  # recognised only; carries no behaviour

QB_DATASET = QB.DataSet
QB_OBSERVATION = QB.Observation
QB_OBSERVATION_GROUP = QB.ObservationGroup
QB_OBSERVATION_PROP = QB.observation
QB_DATASET_PROP = QB.dataSet
QB_STRUCTURE = QB.structure
QB_DSD = QB.DataStructureDefinition
QB_DIMENSION_PROPERTY = QB.DimensionProperty
QB_MEASURE_PROPERTY = QB.MeasureProperty
QB_ATTRIBUTE_PROPERTY = QB.AttributeProperty

UNIT_MEASURE = SDMX_ATTRIBUTE.unitMeasure
DC_DATE = DC.date
SUBCLASS_OF = RDFS.subClassOf
SUBPROPERTY_OF = RDFS.subPropertyOf
LABEL = RDFS.label
DOMAIN = RDFS.domain
RANGE = RDFS.range
TYPE = RDF.type
INVERSE_OF = OWL.inverseOf

SECONDS = UNIT.SEC
