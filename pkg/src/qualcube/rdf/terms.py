"""RDF terms, quads and immutable quad datasets."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Union

XSD_STRING = "http://www.w3.org/2001/XMLSchema#string"
RDF_LANG_STRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_BNODE_LABEL = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")
_LANG_TAG = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")

_fresh = itertools.count()


def fresh_label() -> str:
    """Process-wide unique blank node label."""
    return f"b{next(_fresh)}"


@dataclass(frozen=True)
class IRI:
    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.value, str) or not _SCHEME.match(self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")

    @property
    def sort_key(self) -> tuple:
        return (0, self.value)

    def __str__(self) -> str:
        return self.value

    def n3(self) -> str:
        return f"<{_escape_iri(self.value)}>"


@dataclass(frozen=True)
class BNode:
    label: str = field(default_factory=fresh_label)

    def __post_init__(self) -> None:
        if not _BNODE_LABEL.match(self.label):
            raise ValueError(f"invalid blank node label: {self.label!r}")

    @property
    def sort_key(self) -> tuple:
        return (1, self.label)

    def __str__(self) -> str:
        return f"_:{self.label}"

    def n3(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, init=False)
class Literal:
    """An RDF literal.

    Plain literals get ``xsd:string``; a language tag forces ``rdf:langString``.
    Language tags are stored lower-cased so equality follows RDF 1.1.
    """

    lexical: str
    datatype: str = XSD_STRING
    language: Optional[str] = None

    def __init__(self, lexical: str, datatype: Union[str, IRI, None] = None,
                 language: Optional[str] = None) -> None:
        if isinstance(datatype, IRI):
            datatype = datatype.value
        if language is not None:
            if not _LANG_TAG.match(language):
                raise ValueError(f"invalid language tag: {language!r}")
            if datatype not in (None, RDF_LANG_STRING):
                raise ValueError("a language-tagged literal must have datatype rdf:langString")
            language = language.lower()
            datatype = RDF_LANG_STRING
        elif datatype is None:
            datatype = XSD_STRING
        elif datatype == RDF_LANG_STRING:
            raise ValueError("rdf:langString literal requires a language tag")
        if not _SCHEME.match(datatype):
            raise ValueError(f"datatype is not an absolute IRI: {datatype!r}")
        object.__setattr__(self, "lexical", str(lexical))
        object.__setattr__(self, "datatype", datatype)
        object.__setattr__(self, "language", language)

    @property
    def sort_key(self) -> tuple:
        return (2, self.lexical, self.datatype, self.language or "")

    def __str__(self) -> str:
        return self.lexical

    def n3(self) -> str:
        text = f'"{escape_string(self.lexical)}"'
        if self.language:
            return f"{text}@{self.language}"
        if self.datatype == XSD_STRING:
            return text
        return f"{text}^^<{_escape_iri(self.datatype)}>"


Term = Union[IRI, BNode, Literal]


def term_key(term: Optional[Term]) -> tuple:
    """Total order over terms: kind first, then fields. ``None`` (default graph) sorts first."""
    if term is None:
        return (-1,)
    return term.sort_key


@dataclass(frozen=True)
class Quad:
    subject: Union[IRI, BNode]
    predicate: IRI
    object: Term
    graph: Optional[IRI] = None

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (IRI, BNode)):
            raise TypeError(f"subject must be an IRI or blank node, got {self.subject!r}")
        if not isinstance(self.predicate, IRI):
            raise TypeError(f"predicate must be an IRI, got {self.predicate!r}")
        if not isinstance(self.object, (IRI, BNode, Literal)):
            raise TypeError(f"object must be an RDF term, got {self.object!r}")
        if self.graph is not None and not isinstance(self.graph, IRI):
            raise TypeError(f"graph name must be an IRI, got {self.graph!r}")

    @property
    def sort_key(self) -> tuple:
        return (term_key(self.subject), term_key(self.predicate),
                term_key(self.object), term_key(self.graph))

    def terms(self) -> tuple:
        return (self.subject, self.predicate, self.object, self.graph)

    def in_graph(self, graph: Optional[IRI]) -> "Quad":
        return Quad(self.subject, self.predicate, self.object, graph)


class QuadDataset:
    """An immutable set of quads plus prefix hints for serialization.

    Iteration order is the deterministic term order.
    """

    def __init__(self, quads: Iterable[Quad] = (),
                 prefixes: Optional[Mapping[str, str]] = None) -> None:
        self._quads = frozenset(quads)
        self._prefixes = MappingProxyType(dict(prefixes or {}))

    @property
    def quads(self) -> frozenset:
        return self._quads

    @property
    def prefixes(self) -> Mapping[str, str]:
        return self._prefixes

    @cached_property
    def _ordered(self) -> tuple:
        return tuple(sorted(self._quads, key=lambda q: q.sort_key))

    def __iter__(self) -> Iterator[Quad]:
        return iter(self._ordered)

    def __len__(self) -> int:
        return len(self._quads)

    def __contains__(self, quad: object) -> bool:
        return quad in self._quads

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuadDataset):
            return NotImplemented
        return self._quads == other._quads

    def __hash__(self) -> int:
        return hash(self._quads)

    def __repr__(self) -> str:
        return f"QuadDataset({len(self)} quads, {len(self.graph_names())} named graphs)"

    def graph_names(self) -> list:
        return sorted({q.graph for q in self._quads if q.graph is not None}, key=term_key)

    def graph_view(self, graph: Optional[IRI] = None) -> frozenset:
        return self._by_graph.get(graph, frozenset())

    @cached_property
    def _by_graph(self) -> dict:
        groups: dict = {}
        for q in self._quads:
            groups.setdefault(q.graph, set()).add(q)
        return {g: frozenset(qs) for g, qs in groups.items()}

    @cached_property
    def _by_subject(self) -> dict:
        index: dict = {}
        for q in self._quads:
            index.setdefault(q.subject, []).append(q)
        return index

    @cached_property
    def _by_predicate(self) -> dict:
        index: dict = {}
        for q in self._quads:
            index.setdefault(q.predicate, []).append(q)
        return index

    def match(self, subject=None, predicate=None, obj=None, graph=...) -> Iterator[Quad]:
        """Yield quads matching the pattern; ``None`` is a wildcard for s/p/o.

        ``graph`` left unset matches every graph, ``None`` only the default graph.
        """
        if subject is not None:
            candidates: Iterable[Quad] = self._by_subject.get(subject, ())
        elif predicate is not None:
            candidates = self._by_predicate.get(predicate, ())
        else:
            candidates = self._quads
        for q in candidates:
            if predicate is not None and q.predicate != predicate:
                continue
            if obj is not None and q.object != obj:
                continue
            if graph is not ... and q.graph != graph:
                continue
            yield q

    def objects(self, subject, predicate, graph=...) -> set:
        return {q.object for q in self.match(subject, predicate, None, graph)}

    def subjects(self, predicate, obj, graph=...) -> set:
        return {q.subject for q in self.match(None, predicate, obj, graph)}

    def union(self, other: "QuadDataset") -> "QuadDataset":
        prefixes = dict(self._prefixes)
        prefixes.update(other.prefixes)
        return QuadDataset(self._quads | other.quads, prefixes)

    def with_prefixes(self, prefixes: Mapping[str, str]) -> "QuadDataset":
        merged = dict(self._prefixes)
        merged.update(prefixes)
        return QuadDataset(self._quads, merged)


def graph_view(dataset: QuadDataset, graph: Optional[IRI] = None) -> frozenset:
    """All quads of ``dataset`` whose graph component equals ``graph``."""
    return dataset.graph_view(graph)


_STRING_ESCAPES = {
    "\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t",
    "\b": "\\b", "\f": "\\f",
}


def escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _escape_iri(value: str) -> str:
    out = []
    for ch in value:
        if ord(ch) <= 0x20 or ch in '<>"{}|^`\\':
            code = ord(ch)
            out.append(f"\\u{code:04X}" if code <= 0xFFFF else f"\\U{code:08X}")
        else:
            out.append(ch)
    return "".join(out)
