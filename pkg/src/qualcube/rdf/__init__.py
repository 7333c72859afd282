"""RDF term model, parsers, serializers and an isomorphism check."""

from .formats import Format
from .isomorphism import isomorphic
from .parser import ParseError, parse_document
from .serializer import canonical_nquads, canonicalize, serialize
from .terms import IRI, BNode, Literal, Quad, QuadDataset, Term, graph_view, term_key

__all__ = [
    "BNode", "Format", "IRI", "Literal", "ParseError", "Quad", "QuadDataset", "Term",
    "canonical_nquads", "canonicalize", "graph_view", "isomorphic", "parse_document",
    "serialize", "term_key",
]
