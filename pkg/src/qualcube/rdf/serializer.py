"""Serialization to N-Triples, N-Quads, Turtle and TriG.

All output is canonical in the sense needed for golden files: blank nodes
are relabelled from structure alone (colour refinement, then
individualisation on ties) and statements are sorted by term order, so two
datasets that differ only in blank node labels serialize byte-identically.
"""

from __future__ import annotations

import hashlib
import re
from typing import Iterable, Mapping, Optional, Union

from .formats import Format
from .terms import XSD_STRING, BNode, IRI, Literal, Quad, QuadDataset, escape_string, term_key

# Exhaustive tie-breaking is only attempted while the search stays this small;
# beyond it the first tied node is individualised greedily.
_SEARCH_BUDGET = 64

_PN_LOCAL_SAFE = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?$")
_PN_PREFIX_SAFE = re.compile(r"^(?:[A-Za-z](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?)?$")
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _term_text(term, colours: Mapping, self_node=None) -> str:
    if term is None:
        return "."
    if isinstance(term, BNode):
        if term == self_node:
            return "@self"
        return "_" + colours[term]
    return term.n3()


def _refine(quads: list, colours: dict) -> dict:
    """Colour refinement until the partition stops splitting."""
    by_node: dict = {b: [] for b in colours}
    for q in quads:
        for t in (q.subject, q.object):
            if isinstance(t, BNode):
                by_node[t].append(q)
    while True:
        new = {}
        for b, qs in by_node.items():
            sig = sorted(
                "|".join(_term_text(t, colours, b) for t in q.terms()) for q in qs
            )
            new[b] = _digest(colours[b] + "#" + "\n".join(sig))
        if len(set(new.values())) == len(set(colours.values())):
            return new
        colours = new


def _render_sorted(quads: list, colours: dict) -> tuple:
    """Sort quads by colour-substituted text, then label blank nodes by first occurrence.

    Returns the rendered N-Quads lines (used to compare candidate labellings)
    and the blank node mapping.
    """
    keyed = sorted(quads, key=lambda q: tuple(_term_text(t, colours) for t in q.terms()))
    mapping: dict = {}
    for q in keyed:
        for t in (q.subject, q.object):
            if isinstance(t, BNode) and t not in mapping:
                mapping[t] = BNode(f"c{len(mapping)}")
    relabelled = sorted((_relabel(q, mapping) for q in quads), key=lambda q: q.sort_key)
    return tuple(_nquad_line(q, True) for q in relabelled), mapping


def _relabel(q: Quad, mapping: Mapping) -> Quad:
    s = mapping.get(q.subject, q.subject) if isinstance(q.subject, BNode) else q.subject
    o = mapping.get(q.object, q.object) if isinstance(q.object, BNode) else q.object
    return Quad(s, q.predicate, o, q.graph)


def canonical_mapping(quads: Iterable[Quad]) -> dict:
    """Map every blank node to a canonical label derived from graph structure only."""
    quads = list(quads)
    nodes = {t for q in quads for t in (q.subject, q.object) if isinstance(t, BNode)}
    if not nodes:
        return {}
    colours = _refine(quads, {b: "" for b in nodes})
    return _search(quads, colours, [_SEARCH_BUDGET])[1]


def _search(quads: list, colours: dict, budget: list) -> tuple:
    classes: dict = {}
    for b, c in colours.items():
        classes.setdefault(c, []).append(b)
    tied = [members for members in classes.values() if len(members) > 1]
    if not tied:
        budget[0] -= 1
        return _render_sorted(quads, colours)
    cell = min(tied, key=lambda ms: (len(ms), colours[ms[0]]))
    cell.sort(key=lambda b: b.label)
    best = None
    for i, node in enumerate(cell):
        if i > 0 and budget[0] <= 0:
            break
        trial = dict(colours)
        trial[node] = _digest(colours[node] + "!individualised")
        result = _search(quads, _refine(quads, trial), budget)
        if best is None or result[0] < best[0]:
            best = result
    return best


def _canonical_quads(dataset: QuadDataset) -> list:
    mapping = canonical_mapping(dataset.quads)
    return sorted((_relabel(q, mapping) for q in dataset.quads), key=lambda q: q.sort_key)


def canonicalize(dataset: QuadDataset) -> QuadDataset:
    """Return the dataset with canonically relabelled blank nodes."""
    mapping = canonical_mapping(dataset.quads)
    return QuadDataset((_relabel(q, mapping) for q in dataset.quads), dataset.prefixes)


def _nquad_line(q: Quad, with_graph: bool) -> str:
    parts = [q.subject.n3(), q.predicate.n3(), q.object.n3()]
    if with_graph and q.graph is not None:
        parts.append(q.graph.n3())
    return " ".join(parts) + " .\n"


class _Compactor:
    def __init__(self, prefixes: Mapping[str, str]) -> None:
        # longest namespace first so the most specific prefix wins
        self.items = sorted(
            ((p, ns) for p, ns in prefixes.items() if _PN_PREFIX_SAFE.match(p)),
            key=lambda item: (-len(item[1]), item[0]),
        )
        self.used: set = set()

    def iri(self, value: str) -> str:
        for prefix, ns in self.items:
            if value.startswith(ns):
                local = value[len(ns):]
                if local == "" or _PN_LOCAL_SAFE.match(local):
                    self.used.add(prefix)
                    return f"{prefix}:{local}"
        return IRI(value).n3()

    def term(self, term) -> str:
        if isinstance(term, IRI):
            return self.iri(term.value)
        if isinstance(term, Literal):
            text = f'"{escape_string(term.lexical)}"'
            if term.language:
                return f"{text}@{term.language}"
            if term.datatype == XSD_STRING:
                return text
            return f"{text}^^{self.iri(term.datatype)}"
        return term.n3()


def _turtle_body(quads: Iterable[Quad], comp: _Compactor, indent: str) -> list:
    lines: list = []
    by_subject: dict = {}
    for q in quads:
        by_subject.setdefault(q.subject, []).append(q)
    for subject in sorted(by_subject, key=term_key):
        qs = sorted(by_subject[subject], key=lambda q: q.sort_key)
        by_pred: dict = {}
        for q in qs:
            by_pred.setdefault(q.predicate, []).append(q.object)
        preds = sorted(by_pred, key=lambda p: (p.value != RDF_TYPE, term_key(p)))
        chunks = []
        for p in preds:
            ptext = "a" if p.value == RDF_TYPE else comp.iri(p.value)
            objs = ", ".join(comp.term(o) for o in by_pred[p])
            chunks.append(f"{ptext} {objs}")
        head = f"{indent}{comp.term(subject)} "
        body = (" ;\n" + indent + "    ").join(chunks)
        lines.append(head + body + " .\n")
    return lines


def serialize(dataset: QuadDataset, format: Union[Format, str],
              prefixes: Optional[Mapping[str, str]] = None) -> bytes:
    """Serialize ``dataset``; output is deterministic for a given quad set."""
    fmt = Format.parse(format)
    if not fmt.supports_graphs and dataset.graph_names():
        raise ValueError(f"{fmt.name} cannot hold named graphs; use TriG or N-Quads")
    quads = _canonical_quads(dataset)
    if fmt in (Format.NTRIPLES, Format.NQUADS):
        return "".join(_nquad_line(q, fmt is Format.NQUADS) for q in quads).encode("utf-8")

    comp = _Compactor(prefixes if prefixes is not None else dataset.prefixes)
    body: list = []
    default = [q for q in quads if q.graph is None]
    body.extend(_turtle_body(default, comp, ""))
    if fmt is Format.TRIG:
        graphs: dict = {}
        for q in quads:
            if q.graph is not None:
                graphs.setdefault(q.graph, []).append(q)
        for g in sorted(graphs, key=term_key):
            if body:
                body.append("\n")
            body.append(f"{comp.term(g)} {{\n")
            body.extend(_turtle_body(graphs[g], comp, "    "))
            body.append("}\n")
    header = [f"@prefix {p}: {IRI(ns).n3()} .\n"
              for p, ns in sorted(comp.items) if p in comp.used]
    if header and body:
        header.append("\n")
    return "".join(header + body).encode("utf-8")


def canonical_nquads(dataset: QuadDataset) -> bytes:
    return serialize(dataset, Format.NQUADS)
