"""Blank node isomorphism between datasets.

A plain backtracking search over bijections, pruned by per-node degree
signatures. It is a test oracle for small datasets and deliberately shares
nothing with the canonical labelling used by the serializer.
"""

from __future__ import annotations

from collections import Counter

from .terms import BNode, Quad, QuadDataset


def _bnodes(q: Quad) -> list:
    return [t for t in (q.subject, q.object) if isinstance(t, BNode)]


def _signature(node: BNode, quads: list) -> tuple:
    counts: Counter = Counter()
    for q in quads:
        if q.subject == node:
            other = q.object if not isinstance(q.object, BNode) else ("bnode", q.object == node)
            counts[("s", q.predicate, other, q.graph)] += 1
        if q.object == node:
            other = q.subject if not isinstance(q.subject, BNode) else ("bnode", q.subject == node)
            counts[("o", q.predicate, other, q.graph)] += 1
    return tuple(sorted(counts.items(), key=repr))


def isomorphic(a: QuadDataset, b: QuadDataset) -> bool:
    """True iff a blank node bijection maps ``a`` exactly onto ``b`` (graph by graph)."""
    if len(a) != len(b):
        return False
    a_ground = {q for q in a.quads if not _bnodes(q)}
    b_ground = {q for q in b.quads if not _bnodes(q)}
    if a_ground != b_ground:
        return False
    a_rest = [q for q in a.quads if _bnodes(q)]
    b_rest = [q for q in b.quads if _bnodes(q)]
    b_set = set(b_rest)

    a_nodes: dict = {}
    for q in a_rest:
        for n in _bnodes(q):
            a_nodes.setdefault(n, []).append(q)
    b_nodes: dict = {}
    for q in b_rest:
        for n in _bnodes(q):
            b_nodes.setdefault(n, []).append(q)
    if len(a_nodes) != len(b_nodes):
        return False

    a_sig = {n: _signature(n, qs) for n, qs in a_nodes.items()}
    b_sig = {n: _signature(n, qs) for n, qs in b_nodes.items()}
    if Counter(a_sig.values()) != Counter(b_sig.values()):
        return False
    by_sig: dict = {}
    for n, sig in b_sig.items():
        by_sig.setdefault(sig, []).append(n)

    order = sorted(a_nodes, key=lambda n: (len(by_sig[a_sig[n]]), n.label))
    mapping: dict = {}
    used: set = set()

    def consistent(node: BNode) -> bool:
        for q in a_nodes[node]:
            s, o = q.subject, q.object
            if isinstance(s, BNode):
                if s not in mapping:
                    continue
                s = mapping[s]
            if isinstance(o, BNode):
                if o not in mapping:
                    continue
                o = mapping[o]
            if Quad(s, q.predicate, o, q.graph) not in b_set:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        node = order[i]
        for cand in by_sig[a_sig[node]]:
            if cand in used:
                continue
            mapping[node] = cand
            used.add(cand)
            if consistent(node) and search(i + 1):
                return True
            del mapping[node]
            used.discard(cand)
        return False

    return search(0)
