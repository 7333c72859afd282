"""Generators, fixtures builders and a mock HTTP server shared by the tests."""

import json
import random
import threading
import time
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit

from qualcube.metrics import MetricResult, ProbeOutcome, ProbeStatus, shipped_descriptors
from qualcube.metrics.base import boolean_literal, double_literal
from qualcube.namespaces import LABEL, XSD
from qualcube.qgraph import build_quality_graph
from qualcube.rdf import IRI, BNode, Literal, Quad, QuadDataset

LOCAL = "http://data.example.org/"
T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)

VALID = {
    XSD.integer: ["1", "-5", "+0", "42"],
    XSD.decimal: ["1.5", ".5", "-2.", "7"],
    XSD.double: ["1e3", "INF", "NaN", "-0.5E-2", "3"],
    XSD.boolean: ["true", "false", "0", "1"],
    XSD.date: ["2024-02-29", "2023-12-31Z", "2000-02-29"],
    XSD.dateTime: ["2024-01-01T00:00:00Z", "2023-06-30T23:59:59.5+02:00", "2020-02-29T12:00:00"],
}
INVALID = {
    XSD.integer: ["1.0", "x", "", "1 "],
    XSD.decimal: ["1e3", "abc", "1.2.3"],
    XSD.double: ["1,5", "inf", "e3"],
    XSD.boolean: ["yes", "TRUE", "2"],
    XSD.date: ["2023-02-29", "2023-13-01", "1900-02-29"],
    XSD.dateTime: ["2024-01-01", "2024-01-01T25:00:00", "2024-04-31T00:00:00Z"],
}


def literal_pool():
    """(literal, valid or None when unchecked) pairs."""
    out = []
    for dt, lexes in VALID.items():
        out += [(Literal(x, dt), True) for x in lexes]
    for dt, lexes in INVALID.items():
        out += [(Literal(x, dt), False) for x in lexes]
    out += [(Literal("plain"), None), (Literal("hallo", language="de"), None),
            (Literal("12", XSD.token), None)]
    return out


def random_dataset(rng: random.Random, n_quads: int, local: str = LOCAL,
                   graphs: bool = True) -> tuple:
    """Random dataset of exactly ``n_quads`` quads plus its literal validity table."""
    subjects = [IRI(f"{local}r{i}") for i in range(max(3, n_quads // 6))]
    subjects += [IRI(f"http://other.example.com/s{i}") for i in range(3)]
    bnodes = [BNode(f"g{i}") for i in range(4)]
    predicates = [IRI(f"{local}p{i}") for i in range(6)] + [LABEL]
    externals = [IRI(f"http://ext{i}.example.net/x{i}") for i in range(8)]
    names = [None, IRI(f"{local}graph/a"), IRI(f"{local}graph/b")] if graphs else [None]
    pool = literal_pool()
    validity = {}
    quads = set()
    while len(quads) < n_quads:
        s = rng.choice(subjects + bnodes)
        p = rng.choice(predicates)
        roll = rng.random()
        if p == LABEL or roll < 0.4:
            lit, ok = rng.choice(pool)
            o = lit
            validity[lit] = ok
        elif roll < 0.7:
            o = rng.choice(subjects)
        elif roll < 0.9:
            o = rng.choice(externals)
        else:
            o = rng.choice(bnodes)
        quads.add(Quad(s, p, o, rng.choice(names)))
    return QuadDataset(quads), validity


def result(name: str, value, unit=None):
    desc = shipped_descriptors()[name]
    if isinstance(value, bool):
        lit = boolean_literal(value)
    elif isinstance(value, Literal):
        lit = value
    else:
        lit = double_literal(value)
    return desc, MetricResult(desc.metric_class, lit, unit or desc.unit_measure)


def quality_graph(values: dict, computed_on: str = "http://example.org/dataset/v1",
                  when: datetime = T0, graph: str = "http://example.org/qg") -> QuadDataset:
    results = [result(n, v) for n, v in values.items()]
    return build_quality_graph(results, IRI(computed_on), when, IRI(graph))


FULL_VALUES = {
    "datatype_consistency": 0.75,
    "labeled_resource_ratio": 0.5,
    "external_linkage_ratio": 0.25,
    "rdf_availability": True,
    "endpoint_availability": True,
    "endpoint_latency": 0.12,
    "dereferenceability_ratio": 0.9,
}


def stable_prober(up=lambda url: True, latency=0.01):
    """Offline stand-in for ``probe_http`` deciding outcomes from the URL."""
    calls = []
    lock = threading.Lock()

    def prober(url, accept, settings, check):
        with lock:
            calls.append(url)
        if up(url):
            return ProbeOutcome(url, ProbeStatus.OK, latency, "text/turtle", 200)
        return ProbeOutcome(url, ProbeStatus.HTTP_ERROR, latency, "text/plain", 404, "HTTP 404")

    prober.calls = calls
    return prober


# ---- mock HTTP server ---------------------------------------------------------------

VALID_TURTLE = b"@prefix ex: <http://example.org/> .\nex:a ex:p ex:b .\n"


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):
        pass

    def _send(self, code, body=b"", ctype="text/plain", headers=()):
        self.send_response(code)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        for k, v in headers:
            self.send_header(k, v)
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        parts = urlsplit(self.path)
        path = parts.path
        self.server.hits.append((path, self.headers.get("Accept")))
        if path in ("/ok.ttl", "/data/ok") or path.startswith("/data/good"):
            self._send(200, VALID_TURTLE, "text/turtle; charset=utf-8")
        elif path == "/ok.nt":
            self._send(200, b"<http://example.org/a> <http://example.org/p> \"x\" .\n",
                       "application/n-triples")
        elif path == "/slow":
            time.sleep(self.server.slow_delay)
            self._send(200, VALID_TURTLE, "text/turtle")
        elif path == "/bad.ttl" or path.startswith("/data/bad"):
            self._send(200, b"this is { not turtle", "text/turtle")
        elif path == "/html":
            self._send(200, b"<html></html>", "text/html")
        elif path.startswith("/redirect/"):
            n = int(path.rsplit("/", 1)[1])
            target = "/ok.ttl" if n <= 1 else f"/redirect/{n - 1}"
            self._send(303, b"", headers=[("Location", target)])
        elif path == "/sparql":
            time.sleep(self.server.sparql_delay)
            body = json.dumps({"head": {}, "boolean": True}).encode()
            self._send(200, body, "application/sparql-results+json")
        elif path == "/sparql-xml":
            body = (b'<?xml version="1.0"?><sparql xmlns="http://www.w3.org/2005/sparql-results#">'
                    b"<head/><boolean>true</boolean></sparql>")
            self._send(200, body, "application/sparql-results+xml")
        elif path == "/broken-sparql":
            self._send(500, b"boom")
        else:
            self._send(404, b"not found")


class MockServer:
    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self.httpd.daemon_threads = True
        self.httpd.hits = []
        self.httpd.slow_delay = 1.0
        self.httpd.sparql_delay = 0.1
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def url(self, path: str) -> str:
        return self.base + path

    @property
    def hits(self):
        return self.httpd.hits

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


def later(days: int) -> datetime:
    return T0 + timedelta(days=days)



# ---- targeted single-statement mutations of a valid quality graph ---------------------

def _one(data: QuadDataset, **pattern) -> Quad:
    from qualcube.rdf import term_key
    return min(data.match(**pattern), key=lambda q: [term_key(t) for t in q.terms()])


def _drop(data: QuadDataset, quad: Quad) -> QuadDataset:
    return QuadDataset(data.quads - {quad}, data.prefixes)


def _swap(data: QuadDataset, old: Quad, new: Quad) -> QuadDataset:
    return QuadDataset((data.quads - {old}) | {new}, data.prefixes)


def mutations(data: QuadDataset, g: IRI) -> dict:
    """Code -> mutated copy expected to yield exactly that violation code."""
    from qualcube import namespaces as ns
    from qualcube.namespaces import DQM

    metric = _one(data, predicate=ns.TYPE, obj=DQM.RDFAvailabilityMetric).subject
    boolean_obs = _one(data, predicate=ns.METRIC_PROP, obj=metric).subject
    value = _one(data, subject=boolean_obs, predicate=ns.VALUE)
    return {
        "V1": _drop(data, Quad(g, ns.TYPE, ns.QUALITY_GRAPH, g)),
        "V2": _drop(data, Quad(g, ns.QB_STRUCTURE, ns.DSD, g)),
        "V3": _drop(data, _one(data, predicate=ns.DC_DATE)),
        "V4": _swap(data, value, Quad(value.subject, value.predicate, Literal("1.0E0", XSD.double), g)),
        "V5": _drop(data, _one(data, predicate=ns.TYPE, obj=DQM.RDFAvailabilityMetric)),
        "V6": _drop(data, _one(data, predicate=ns.HAS_OBSERVATION)),
        "V7": _drop(data, _one(data, obj=metric, predicate=DQM.hasAvailabilityMetric)),
    }


# ---- randomized grouping fixtures and a brute-force oracle ---------------------------------

def _subclass_quads(rng, prefix, n, root, kind):
    from qualcube import namespaces as ns
    names = [IRI(f"http://fixture.example.org/{prefix}{i}") for i in range(n)]
    quads = []
    for i, c in enumerate(names):
        parent = root if i == 0 or rng.random() < 0.5 else rng.choice(names[:i])
        quads.append(Quad(c, kind, parent))
    return names, quads


def group_fixture(rng: random.Random, max_quads: int = 500) -> tuple:
    """Random TBox + ABox: ``(dataset, tbox quads, query classes)``."""
    from qualcube import namespaces as ns
    sc, sp = ns.SUBCLASS_OF, ns.SUBPROPERTY_OF
    cats, tq = _subclass_quads(rng, "Cat", rng.randint(1, 4), ns.CATEGORY, sc)
    dims, q2 = _subclass_quads(rng, "Dim", rng.randint(1, 5), ns.DIMENSION, sc)
    mets, q3 = _subclass_quads(rng, "Met", rng.randint(1, 6), ns.METRIC, sc)
    hds, q4 = _subclass_quads(rng, "hasDim", rng.randint(1, 3), ns.HAS_DIMENSION, sp)
    hms, q5 = _subclass_quads(rng, "hasMet", rng.randint(1, 3), ns.HAS_METRIC, sp)
    tbox = tq + q2 + q3 + q4 + q5
    other = IRI("http://fixture.example.org/unrelated")

    base = "http://fixture.example.org/i/"
    abox = set()
    ci = [IRI(f"{base}c{i}") for i in range(rng.randint(0, 4))]
    di = [IRI(f"{base}d{i}") for i in range(rng.randint(0, 6))]
    mi = [IRI(f"{base}m{i}") for i in range(rng.randint(0, 8))]
    for insts, classes in ((ci, cats), (di, dims), (mi, mets)):
        for x in insts:
            abox.add(Quad(x, ns.TYPE, rng.choice(classes)))
    budget = max_quads - len(tbox)
    target = rng.randint(10, max(11, budget))
    n_obs = 0
    for _ in range(4 * target):
        if len(abox) >= target:
            break
        roll = rng.random()
        if roll < 0.25 and ci and di:
            abox.add(Quad(rng.choice(ci), rng.choice(hds + [other]), rng.choice(di)))
        elif roll < 0.5 and di and mi:
            abox.add(Quad(rng.choice(di), rng.choice(hms + [other]), rng.choice(mi)))
        elif roll < 0.9 and mi:
            n_obs += 1
            abox.add(Quad(rng.choice(mi), ns.HAS_OBSERVATION, IRI(f"{base}obs{n_obs}")))
        else:
            abox.add(Quad(IRI(f"{base}junk{rng.randint(0, 9)}"), other, IRI(f"{base}obs{n_obs}")))
    tbox_ds = QuadDataset(tbox)
    classes = cats + dims + mets + [ns.CATEGORY, ns.DIMENSION, ns.METRIC]
    return QuadDataset(abox), tbox_ds, classes


def _star(pairs: set) -> set:
    """Reflexive-transitive closure of a relation, by naive fixpoint."""
    nodes = {a for a, _ in pairs} | {b for _, b in pairs}
    rel = set(pairs) | {(n, n) for n in nodes}
    while True:
        extra = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
        if not extra:
            return rel
        rel |= extra


def brute_force_group(abox: QuadDataset, tbox: QuadDataset, cls: IRI) -> set:
    """Enumerate (instance, property, ..., metric instance, observation) chains over the
    fully materialized closure."""
    from qualcube import namespaces as ns
    sc = _star({(q.subject, q.object) for q in tbox if q.predicate == ns.SUBCLASS_OF} | {(cls, cls)})
    sp = _star({(q.subject, q.object) for q in tbox if q.predicate == ns.SUBPROPERTY_OF}
               | {(ns.HAS_OBSERVATION, ns.HAS_OBSERVATION)})
    types = {(q.subject, sup) for q in abox if q.predicate == ns.TYPE
             for sub, sup in sc if sub == q.object}
    edges = {(q.subject, sup, q.object) for q in abox for sub, sup in sp if sub == q.predicate}
    down = {(s, o) for s, p, o in edges if p in (ns.HAS_DIMENSION, ns.HAS_METRIC)}
    obs = {(s, o) for s, p, o in edges if p == ns.HAS_OBSERVATION}
    reach = _star(down)
    starts = {x for x, c in types if c == cls}
    nodes = starts | {b for a, b in reach if a in starts}
    return {o for m, o in obs if m in nodes}


# ---- chart structure ------------------------------------------------------------------------

SVG_NS = "{http://www.w3.org/2000/svg}"


def svg_elements(svg: bytes, tag: str, cls: str) -> list:
    """Elements of ``tag`` carrying ``cls`` in their class attribute; parsing checks well-formedness."""
    import xml.etree.ElementTree as ET
    root = ET.fromstring(svg)
    return [e for e in root.iter(SVG_NS + tag) if cls in e.get("class", "").split()]


def expected_counts(spec) -> dict:
    """Element counts each chart kind must produce for ``spec``."""
    from qualcube.charts import ChartKind
    present = sum(v is not None for row in spec.values for v in row)
    if spec.kind in (ChartKind.HORIZONTAL_BAR, ChartKind.VERTICAL_BAR):
        return {("g", "cell"): len(spec.rows) * len(spec.columns), ("rect", "bar"): present}
    if spec.kind is ChartKind.LINES:
        series = sum(any(row[c] is not None for row in spec.values) for c in range(len(spec.columns)))
        return {("polyline", "line"): series, ("circle", "marker"): present}
    rows = sum(any(v is not None for v in row) for row in spec.values)
    return {("polygon", "dataset"): rows, ("circle", "marker"): present}


def svg_values(svg: bytes) -> list:
    import xml.etree.ElementTree as ET
    return sorted(float(e.get("data-value")) for e in ET.fromstring(svg).iter() if e.get("data-value"))


def csv_values(data: bytes) -> list:
    import csv
    import io
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    return sorted(float(cell) for row in rows[1:] for cell in row[1:] if cell)


# ---- command line replay -----------------------------------------------------------------

def write_version(path, rng: random.Random, n_quads: int) -> None:
    from qualcube.rdf import Format, serialize
    data, _ = random_dataset(rng, n_quads, graphs=False)
    path.write_bytes(serialize(data, Format.TURTLE))


def uc1_replay(tmp, run_cli) -> dict:
    """Assess two versions, merge, validate and plot; returns exit codes and the SVG."""
    codes = {}
    runs = []
    for i in (1, 2):
        src = tmp / f"v{i}.ttl"
        write_version(src, random.Random(i), 120)
        out = tmp / f"run{i}.trig"
        codes[f"assess{i}"] = run_cli([
            "assess", "-i", str(src), "-o", str(out), "--computed-on", f"{LOCAL}dataset/v{i}",
            "--clock", f"2024-0{i}-01T00:00:00Z", "--seed", "1"])
        runs.append(out)
    merged = tmp / "merged.trig"
    graph = "http://example.org/quality"
    codes["merge"] = run_cli(["merge", "-i", str(runs[0]), "-i", str(runs[1]), "--graph-iri", graph,
                              "-o", str(merged)])
    codes["validate"] = run_cli(["validate", "-i", str(merged)])
    svg = tmp / "trend.svg"
    codes["chart"] = run_cli(["chart", "-i", str(merged), "--kind", "lines", "-o", str(svg),
                              "--csv", str(tmp / "trend.csv")])
    return {"codes": codes, "svg": svg.read_bytes() if svg.exists() else b"", "merged": merged}
