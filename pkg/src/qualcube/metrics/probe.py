"""HTTP probing with RDF content negotiation.

Every failure is folded into a :class:`ProbeOutcome`; nothing raises to the
caller. Each attempt has a hard deadline of ``request_timeout`` covering
connect, redirects and body download.
"""

from __future__ import annotations

import json
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional
from urllib.parse import quote, urljoin, urlsplit

import httpx

from ..rdf import Format, ParseError, parse_document

RDF_ACCEPT = "text/turtle, application/trig;q=0.9, application/n-triples;q=0.8"
SPARQL_ACCEPT = "application/sparql-results+json, application/sparql-results+xml;q=0.9"
ASK_QUERY = "ASK {}"
MAX_REDIRECTS = 5
_REDIRECTS = {301, 302, 303, 307, 308}
_SPARQL_NS = "{http://www.w3.org/2005/sparql-results#}"


@dataclass(frozen=True)
class ProbeSettings:
    connect_timeout: float = 5.0
    request_timeout: float = 10.0
    max_parallel_probes: int = 4
    max_sample_size: int = 20
    retry_count: int = 0
    endpoint_url: Optional[str] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.connect_timeout <= 0 or self.request_timeout <= 0:
            raise ValueError("probe timeouts must be positive")
        if self.max_parallel_probes < 1:
            raise ValueError("max_parallel_probes must be at least 1")
        if self.max_sample_size < 1:
            raise ValueError("max_sample_size must be at least 1")
        if self.retry_count < 0:
            raise ValueError("retry_count must be non-negative")
        if self.endpoint_url is not None and urlsplit(self.endpoint_url).scheme not in ("http", "https"):
            raise ValueError(f"endpoint URL must be http(s): {self.endpoint_url!r}")


class ProbeStatus(Enum):
    OK = "ok"
    HTTP_ERROR = "http-error"
    TIMEOUT = "timeout"
    CONNECT_FAILURE = "connect-failure"
    UNPARSEABLE_BODY = "unparseable-body"


@dataclass(frozen=True)
class ProbeOutcome:
    url: str
    status: ProbeStatus
    latency: Optional[float] = None
    media_type: Optional[str] = None
    http_status: Optional[int] = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status is ProbeStatus.OK

    @property
    def answered(self) -> bool:
        """The server produced an HTTP response."""
        return self.status in (ProbeStatus.OK, ProbeStatus.HTTP_ERROR, ProbeStatus.UNPARSEABLE_BODY)


# (body, media type, final url) -> (ok, detail)
BodyCheck = Callable[[bytes, Optional[str], str], tuple]


def rdf_body_check(body: bytes, media_type: Optional[str], url: str) -> tuple:
    fmt = Format.from_media_type(media_type)
    if fmt is None:
        return False, f"not an RDF media type: {media_type or 'none'}"
    try:
        parse_document(body, fmt, base=url)
    except ParseError as exc:
        return False, f"unparseable {fmt.name}: {exc.message}"
    except ValueError as exc:
        return False, f"unparseable {fmt.name}: {exc}"
    return True, ""


def sparql_boolean_check(body: bytes, media_type: Optional[str], url: str) -> tuple:
    """Accept a SPARQL boolean result document in JSON or XML."""
    mt = (media_type or "").split(";", 1)[0].strip().lower()
    if "json" in mt or not mt.endswith("xml"):
        try:
            doc = json.loads(body.decode("utf-8"))
            if isinstance(doc, dict) and isinstance(doc.get("boolean"), bool):
                return True, ""
        except (UnicodeDecodeError, ValueError):
            pass
    try:
        root = ET.fromstring(body)
        node = root.find(f"{_SPARQL_NS}boolean")
        if node is not None and (node.text or "").strip() in ("true", "false"):
            return True, ""
    except ET.ParseError:
        pass
    return False, "no SPARQL boolean result"


def ask_url(endpoint: str) -> str:
    sep = "&" if "?" in endpoint else "?"
    return f"{endpoint}{sep}query={quote(ASK_QUERY, safe='')}"


def _attempt(url: str, accept: str, settings: ProbeSettings, check: Optional[BodyCheck]) -> ProbeOutcome:
    current = url
    hops = 0

    def elapsed() -> float:
        return time.perf_counter() - start

    with httpx.Client(follow_redirects=False) as client:
        # timing starts once the client exists; building its TLS context is not latency
        start = time.perf_counter()
        deadline = start + settings.request_timeout
        while True:
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                return ProbeOutcome(url, ProbeStatus.TIMEOUT, elapsed(), detail="timeout")
            timeout = httpx.Timeout(remaining, connect=min(settings.connect_timeout, remaining))
            connected = False
            try:
                with client.stream("GET", current, headers={"Accept": accept}, timeout=timeout) as resp:
                    connected = True
                    code = resp.status_code
                    if code in _REDIRECTS and "location" in resp.headers:
                        if hops >= MAX_REDIRECTS:
                            return ProbeOutcome(url, ProbeStatus.HTTP_ERROR, elapsed(),
                                                http_status=code, detail="redirect limit")
                        hops += 1
                        current = urljoin(str(resp.url), resp.headers["location"])
                        continue
                    body = bytearray()
                    for chunk in resp.iter_bytes():
                        body += chunk
                        if time.perf_counter() > deadline:
                            return ProbeOutcome(url, ProbeStatus.TIMEOUT, elapsed(), detail="timeout")
                    latency = elapsed()
                    media_type = resp.headers.get("content-type")
                    if not 200 <= code < 300:
                        return ProbeOutcome(url, ProbeStatus.HTTP_ERROR, latency, media_type,
                                            code, f"HTTP {code}")
                    if check is not None:
                        ok, detail = check(bytes(body), media_type, str(resp.url))
                        if not ok:
                            return ProbeOutcome(url, ProbeStatus.UNPARSEABLE_BODY, latency,
                                                media_type, code, detail)
                    return ProbeOutcome(url, ProbeStatus.OK, latency, media_type, code)
            except httpx.TimeoutException:
                return ProbeOutcome(url, ProbeStatus.TIMEOUT, elapsed(), detail="timeout")
            except httpx.ConnectError as exc:
                return ProbeOutcome(url, ProbeStatus.CONNECT_FAILURE, None,
                                    detail=f"connection failed: {exc}")
            except (httpx.HTTPError, OSError) as exc:
                return ProbeOutcome(url, ProbeStatus.CONNECT_FAILURE,
                                    elapsed() if connected else None, detail=str(exc) or type(exc).__name__)


def probe_http(url: str, accept: str = RDF_ACCEPT, settings: Optional[ProbeSettings] = None,
               check: Optional[BodyCheck] = rdf_body_check) -> ProbeOutcome:
    """GET ``url`` following up to five redirects; retries timeouts and connect failures."""
    settings = settings or ProbeSettings()
    if urlsplit(url).scheme not in ("http", "https"):
        return ProbeOutcome(url, ProbeStatus.CONNECT_FAILURE, detail="not an http(s) URL")
    outcome = None
    for _ in range(settings.retry_count + 1):
        try:
            outcome = _attempt(url, accept, settings, check)
        except Exception as exc:  # noqa: BLE001 - the contract is "never raise"
            outcome = ProbeOutcome(url, ProbeStatus.CONNECT_FAILURE, detail=repr(exc))
        if outcome.status not in (ProbeStatus.TIMEOUT, ProbeStatus.CONNECT_FAILURE):
            break
    return outcome
