"""Parsers for N-Triples, N-Quads and the Turtle/TriG subset used by quality metadata.

Supported Turtle/TriG syntax: ``@prefix``/``@base`` and their SPARQL-style
forms, ``a``, predicate-object lists, object lists, anonymous blank node
property lists, typed and language-tagged literals, numeric and boolean
shorthand, ``GRAPH`` blocks. RDF collections and quoted triples are rejected.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Optional, Union
from urllib.parse import urljoin

from .formats import Format
from .terms import IRI, BNode, Literal, Quad, QuadDataset

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = IRI("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, format: Format) -> None:
        super().__init__(f"{format.name} line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.format = format


UNSUPPORTED_COLLECTION = "RDF collections are not supported"
UNSUPPORTED_QUOTED = "quoted triples (RDF-star) are not supported"


@dataclass(frozen=True)
class _Token:
    kind: str
    value: object
    pos: int


_WS = re.compile(r"(?:[ \t\r\n]+|#[^\n]*)+")
_IRIREF = re.compile(r'<((?:[^<>"{}|^`\\\x00-\x20]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*)>')
_BNODE = re.compile(r"_:([A-Za-z0-9_\u00C0-\U000EFFFF](?:[\w.\-\u00B7]*[\w\-\u00B7])?)")
_DOUBLE = re.compile(r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+)")
_DECIMAL = re.compile(r"[+-]?\d*\.\d+")
_INTEGER = re.compile(r"[+-]?\d+")
_LOCAL_ESC = r"\\[_~.\-!$&'()*+,;=/?#@%]"
_PNAME = re.compile(
    r"((?:[A-Za-z\u00C0-\U000EFFFF](?:[\w.\-\u00B7]*[\w\-\u00B7])?)?):"
    r"((?:[\w:]|%[0-9A-Fa-f]{2}|" + _LOCAL_ESC + r")"
    r"(?:(?:[\w.:\-\u00B7]|%[0-9A-Fa-f]{2}|" + _LOCAL_ESC + r")*"
    r"(?:[\w:\-\u00B7]|%[0-9A-Fa-f]{2}|" + _LOCAL_ESC + r"))?)?"
)
_WORD = re.compile(r"[A-Za-z]+")
_LANG = re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")
_UCHAR = re.compile(r"\\u([0-9A-Fa-f]{4})|\\U([0-9A-Fa-f]{8})")
_ECHARS = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape_uchar(text: str) -> str:
    return _UCHAR.sub(lambda m: chr(int(m.group(1) or m.group(2), 16)), text)


class _Lexer:
    def __init__(self, text: str, fmt: Format) -> None:
        self.text = text
        self.fmt = fmt
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def position(self, pos: int) -> tuple:
        line = bisect.bisect_right(self.line_starts, pos)
        return line, pos - self.line_starts[line - 1] + 1

    def error(self, message: str, pos: int) -> ParseError:
        line, col = self.position(pos)
        return ParseError(message, line, col, self.fmt)

    def tokens(self) -> list:
        text = self.text
        out: list = []
        pos = 0
        n = len(text)
        while True:
            m = _WS.match(text, pos)
            if m:
                pos = m.end()
            if pos >= n:
                out.append(_Token("EOF", None, pos))
                return out
            ch = text[pos]
            if text.startswith("<<", pos) or text.startswith(">>", pos):
                raise self.error(UNSUPPORTED_QUOTED, pos)
            if ch == "<":
                m = _IRIREF.match(text, pos)
                if not m:
                    raise self.error("malformed IRI reference", pos)
                out.append(_Token("IRI", _unescape_uchar(m.group(1)), pos))
                pos = m.end()
            elif ch in "\"'":
                value, end = self._string(pos)
                out.append(_Token("STRING", value, pos))
                pos = end
            elif ch == "@":
                m = _LANG.match(text, pos)
                if not m:
                    raise self.error("expected language tag or directive after '@'", pos)
                word = m.group(1)
                if out and out[-1].kind == "STRING":
                    out.append(_Token("LANG", word, pos))
                elif word in ("prefix", "base"):
                    out.append(_Token("@" + word, word, pos))
                else:
                    raise self.error(f"unexpected '@{word}'", pos)
                pos = m.end()
            elif text.startswith("^^", pos):
                out.append(_Token("^^", None, pos))
                pos += 2
            elif ch in ".;,[]{}":
                if ch == "." and pos + 1 < n and text[pos + 1].isdigit():
                    pos = self._number(out, pos)
                else:
                    out.append(_Token(ch, None, pos))
                    pos += 1
            elif ch in "()":
                raise self.error(UNSUPPORTED_COLLECTION, pos)
            elif ch == "_" and text.startswith("_:", pos):
                m = _BNODE.match(text, pos)
                if not m:
                    raise self.error("malformed blank node label", pos)
                out.append(_Token("BNODE", m.group(1), pos))
                pos = m.end()
            elif ch.isdigit() or ch in "+-":
                pos = self._number(out, pos)
            else:
                m = _PNAME.match(text, pos)
                if m:
                    local = re.sub(_LOCAL_ESC, lambda e: e.group(0)[1], m.group(2) or "")
                    out.append(_Token("PNAME", (m.group(1), local), pos))
                    pos = m.end()
                    continue
                m = _WORD.match(text, pos)
                if not m:
                    raise self.error(f"unexpected character {ch!r}", pos)
                word = m.group(0)
                upper = word.upper()
                if word == "a":
                    out.append(_Token("A", None, pos))
                elif word in ("true", "false"):
                    out.append(_Token("BOOLEAN", word, pos))
                elif upper in ("PREFIX", "BASE", "GRAPH"):
                    out.append(_Token(upper, None, pos))
                else:
                    raise self.error(f"unexpected word {word!r}", pos)
                pos = m.end()

    def _number(self, out: list, pos: int) -> int:
        for kind, rx in (("DOUBLE", _DOUBLE), ("DECIMAL", _DECIMAL), ("INTEGER", _INTEGER)):
            m = rx.match(self.text, pos)
            if m:
                out.append(_Token(kind, m.group(0), pos))
                return m.end()
        raise self.error("malformed number", pos)

    def _string(self, pos: int) -> tuple:
        text = self.text
        quote = text[pos]
        long = text.startswith(quote * 3, pos)
        i = pos + (3 if long else 1)
        buf: list = []
        n = len(text)
        while True:
            if i >= n:
                raise self.error("unterminated string literal", pos)
            c = text[i]
            if long and text.startswith(quote * 3, i):
                # closing delimiter; extra quotes before it belong to the content
                while text.startswith(quote * 4, i):
                    buf.append(quote)
                    i += 1
                return "".join(buf), i + 3
            if not long and c == quote:
                return "".join(buf), i + 1
            if not long and c in "\r\n":
                raise self.error("line break in short string literal", i)
            if c == "\\":
                nxt = text[i + 1: i + 2]
                if nxt in _ECHARS:
                    buf.append(_ECHARS[nxt])
                    i += 2
                    continue
                m = _UCHAR.match(text, i)
                if not m:
                    raise self.error("invalid escape sequence in string", i)
                buf.append(chr(int(m.group(1) or m.group(2), 16)))
                i = m.end()
                continue
            buf.append(c)
            i += 1


class _Parser:
    def __init__(self, text: str, fmt: Format, base: Optional[str]) -> None:
        self.fmt = fmt
        self.lexer = _Lexer(text, fmt)
        self.toks = self.lexer.tokens()
        self.i = 0
        self.base = base
        self.prefixes: dict = {}
        self.bnodes: dict = {}
        self.quads: set = set()
        self.graph: Optional[IRI] = None

    # token helpers
    @property
    def tok(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Optional[_Token] = None) -> ParseError:
        return self.lexer.error(message, (tok or self.tok).pos)

    def expect(self, kind: str, what: Optional[str] = None) -> _Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what or repr(kind)}, found {self._describe(self.tok)}")
        return self.advance()

    @staticmethod
    def _describe(tok: _Token) -> str:
        if tok.kind == "EOF":
            return "end of input"
        if tok.kind in ".;,[]{}^^":
            return repr(tok.kind)
        return tok.kind.lower()

    # terms
    def iri(self, raw: str, tok: _Token) -> IRI:
        try:
            return IRI(raw)
        except ValueError:
            pass
        if self.base is None:
            raise self.error(f"relative IRI <{raw}> and no base IRI given", tok)
        return IRI(urljoin(self.base, raw))

    def bnode(self, label: str) -> BNode:
        node = self.bnodes.get(label)
        if node is None:
            node = self.bnodes[label] = BNode()
        return node

    def pname(self, tok: _Token) -> IRI:
        prefix, local = tok.value
        if prefix not in self.prefixes:
            raise self.error(f"undeclared prefix {prefix + ':'!r}", tok)
        return self.iri(self.prefixes[prefix] + local, tok)

    def emit(self, s, p, o) -> None:
        self.quads.add(Quad(s, p, o, self.graph))

    # grammar: N-Triples / N-Quads
    def parse_line_based(self) -> None:
        with_graph = self.fmt is Format.NQUADS
        while self.tok.kind != "EOF":
            s = self.nt_term(("IRI", "BNODE"), "subject")
            p = self.nt_term(("IRI",), "predicate")
            o = self.nt_term(("IRI", "BNODE", "STRING"), "object")
            g = None
            if with_graph and self.tok.kind != ".":
                g = self.nt_term(("IRI",), "graph name")
            self.expect(".", "'.'")
            self.quads.add(Quad(s, p, o, g))

    def nt_term(self, kinds: tuple, role: str):
        tok = self.tok
        if tok.kind not in kinds:
            if tok.kind == "PNAME":
                raise self.error(f"prefixed names are not allowed in {self.fmt.name}")
            raise self.error(f"expected {role}, found {self._describe(tok)}")
        self.advance()
        if tok.kind == "IRI":
            try:
                return IRI(tok.value)
            except ValueError:
                raise self.error(f"relative IRI <{tok.value}> not allowed in {self.fmt.name}", tok)
        if tok.kind == "BNODE":
            return self.bnode(tok.value)
        if self.tok.kind == "LANG":
            return Literal(tok.value, language=self.advance().value)
        if self.tok.kind == "^^":
            self.advance()
            dt = self.expect("IRI", "datatype IRI")
            try:
                return Literal(tok.value, IRI(dt.value))
            except ValueError:
                raise self.error(f"relative datatype IRI <{dt.value}>", dt)
        return Literal(tok.value)

    # grammar: Turtle / TriG
    def parse_turtle_family(self) -> None:
        trig = self.fmt is Format.TRIG
        while self.tok.kind != "EOF":
            kind = self.tok.kind
            if kind in ("@prefix", "@base", "PREFIX", "BASE"):
                self.directive()
            elif trig:
                self.trig_block()
            else:
                self.triples()
                self.expect(".", "'.' after triples")

    def directive(self) -> None:
        tok = self.advance()
        if tok.kind in ("@prefix", "PREFIX"):
            name = self.expect("PNAME", "prefix name")
            prefix, local = name.value
            if local:
                raise self.error("prefix declaration must end with ':'", name)
            iri_tok = self.expect("IRI", "namespace IRI")
            self.prefixes[prefix] = self.iri(iri_tok.value, iri_tok).value
        else:
            iri_tok = self.expect("IRI", "base IRI")
            self.base = self.iri(iri_tok.value, iri_tok).value
        if tok.kind.startswith("@"):
            self.expect(".", "'.' after directive")

    def trig_block(self) -> None:
        tok = self.tok
        if tok.kind == "{":
            self.wrapped_graph(None)
            return
        if tok.kind == "GRAPH":
            self.advance()
            self.wrapped_graph(self.graph_label())
            return
        if tok.kind in ("IRI", "PNAME") and self.toks[self.i + 1].kind == "{":
            self.wrapped_graph(self.graph_label())
            return
        if tok.kind == "BNODE" and self.toks[self.i + 1].kind == "{":
            raise self.error("blank node graph names are not supported")
        self.triples()
        self.expect(".", "'.' after triples")

    def graph_label(self) -> IRI:
        tok = self.tok
        if tok.kind == "IRI":
            self.advance()
            return self.iri(tok.value, tok)
        if tok.kind == "PNAME":
            self.advance()
            return self.pname(tok)
        raise self.error("expected graph name IRI")

    def wrapped_graph(self, graph: Optional[IRI]) -> None:
        self.expect("{", "'{'")
        self.graph = graph
        while self.tok.kind != "}":
            self.triples()
            if self.tok.kind == ".":
                self.advance()
            elif self.tok.kind != "}":
                raise self.error(f"expected '.' or '}}', found {self._describe(self.tok)}")
        self.advance()
        self.graph = None

    def triples(self) -> None:
        if self.tok.kind == "[":
            subject = self.blank_property_list()
            if self.tok.kind in (".", "}", "EOF"):
                return
            self.predicate_object_list(subject)
        else:
            subject = self.subject()
            self.predicate_object_list(subject)

    def subject(self):
        tok = self.tok
        if tok.kind == "IRI":
            self.advance()
            return self.iri(tok.value, tok)
        if tok.kind == "PNAME":
            self.advance()
            return self.pname(tok)
        if tok.kind == "BNODE":
            self.advance()
            return self.bnode(tok.value)
        raise self.error(f"expected subject, found {self._describe(tok)}")

    def predicate(self) -> IRI:
        tok = self.tok
        if tok.kind == "A":
            self.advance()
            return RDF_TYPE
        if tok.kind == "IRI":
            self.advance()
            return self.iri(tok.value, tok)
        if tok.kind == "PNAME":
            self.advance()
            return self.pname(tok)
        raise self.error(f"expected predicate, found {self._describe(tok)}")

    def predicate_object_list(self, subject) -> None:
        while True:
            p = self.predicate()
            while True:
                self.emit(subject, p, self.object())
                if self.tok.kind != ",":
                    break
                self.advance()
            if self.tok.kind != ";":
                return
            while self.tok.kind == ";":
                self.advance()
            if self.tok.kind in (".", "]", "}", "EOF"):
                return

    def blank_property_list(self) -> BNode:
        self.expect("[", "'['")
        node = BNode()
        if self.tok.kind != "]":
            self.predicate_object_list(node)
        self.expect("]", "']'")
        return node

    def object(self):
        tok = self.tok
        kind = tok.kind
        if kind == "[":
            return self.blank_property_list()
        if kind in ("IRI", "PNAME", "BNODE"):
            return self.subject()
        self.advance()
        if kind == "STRING":
            if self.tok.kind == "LANG":
                return Literal(tok.value, language=self.advance().value)
            if self.tok.kind == "^^":
                self.advance()
                dt_tok = self.tok
                if dt_tok.kind == "IRI":
                    self.advance()
                    dt = self.iri(dt_tok.value, dt_tok)
                elif dt_tok.kind == "PNAME":
                    self.advance()
                    dt = self.pname(dt_tok)
                else:
                    raise self.error("expected datatype IRI after '^^'")
                return Literal(tok.value, dt)
            return Literal(tok.value)
        if kind == "INTEGER":
            return Literal(tok.value, XSD + "integer")
        if kind == "DECIMAL":
            return Literal(tok.value, XSD + "decimal")
        if kind == "DOUBLE":
            return Literal(tok.value, XSD + "double")
        if kind == "BOOLEAN":
            return Literal(tok.value, XSD + "boolean")
        raise self.error(f"expected object, found {self._describe(tok)}", tok)


def parse_document(data: Union[bytes, str], format: Union[Format, str],
                   base: Optional[str] = None) -> QuadDataset:
    """Parse an RDF document into a :class:`QuadDataset`.

    Raises :class:`ParseError` at the first syntax violation. Relative IRIs
    are only accepted when ``base`` is given or the document declares one.
    """
    fmt = Format.parse(format)
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = data[: exc.start].decode("utf-8")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise ParseError("input is not valid UTF-8", line, col, fmt) from None
    else:
        text = data
    if text.startswith("\ufeff"):
        text = text[1:]
    if base is not None:
        IRI(base)
    parser = _Parser(text, fmt, base)
    if fmt in (Format.NTRIPLES, Format.NQUADS):
        parser.parse_line_based()
    else:
        parser.parse_turtle_family()
    return QuadDataset(parser.quads, parser.prefixes)
