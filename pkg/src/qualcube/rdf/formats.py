from __future__ import annotations

from enum import Enum
from pathlib import PurePath
from typing import Optional, Union


class Format(Enum):
    NTRIPLES = "nt"
    NQUADS = "nq"
    TURTLE = "ttl"
    TRIG = "trig"

    @property
    def media_type(self) -> str:
        return _MEDIA_TYPES[self]

    @property
    def supports_graphs(self) -> bool:
        return self in (Format.NQUADS, Format.TRIG)

    @classmethod
    def parse(cls, name: Union[str, "Format"]) -> "Format":
        if isinstance(name, Format):
            return name
        key = name.strip().lower()
        try:
            return _ALIASES[key]
        except KeyError:
            raise ValueError(f"unknown RDF format: {name!r}") from None

    @classmethod
    def from_path(cls, path: Union[str, PurePath]) -> "Format":
        suffix = PurePath(path).suffix.lstrip(".").lower()
        try:
            return _ALIASES[suffix]
        except KeyError:
            raise ValueError(f"cannot infer RDF format from file name {str(path)!r}") from None

    @classmethod
    def from_media_type(cls, media_type: Optional[str]) -> Optional["Format"]:
        if not media_type:
            return None
        base = media_type.split(";", 1)[0].strip().lower()
        for fmt, mt in _MEDIA_TYPES.items():
            if mt == base:
                return fmt
        return None


_MEDIA_TYPES = {
    Format.NTRIPLES: "application/n-triples",
    Format.NQUADS: "application/n-quads",
    Format.TURTLE: "text/turtle",
    Format.TRIG: "application/trig",
}

_ALIASES = {
    "nt": Format.NTRIPLES, "ntriples": Format.NTRIPLES, "n-triples": Format.NTRIPLES,
    "nq": Format.NQUADS, "nquads": Format.NQUADS, "n-quads": Format.NQUADS,
    "ttl": Format.TURTLE, "turtle": Format.TURTLE,
    "trig": Format.TRIG,
}
