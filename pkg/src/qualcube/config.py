"""TOML configuration for the command line tool.

A configuration file may hold any of these keys (all optional)::

    input = "data.ttl"            # string or list of strings
    output = "quality.trig"
    format = "trig"               # ttl, trig, nq, nt
    graph_iri = "http://example.org/quality/run1"
    computed_on = "http://example.org/dataset/v1"
    metrics = ["datatype_consistency", "labeled_resource_ratio"]
    endpoint = "http://example.org/sparql"
    seed = 0
    clock = "2024-01-01T00:00:00Z"
    kind = "lines"                # hbar, vbar, radar, lines
    extensions = ["my-metrics.ttl"]

    [probe]
    connect_timeout = 5.0
    request_timeout = 10.0
    max_parallel_probes = 4
    max_sample_size = 20
    retry_count = 0

    [ranking]
    normalization = "minmax"      # none, minmax
    missing = "zero"              # zero, exclude
    [ranking.weights]
    datatype_consistency = 1.0

    [thresholds]
    labeled_resource_ratio = 0.5

Weight and threshold keys are short metric names, prefixed names such as
``dqm:LabelledResourcesMetric`` or full IRIs. The ``--weights`` and
``--thresholds`` files use the same layout (a ``[ranking]`` or top-level
``weights`` table, and a ``[thresholds]`` table respectively).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analytics import MissingPolicy, Normalization, RankingProfile
from .metrics import ProbeSettings
from .metrics.engine import shipped_descriptors
from .namespaces import PREFIXES
from .rdf import IRI

CONFIG_ENV = "QUALCUBE_CONFIG"

TOP_LEVEL = {
    "input": (str, list), "output": str, "format": str, "graph_iri": str, "computed_on": str,
    "metrics": (str, list), "endpoint": str, "seed": int, "clock": str, "kind": str,
    "extensions": list, "probe": dict, "ranking": dict, "thresholds": dict, "weights": dict,
}
PROBE_KEYS = {"connect_timeout", "request_timeout", "max_parallel_probes", "max_sample_size",
              "retry_count"}
RANKING_KEYS = {"normalization", "missing", "weights"}
NORMALIZATIONS = {"none": Normalization.NONE, "minmax": Normalization.MIN_MAX_WITHIN_COHORT}
MISSING = {"zero": MissingPolicy.SCORE_ZERO, "exclude": MissingPolicy.EXCLUDE}


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    values: dict = field(default_factory=dict)
    source: Optional[Path] = None

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def probe_settings(self, **overrides) -> ProbeSettings:
        merged = dict(self.values.get("probe", {}))
        merged.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return ProbeSettings(**merged)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid probe settings: {exc}") from None


def read_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _check_keys(table: dict, allowed, where: str) -> None:
    for key in table:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError(f"unknown configuration key '{prefix}{key}'")


def validate_config(values: dict) -> dict:
    _check_keys(values, TOP_LEVEL, "")
    for key, types in TOP_LEVEL.items():
        if key in values and not isinstance(values[key], types if isinstance(types, tuple) else (types,)):
            raise ConfigError(f"configuration key {key!r} has the wrong type")
        if key == "seed" and isinstance(values.get(key), bool):
            raise ConfigError("configuration key 'seed' has the wrong type")
    _check_keys(values.get("probe", {}), PROBE_KEYS, "probe")
    _check_keys(values.get("ranking", {}), RANKING_KEYS, "ranking")
    return values


def load_config(path: Optional[str] = None, environ: Optional[dict] = None) -> Config:
    """Read the file named by ``path`` or by ``$QUALCUBE_CONFIG``; empty config if neither."""
    environ = environ if environ is not None else {}
    name = path or environ.get(CONFIG_ENV)
    if not name:
        return Config()
    p = Path(name)
    return Config(validate_config(read_toml(p)), p)


def metric_iri(key: str) -> IRI:
    """Short metric name, prefixed name or IRI to a metric class IRI."""
    names = shipped_descriptors()
    if key in names:
        return names[key].metric_class
    prefix, sep, local = key.partition(":")
    if sep and prefix in PREFIXES and not local.startswith("//"):
        return IRI(PREFIXES[prefix] + local)
    try:
        return IRI(key)
    except ValueError:
        raise ConfigError(f"unknown metric {key!r}") from None


def _numbers(table: dict, what: str) -> dict:
    out = {}
    for key, value in table.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{what} for {key!r} must be a number")
        out[metric_iri(key)] = value
    return out


def ranking_profile(table: dict, normalization: Optional[str] = None,
                    missing: Optional[str] = None) -> RankingProfile:
    """Build a profile from a ``[ranking]``-shaped table."""
    _check_keys(table, RANKING_KEYS, "ranking")
    norm = normalization or table.get("normalization", "none")
    miss = missing or table.get("missing", "zero")
    if norm not in NORMALIZATIONS:
        raise ConfigError(f"unknown normalization {norm!r}")
    if miss not in MISSING:
        raise ConfigError(f"unknown missing policy {miss!r}")
    try:
        return RankingProfile(_numbers(table.get("weights", {}), "weight"),
                              NORMALIZATIONS[norm], MISSING[miss])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def weights_file(path: Path) -> dict:
    """A ``--weights`` file as a ``[ranking]``-shaped table."""
    data = read_toml(path)
    _check_keys(data, {"ranking", "weights", "normalization", "missing"}, "")
    table = dict(data.get("ranking", {}))
    for key in ("weights", "normalization", "missing"):
        if key in data:
            table[key] = data[key]
    return table


def thresholds_table(table: dict) -> dict:
    return _numbers(table, "threshold")


def thresholds_file(path: Path) -> dict:
    data = read_toml(path)
    _check_keys(data, {"thresholds"}, "")
    return thresholds_table(data.get("thresholds", {}))
