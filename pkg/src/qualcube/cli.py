"""``qualcube`` command line tool.

Exit codes: 0 success, 1 validation or threshold failure, 2 usage error,
3 input/output, parse or network-configuration error. Data goes to
``--output`` or standard output; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from .analytics import group_by_class, rank, six_star, trend
from .charts import ChartError, ChartKind, chart_spec, export_csv, render_svg
from .config import (
    Config, ConfigError, load_config, metric_iri, ranking_profile, thresholds_file,
    thresholds_table, weights_file,
)
from .metrics import OFFLINE_METRICS, REGISTRY, AssessmentJob, assess, resolve_metrics
from .metrics.base import MetricResult
from .namespaces import PREFIXES
from .qgraph import (
    MergeError, QualityGraphError, build_quality_graph, format_datetime, local_name, merge_runs, parse_datetime,
    quality_graphs, read_observations, validate,
)
from .rdf import IRI, Format, ParseError, QuadDataset, parse_document, serialize
from .vocab import (
    ExtensionError, builtin_daq_tbox, default_tbox, load_extension, shipped_extension,
    vocabulary_dataset,
)

log = logging.getLogger("qualcube")

OK, FAILED, USAGE, IO_ERROR = 0, 1, 2, 3
RDF_FORMATS = ("ttl", "trig", "nq", "nt")


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def usage(message: str) -> CliError:
    return CliError(message, USAGE)


def io_error(message: str) -> CliError:
    return CliError(message, IO_ERROR)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise usage(f"{self.prog}: {message}")


# ---- helpers ------------------------------------------------------------------------

def _setting(args, cfg: Config, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _iri(text: Optional[str], what: str) -> IRI:
    if not text:
        raise usage(f"{what} is required")
    prefix, sep, local = text.partition(":")
    if sep and prefix in PREFIXES and not local.startswith("//"):
        return IRI(PREFIXES[prefix] + local)
    try:
        return IRI(text)
    except ValueError as exc:
        raise usage(f"{what}: {exc}") from None


def _inputs(args, cfg: Config) -> list:
    value = args.input if args.input else cfg.get("input")
    if not value:
        raise usage("--input is required")
    return [value] if isinstance(value, str) else list(value)


def _read_rdf(path: str, fmt: Optional[str] = None) -> QuadDataset:
    try:
        f = Format.parse(fmt) if fmt else Format.from_path(path)
    except ValueError as exc:
        raise usage(str(exc)) from None
    try:
        data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as exc:
        raise io_error(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_document(data, f, base=None)
    except ParseError as exc:
        raise io_error(f"{path}: {exc}") from None


def _read_all(args, cfg: Config) -> QuadDataset:
    out = QuadDataset()
    for path in _inputs(args, cfg):
        out = out.union(_read_rdf(path, args.input_format))
    return out


def _emit(data: bytes, path: Optional[str]) -> None:
    if path and path != "-":
        try:
            Path(path).write_bytes(data)
        except OSError as exc:
            raise io_error(f"cannot write {path}: {exc.strerror or exc}") from None
        return
    sys.stdout.flush()
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.flush()


def _output_format(args, cfg: Config, default: str) -> Format:
    name = _setting(args, cfg, "format")
    if name is None:
        out = _setting(args, cfg, "output")
        if out and out != "-":
            try:
                return Format.from_path(out)
            except ValueError:
                pass
        name = default
    try:
        return Format.parse(name)
    except ValueError as exc:
        raise usage(str(exc)) from None


def _serialize(data: QuadDataset, fmt: Format) -> bytes:
    try:
        return serialize(data, fmt)
    except ValueError as exc:
        raise usage(f"{exc}; choose trig or nq") from None


def _extensions(args, cfg: Config) -> list:
    paths = list(args.extension or []) or list(cfg.get("extensions", []))
    return [_read_rdf(p) for p in paths]


def _tbox(args, cfg: Config, data: Optional[QuadDataset] = None):
    extra = _extensions(args, cfg)
    if data is not None:
        extra.append(data)
    return default_tbox(extra)


def _clock(args, cfg: Config) -> datetime:
    text = _setting(args, cfg, "clock")
    if text is None:
        return datetime.now(timezone.utc).replace(microsecond=0)
    try:
        return parse_datetime(text)
    except ValueError as exc:
        raise usage(f"--clock: {exc}") from None


def _metric_list(value) -> list:
    if value is None:
        return list(OFFLINE_METRICS)
    items = value.split(",") if isinstance(value, str) else list(value)
    items = [i.strip() for i in items if i.strip()]
    if items == ["all"]:
        return [impl.name for impl in REGISTRY.values()]
    return items


def _default_graph_iri(computed_on: IRI, when: datetime) -> IRI:
    stamp = when.astimezone(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return IRI(f"{computed_on.value.rstrip('/#')}/quality/{stamp}")


def _quality_graph_names(data: QuadDataset, args, cfg: Config) -> list:
    given = _setting(args, cfg, "graph_iri")
    if given:
        return [_iri(given, "--graph-iri")]
    names = quality_graphs(data) or data.graph_names()
    if not names:
        raise usage("the input holds no named graph; pass --graph-iri")
    return names


# ---- subcommands ----------------------------------------------------------------------

def cmd_assess(args, cfg: Config) -> int:
    target = _read_all(args, cfg)
    computed_on = _iri(_setting(args, cfg, "computed_on"), "--computed-on")
    when = _clock(args, cfg)
    graph = _iri(_setting(args, cfg, "graph_iri"), "--graph-iri") \
        if _setting(args, cfg, "graph_iri") else _default_graph_iri(computed_on, when)

    descriptors = []
    for ext in _extensions(args, cfg):
        try:
            descriptors += load_extension(ext, shipped_extension()[1])[0]
        except ExtensionError as exc:
            raise io_error(f"extension rejected: {exc}") from None
    try:
        selected = resolve_metrics(_metric_list(_setting(args, cfg, "metrics")), descriptors)
    except KeyError as exc:
        raise usage(str(exc.args[0])) from None

    endpoint = _setting(args, cfg, "endpoint")
    needs_endpoint = {"endpoint_availability", "endpoint_latency"}
    if not endpoint and any(REGISTRY.get(d.metric_class) and REGISTRY[d.metric_class].name
                            in needs_endpoint for d in selected):
        raise io_error("endpoint metrics selected but no --endpoint configured")
    try:
        settings = cfg.probe_settings(endpoint_url=endpoint, seed=_setting(args, cfg, "seed", 0))
    except ConfigError as exc:
        raise io_error(str(exc)) from None

    results = assess(AssessmentJob(target, computed_on, selected, when, settings))
    recorded = [(d, r) for d, r in results if isinstance(r, MetricResult)]
    for d, r in results:
        if not isinstance(r, MetricResult):
            print(f"warning: {local_name(d.metric_class)} not recorded: {r.reason}", file=sys.stderr)
    try:
        qg = build_quality_graph(recorded, computed_on, when, graph)
    except QualityGraphError as exc:
        raise usage(str(exc)) from None
    _emit(_serialize(qg, _output_format(args, cfg, "trig")), _setting(args, cfg, "output"))
    return OK


def cmd_validate(args, cfg: Config) -> int:
    data = _read_all(args, cfg)
    t = _tbox(args, cfg, data)
    reports = [validate(data, g, t) for g in _quality_graph_names(data, args, cfg)]
    if args.report == "json":
        import json
        payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
        body = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        body = "".join(r.to_text() for r in reports)
    _emit(body.encode("utf-8"), _setting(args, cfg, "output"))
    for r in reports:
        status = "passed" if r.passed else f"failed with {len(r.violations)} violation(s)"
        print(f"{r.graph}: {status}", file=sys.stderr)
    return OK if all(r.passed for r in reports) else FAILED


def cmd_group(args, cfg: Config) -> int:
    data = _read_all(args, cfg)
    cls = _iri(args.class_iri, "--class")
    t = _tbox(args, cfg, data)
    group_iri = _iri(args.group_iri, "--group-iri") if args.group_iri \
        else IRI(f"urn:qualcube:group:{local_name(cls)}")
    target = _iri(args.target_graph, "--target-graph") if args.target_graph else None
    group, quads = group_by_class(data, cls, group_iri, t, target)
    print(f"{len(group.members)} observation(s) grouped under {cls.value}", file=sys.stderr)
    out = QuadDataset(quads, PREFIXES)
    _emit(_serialize(out, _output_format(args, cfg, "trig")), _setting(args, cfg, "output"))
    return OK


def cmd_rank(args, cfg: Config) -> int:
    data = _read_all(args, cfg)
    t = _tbox(args, cfg, data)
    table = dict(cfg.get("ranking", {}))
    if cfg.get("weights"):
        table["weights"] = cfg.get("weights")
    try:
        if args.weights:
            table = weights_file(Path(args.weights))
        profile = ranking_profile(table, args.normalization, args.missing)
    except OSError as exc:
        raise io_error(f"cannot read weights: {exc.strerror or exc}") from None
    except ConfigError as exc:
        raise usage(str(exc)) from None
    if args.candidates:
        candidates = [_iri(c, "candidate") for c in args.candidates]
    else:
        candidates = sorted({ob.computed_on for ob in read_observations(data)}, key=lambda i: i.value)
    lines = [f"{i}\t{c.value}\t{score!r}\n" for i, (c, score) in enumerate(rank(candidates, data, profile, t), 1)]
    _emit("".join(lines).encode("utf-8"), _setting(args, cfg, "output"))
    return OK


def cmd_trend(args, cfg: Config) -> int:
    data = _read_all(args, cfg)
    t = _tbox(args, cfg, data)
    try:
        cls = metric_iri(args.metric)
    except ConfigError as exc:
        raise usage(str(exc)) from None
    versions = [_iri(v, "version") for v in args.versions] if args.versions else None
    series = trend(data, cls, versions, t)
    for v in series.skipped:
        print(f"notice: no observation of {local_name(cls)} for {v.value}; skipped", file=sys.stderr)
    lines = [f"{p.computed_on.value}\t{format_datetime(p.timestamp)}\t{p.value!r}\n" for p in series.points]
    _emit("".join(lines).encode("utf-8"), _setting(args, cfg, "output"))
    return OK


def cmd_stars(args, cfg: Config) -> int:
    data = _read_all(args, cfg)
    t = _tbox(args, cfg, data)
    computed_on = _iri(_setting(args, cfg, "computed_on"), "--computed-on")
    try:
        if args.thresholds:
            thresholds = thresholds_file(Path(args.thresholds))
        else:
            thresholds = thresholds_table(cfg.get("thresholds", {}))
    except OSError as exc:
        raise io_error(f"cannot read thresholds: {exc.strerror or exc}") from None
    except ConfigError as exc:
        raise usage(str(exc)) from None
    try:
        rating = six_star(computed_on, data, thresholds, args.base_stars, t)
    except ValueError as exc:
        raise usage(str(exc)) from None
    _emit(f"{rating.stars}\n".encode("utf-8"), _setting(args, cfg, "output"))
    for reason in rating.reasons:
        print(f"withheld: {reason}", file=sys.stderr)
    threshold_failed = any(not r.startswith("base rating") for r in rating.reasons)
    return FAILED if threshold_failed else OK


def cmd_chart(args, cfg: Config) -> int:
    data = _read_all(args, cfg)
    t = _tbox(args, cfg, data)
    kind_name = _setting(args, cfg, "kind", "hbar")
    try:
        kind = ChartKind(kind_name)
    except ValueError:
        raise usage(f"unknown chart kind {kind_name!r}") from None
    columns = None
    if _setting(args, cfg, "metrics"):
        try:
            columns = [metric_iri(m) for m in _metric_list(_setting(args, cfg, "metrics"))]
        except ConfigError as exc:
            raise usage(str(exc)) from None
    rows = [_iri(v, "version") for v in args.versions] if args.versions else None
    spec = chart_spec(data, kind, rows, columns, t, title=args.title)
    try:
        svg = render_svg(spec)
    except ChartError as exc:
        raise usage(str(exc)) from None
    _emit(svg, _setting(args, cfg, "output"))
    if args.csv:
        _emit(export_csv(spec), args.csv)
    return OK


def cmd_merge(args, cfg: Config) -> int:
    paths = _inputs(args, cfg)
    datasets = [_read_rdf(p, args.input_format) for p in paths]
    graph = _iri(_setting(args, cfg, "graph_iri"), "--graph-iri")
    merged = QuadDataset(prefixes=PREFIXES)
    try:
        for d in datasets:
            merged = merge_runs(merged, d, graph)
    except MergeError as exc:
        raise usage(str(exc)) from None
    _emit(_serialize(merged, _output_format(args, cfg, "trig")), _setting(args, cfg, "output"))
    return OK


def cmd_vocab_dump(args, cfg: Config) -> int:
    t = builtin_daq_tbox() if args.core else _tbox(args, cfg)
    fmt = _output_format(args, cfg, "ttl")
    _emit(_serialize(vocabulary_dataset(t), fmt), _setting(args, cfg, "output"))
    return OK


def cmd_extend_check(args, cfg: Config) -> int:
    failed = False
    for path in _inputs(args, cfg):
        ext = _read_rdf(path, args.input_format)
        try:
            descriptors, _ = load_extension(ext, shipped_extension()[1])
        except ExtensionError as exc:
            failed = True
            for defect in exc.defects:
                print(f"{path}: {defect}", file=sys.stderr)
            continue
        lines = [
            f"{d.metric_class.value}\t{d.dimension_class.value}\t{d.category_class.value}\t"
            f"{d.expected_datatype.value}\n" for d in descriptors
        ]
        _emit("".join(lines).encode("utf-8"), None)
        print(f"{path}: {len(descriptors)} metric(s) ok", file=sys.stderr)
    return FAILED if failed else OK


# ---- argument parsing -----------------------------------------------------------------

def _common(p: argparse.ArgumentParser, inputs: bool = True) -> None:
    if inputs:
        p.add_argument("--input", "-i", action="append", help="input file ('-' for stdin); repeatable")
        p.add_argument("--input-format", choices=RDF_FORMATS, help="input syntax (default: from extension)")
    p.add_argument("--output", "-o", help="output file (default: standard output)")
    p.add_argument("--extension", action="append", help="extension vocabulary file; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qualcube", description="Dataset quality assessment with daQ quality graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help=f"TOML configuration file (default: ${'{'}QUALCUBE_CONFIG{'}'})")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("assess", help="assess a dataset and write its quality graph")
    _common(p)
    p.add_argument("--format", choices=RDF_FORMATS, help="output syntax (default: trig)")
    p.add_argument("--computed-on", help="IRI of the assessed dataset or version")
    p.add_argument("--graph-iri", help="IRI of the quality graph")
    p.add_argument("--metrics", help="comma-separated metric names or IRIs, or 'all'")
    p.add_argument("--endpoint", help="SPARQL endpoint URL for the endpoint metrics")
    p.add_argument("--seed", type=int, help="seed for sampling subjects to dereference")
    p.add_argument("--clock", help="assessment time as ISO 8601 (default: now)")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("validate", help="validate quality graphs against the structure definition")
    _common(p)
    p.add_argument("--graph-iri", help="graph to validate (default: every quality graph)")
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("group", help="group observations below a category, dimension or metric class")
    _common(p)
    p.add_argument("--format", choices=RDF_FORMATS)
    p.add_argument("--class", dest="class_iri", required=True, help="class IRI or prefixed name")
    p.add_argument("--group-iri", help="IRI of the emitted observation group")
    p.add_argument("--target-graph", help="named graph for the group statements")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("rank", help="rank datasets by weighted metric values")
    _common(p)
    p.add_argument("--weights", help="TOML file with a weights table")
    p.add_argument("--candidates", nargs="+", help="dataset IRIs (default: every computedOn)")
    p.add_argument("--normalization", choices=("none", "minmax"))
    p.add_argument("--missing", choices=("zero", "exclude"))
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("trend", help="series of one metric across dataset versions")
    _common(p)
    p.add_argument("--metric", required=True, help="metric name, prefixed name or IRI")
    p.add_argument("--versions", nargs="+", help="version IRIs in order")
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("stars", help="six-star rating for one dataset")
    _common(p)
    p.add_argument("--computed-on", help="dataset IRI")
    p.add_argument("--thresholds", help="TOML file with a thresholds table")
    p.add_argument("--base-stars", type=int, required=True, help="five-star rating, 0 to 5")
    p.set_defaults(func=cmd_stars)

    p = sub.add_parser("chart", help="SVG chart (and optional CSV) of metric values")
    _common(p)
    p.add_argument("--kind", choices=[k.value for k in ChartKind])
    p.add_argument("--metrics", help="comma-separated metric names or IRIs")
    p.add_argument("--versions", nargs="+", help="dataset or version IRIs in row order")
    p.add_argument("--csv", help="also write the table as CSV to this file")
    p.add_argument("--title", default="Dataset quality")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("merge", help="merge assessment runs into one quality graph")
    _common(p)
    p.add_argument("--format", choices=("trig", "nq"))
    p.add_argument("--graph-iri", help="IRI of the merged quality graph")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("vocab", help="vocabulary utilities")
    vsub = p.add_subparsers(dest="vocab_command", metavar="ACTION", parser_class=_Parser)
    d = vsub.add_parser("dump", help="write the daQ vocabulary and loaded metrics")
    _common(d, inputs=False)
    d.add_argument("--format", choices=RDF_FORMATS)
    d.add_argument("--core", action="store_true", help="core vocabulary only, without shipped metrics")
    d.set_defaults(func=cmd_vocab_dump)

    p = sub.add_parser("extend", help="extension utilities")
    esub = p.add_subparsers(dest="extend_command", metavar="ACTION", parser_class=_Parser)
    c = esub.add_parser("check", help="lint an extension vocabulary")
    _common(c)
    c.set_defaults(func=cmd_extend_check)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise usage("a command is required; see --help")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                            format="%(levelname)s %(name)s: %(message)s")
        try:
            cfg = load_config(args.config, os.environ)
        except OSError as exc:
            raise io_error(f"cannot read configuration: {exc.strerror or exc}") from None
        except ConfigError as exc:
            raise usage(str(exc)) from None
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else OK


if __name__ == "__main__":
    sys.exit(main())
