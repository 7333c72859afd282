"""CSV and static SVG export of metric values per dataset version.

Sizes and the palette are fixed so that output is byte-stable. Every present
cell carries its value in a ``data-value`` attribute on exactly one element;
missing cells are left out of the drawing instead of being drawn as zero.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence
from xml.sax.saxutils import escape, quoteattr

from . import namespaces as ns
from .analytics import latest
from .qgraph import local_name, read_observations
from .rdf import IRI, QuadDataset
from .vocab import TBox, closure, default_tbox

WIDTH = 720
HEIGHT = 440
MARGIN_LEFT = 220
MARGIN_RIGHT = 180
MARGIN_TOP = 50
MARGIN_BOTTOM = 60
FONT = "sans-serif"
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


class ChartKind(Enum):
    HORIZONTAL_BAR = "hbar"
    VERTICAL_BAR = "vbar"
    RADAR = "radar"
    LINES = "lines"


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class ChartSpec:
    kind: ChartKind
    rows: tuple
    columns: tuple
    values: tuple
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    row_labels: Optional[tuple] = None
    column_labels: Optional[tuple] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", tuple(tuple(r) for r in self.values))
        if len(self.values) != len(self.rows) or any(len(r) != len(self.columns) for r in self.values):
            raise ChartError("value matrix must have one row per dataset and one cell per metric")
        for row in self.values:
            for v in row:
                if v is not None and not math.isfinite(v):
                    raise ChartError("chart values must be finite numbers")
        if self.row_labels is None:
            object.__setattr__(self, "row_labels", tuple(_text(r) for r in self.rows))
        if self.column_labels is None:
            object.__setattr__(self, "column_labels", tuple(_text(c) for c in self.columns))

    def present(self) -> list:
        return [v for row in self.values for v in row if v is not None]


def _text(term) -> str:
    return term.value if isinstance(term, IRI) else str(term)


def format_value(v: float) -> str:
    return repr(float(v))


def chart_spec(data: QuadDataset, kind: ChartKind, rows: Optional[Sequence[IRI]] = None,
               columns: Optional[Sequence[IRI]] = None, t: Optional[TBox] = None,
               title: str = "Dataset quality") -> ChartSpec:
    """Latest value per (version, metric class) taken from the observations in ``data``.

    Versions default to the order of their first observation; metric classes
    default to every class observed, ordered by label.
    """
    t = closure(t) if t is not None else default_tbox()
    observations = read_observations(data)

    def classes_of(ob) -> list:
        mine = [c for c in ob.metric_classes if t.is_subclass(c, ns.METRIC) and c != ns.METRIC]
        return [c for c in mine if not any(o != c and t.is_subclass(o, c) for o in mine)]

    if rows is None:
        first: dict = {}
        for ob in observations:
            first[ob.computed_on] = min(first.get(ob.computed_on, ob.timestamp), ob.timestamp)
        rows = sorted(first, key=lambda r: (first[r], r.value))
    if columns is None:
        seen = {c for ob in observations for c in classes_of(ob)}
        columns = sorted(seen, key=lambda c: ((t.label(c) or local_name(c)).lower(), c.value))
    values = []
    for r in rows:
        mine = [ob for ob in observations if ob.computed_on == r]
        row = []
        for c in columns:
            ob = latest(o for o in mine if any(t.is_subclass(k, c) for k in o.metric_classes))
            row.append(ob.number if ob is not None else None)
        values.append(row)
    return ChartSpec(
        kind, tuple(rows), tuple(columns), tuple(values), title,
        x_label="value" if kind is ChartKind.HORIZONTAL_BAR else "dataset",
        y_label="dataset" if kind is ChartKind.HORIZONTAL_BAR else "value",
        row_labels=tuple(r.value for r in rows),
        column_labels=tuple(t.label(c) or local_name(c) for c in columns),
    )


def export_csv(spec: ChartSpec) -> bytes:
    """RFC 4180 CSV: a ``computedOn`` column followed by one column per metric."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["computedOn", *spec.column_labels])
    for label, row in zip(spec.row_labels, spec.values):
        writer.writerow([label, *("" if v is None else format_value(v) for v in row)])
    return buf.getvalue().encode("utf-8")


# ---- SVG -------------------------------------------------------------------------

def _n(x: float) -> str:
    text = f"{x:.2f}"
    return "0.00" if text == "-0.00" else text


def _colour(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def _scale_max(spec: ChartSpec) -> float:
    return max([1.0, *spec.present()])


class _Svg:
    def __init__(self, spec: ChartSpec) -> None:
        self.spec = spec
        self.lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="{FONT}" font-size="12" '
            f'class="chart {spec.kind.value}">',
            f"<title>{escape(spec.title)}</title>",
            f'<rect class="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<text class="title" x="{_n(WIDTH / 2)}" y="24.00" text-anchor="middle" '
            f'font-size="16">{escape(spec.title)}</text>',
        ]

    def add(self, line: str) -> None:
        self.lines.append(line)

    def text(self, x: float, y: float, content: str, anchor: str = "start", cls: str = "label",
             extra: str = "") -> None:
        self.add(f'<text class="{cls}" x="{_n(x)}" y="{_n(y)}" text-anchor="{anchor}"{extra}>'
                 f"{escape(content)}</text>")

    def legend(self) -> None:
        x = WIDTH - MARGIN_RIGHT + 20
        self.add('<g class="legend">')
        for i, label in enumerate(self.spec.column_labels):
            y = MARGIN_TOP + 18 * i
            self.add(f'<rect class="swatch" x="{_n(x)}" y="{_n(y)}" width="10.00" height="10.00" '
                     f'fill="{_colour(i)}"/>')
            self.text(x + 16, y + 9, label)
        self.add("</g>")

    def finish(self) -> bytes:
        return ("\n".join(self.lines + ["</svg>"]) + "\n").encode("utf-8")


def _cell_attrs(spec: ChartSpec, r: int, c: int) -> str:
    return f" data-row={quoteattr(spec.row_labels[r])} data-column={quoteattr(spec.column_labels[c])}"


def _value_ticks(vmax: float) -> list:
    return [vmax * k / 4 for k in range(5)]


def _bars(spec: ChartSpec, horizontal: bool) -> bytes:
    svg = _Svg(spec)
    vmax = _scale_max(spec)
    left, top = MARGIN_LEFT, MARGIN_TOP
    right, bottom = WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_BOTTOM
    value_len = (right - left) if horizontal else (bottom - top)
    band_len = ((bottom - top) if horizontal else (right - left)) / max(len(spec.rows), 1)
    bar_len = band_len * 0.8 / max(len(spec.columns), 1)

    svg.add('<g class="axis value-axis">')
    for tick in _value_ticks(vmax):
        offset = value_len * tick / vmax
        if horizontal:
            svg.add(f'<line class="grid" x1="{_n(left + offset)}" y1="{_n(top)}" '
                    f'x2="{_n(left + offset)}" y2="{_n(bottom)}" stroke="#dddddd"/>')
            svg.text(left + offset, bottom + 16, f"{tick:g}", "middle", "tick")
        else:
            svg.add(f'<line class="grid" x1="{_n(left)}" y1="{_n(bottom - offset)}" '
                    f'x2="{_n(right)}" y2="{_n(bottom - offset)}" stroke="#dddddd"/>')
            svg.text(left - 6, bottom - offset + 4, f"{tick:g}", "end", "tick")
    svg.add("</g>")
    if horizontal:
        svg.text((left + right) / 2, HEIGHT - 16, spec.x_label, "middle", "axis-label")
    else:
        svg.text((left + right) / 2, HEIGHT - 16, spec.x_label, "middle", "axis-label")
        svg.text(16, (top + bottom) / 2, spec.y_label, "middle", "axis-label",
                 f' transform="rotate(-90 16.00 {_n((top + bottom) / 2)})"')

    for r, row in enumerate(spec.values):
        band_start = (top if horizontal else left) + band_len * r
        if horizontal:
            svg.text(left - 8, band_start + band_len / 2 + 4, spec.row_labels[r], "end", "row-label")
        else:
            svg.text(band_start + band_len / 2, bottom + 32, spec.row_labels[r], "middle", "row-label")
        for c, v in enumerate(row):
            pos = band_start + band_len * 0.1 + bar_len * c
            svg.add(f'<g class="cell"{_cell_attrs(spec, r, c)}>')
            if v is not None:
                length = value_len * max(v, 0.0) / vmax
                if horizontal:
                    geom = f'x="{_n(left)}" y="{_n(pos)}" width="{_n(length)}" height="{_n(bar_len)}"'
                else:
                    geom = (f'x="{_n(pos)}" y="{_n(bottom - length)}" width="{_n(bar_len)}" '
                            f'height="{_n(length)}"')
                svg.add(f'<rect class="bar" {geom} fill="{_colour(c)}" '
                        f'data-value="{format_value(v)}"/>')
            svg.add("</g>")
    svg.legend()
    return svg.finish()


def _lines(spec: ChartSpec) -> bytes:
    svg = _Svg(spec)
    vmax = _scale_max(spec)
    left, top = MARGIN_LEFT, MARGIN_TOP
    right, bottom = WIDTH - MARGIN_RIGHT, HEIGHT - MARGIN_BOTTOM
    n = len(spec.rows)

    def x_at(r: int) -> float:
        return (left + right) / 2 if n == 1 else left + (right - left) * r / (n - 1)

    def y_at(v: float) -> float:
        return bottom - (bottom - top) * max(v, 0.0) / vmax

    svg.add('<g class="axis value-axis">')
    for tick in _value_ticks(vmax):
        svg.add(f'<line class="grid" x1="{_n(left)}" y1="{_n(y_at(tick))}" x2="{_n(right)}" '
                f'y2="{_n(y_at(tick))}" stroke="#dddddd"/>')
        svg.text(left - 6, y_at(tick) + 4, f"{tick:g}", "end", "tick")
    svg.add("</g>")
    for r, label in enumerate(spec.row_labels):
        svg.text(x_at(r), bottom + 18, label, "middle", "row-label")
    svg.text((left + right) / 2, HEIGHT - 12, spec.x_label, "middle", "axis-label")

    for c, label in enumerate(spec.column_labels):
        present = [(r, row[c]) for r, row in enumerate(spec.values) if row[c] is not None]
        svg.add(f'<g class="series" data-column={quoteattr(label)}>')
        if present:
            points = " ".join(f"{_n(x_at(r))},{_n(y_at(v))}" for r, v in present)
            svg.add(f'<polyline class="line" points="{points}" fill="none" stroke="{_colour(c)}" '
                    f'stroke-width="2"/>')
            for r, v in present:
                svg.add(f'<circle class="marker" cx="{_n(x_at(r))}" cy="{_n(y_at(v))}" r="3.00" '
                        f'fill="{_colour(c)}"{_cell_attrs(spec, r, c)} data-value="{format_value(v)}"/>')
        svg.add("</g>")
    svg.legend()
    return svg.finish()


def _radar(spec: ChartSpec) -> bytes:
    k = len(spec.columns)
    if k < 3:
        raise ChartError(f"a radar chart needs at least three metrics, got {k}; "
                         "use a horizontal or vertical bar chart instead")
    svg = _Svg(spec)
    vmax = _scale_max(spec)
    cx = MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2
    cy = MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2
    radius = min(WIDTH - MARGIN_LEFT - MARGIN_RIGHT, HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2 - 10

    def point(c: int, v: float) -> tuple:
        angle = -math.pi / 2 + 2 * math.pi * c / k
        dist = radius * max(v, 0.0) / vmax
        return cx + dist * math.cos(angle), cy + dist * math.sin(angle)

    svg.add('<g class="axis radial-axis">')
    for tick in _value_ticks(vmax)[1:]:
        ring = " ".join(f"{_n(x)},{_n(y)}" for x, y in (point(c, tick) for c in range(k)))
        svg.add(f'<polygon class="grid" points="{ring}" fill="none" stroke="#dddddd"/>')
    for c, label in enumerate(spec.column_labels):
        x, y = point(c, vmax)
        svg.add(f'<line class="spoke" x1="{_n(cx)}" y1="{_n(cy)}" x2="{_n(x)}" y2="{_n(y)}" '
                f'stroke="#bbbbbb"/>')
        lx, ly = point(c, vmax * 1.08)
        anchor = "middle" if abs(lx - cx) < 1 else ("start" if lx > cx else "end")
        svg.text(lx, ly + 4, label, anchor, "column-label")
    svg.add("</g>")

    for r, row in enumerate(spec.values):
        present = [(c, v) for c, v in enumerate(row) if v is not None]
        svg.add(f'<g class="dataset" data-row={quoteattr(spec.row_labels[r])}>')
        if present:
            pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in (point(c, v) for c, v in present))
            svg.add(f'<polygon class="dataset" points="{pts}" fill="{_colour(r)}" fill-opacity="0.15" '
                    f'stroke="{_colour(r)}" stroke-width="2"/>')
            for c, v in present:
                x, y = point(c, v)
                svg.add(f'<circle class="marker" cx="{_n(x)}" cy="{_n(y)}" r="3.00" '
                        f'fill="{_colour(r)}"{_cell_attrs(spec, r, c)} data-value="{format_value(v)}"/>')
        svg.add("</g>")

    x = WIDTH - MARGIN_RIGHT + 20
    svg.add('<g class="legend">')
    for r, label in enumerate(spec.row_labels):
        y = MARGIN_TOP + 18 * r
        svg.add(f'<rect class="swatch" x="{_n(x)}" y="{_n(y)}" width="10.00" height="10.00" '
                f'fill="{_colour(r)}"/>')
        svg.text(x + 16, y + 9, label)
    svg.add("</g>")
    return svg.finish()


def render_svg(spec: ChartSpec) -> bytes:
    """Standalone SVG document for ``spec``.

    Bar charts hold one ``g.cell`` per (dataset, metric) with a ``rect.bar``
    when the value is present. Line plots hold one ``polyline.line`` per metric
    with a value, radar charts one ``polygon.dataset`` per dataset.
    """
    if spec.kind is ChartKind.HORIZONTAL_BAR:
        return _bars(spec, horizontal=True)
    if spec.kind is ChartKind.VERTICAL_BAR:
        return _bars(spec, horizontal=False)
    if spec.kind is ChartKind.LINES:
        return _lines(spec)
    if spec.kind is ChartKind.RADAR:
        return _radar(spec)
    raise ChartError(f"unsupported chart kind {spec.kind!r}")
