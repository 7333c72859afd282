import math
import random
from datetime import timedelta

import pytest
from hypothesis import given, settings, strategies as st

from helpers import (
    FULL_VALUES, T0, csv_values, expected_counts, quality_graph, svg_elements, svg_values,
)
from qualcube.charts import ChartError, ChartKind, ChartSpec, chart_spec, export_csv, render_svg
from qualcube.namespaces import DQM
from qualcube.qgraph import merge_runs
from qualcube.rdf import IRI, QuadDataset

G = IRI("http://example.org/qg")
METRICS = ("datatype_consistency", "labeled_resource_ratio", "external_linkage_ratio")


def two_by_three():
    merged = QuadDataset()
    for i, shift in enumerate((0.0, 0.1), 1):
        run = quality_graph({m: FULL_VALUES[m] + shift for m in METRICS}, f"http://example.org/dataset/v{i}",
                            T0 + timedelta(days=i), f"http://example.org/run{i}")
        merged = merge_runs(merged, run, G)
    return merged


def spec(kind, values, rows=None, cols=None):
    rows = rows or [f"r{i}" for i in range(len(values))]
    cols = cols or [f"c{j}" for j in range(len(values[0]) if values else 0)]
    return ChartSpec(kind, rows, cols, values, "t")


@pytest.mark.parametrize("kind", list(ChartKind))
def test_fixture_counts(kind):
    s = chart_spec(two_by_three(), kind)
    assert (len(s.rows), len(s.columns)) == (2, 3)
    svg = render_svg(s)
    for (tag, cls), n in expected_counts(s).items():
        assert len(svg_elements(svg, tag, cls)) == n, (tag, cls)
    assert svg_values(svg) == csv_values(export_csv(s))
    assert render_svg(chart_spec(two_by_three(), kind)) == svg


def test_lines_have_two_vertices_each():
    svg = render_svg(chart_spec(two_by_three(), ChartKind.LINES))
    lines = svg_elements(svg, "polyline", "line")
    assert len(lines) == 3
    assert all(len(p.get("points").split()) == 2 for p in lines)


def test_single_bar():
    svg = render_svg(spec(ChartKind.HORIZONTAL_BAR, [[0.4]]))
    assert len(svg_elements(svg, "rect", "bar")) == 1


def test_missing_cells_are_gaps():
    s = spec(ChartKind.VERTICAL_BAR, [[0.5, None], [None, 0.0]])
    svg = render_svg(s)
    assert len(svg_elements(svg, "g", "cell")) == 4
    assert [b.get("data-value") for b in svg_elements(svg, "rect", "bar")] == ["0.5", "0.0"]
    assert export_csv(s) == b"computedOn,c0,c1\r\nr0,0.5,\r\nr1,,0.0\r\n"


def test_csv_shape_and_quoting():
    s = chart_spec(two_by_three(), ChartKind.HORIZONTAL_BAR)
    lines = export_csv(s).split(b"\r\n")
    assert len(lines[0].split(b",")) == 4 and len([x for x in lines[1:] if x]) == 2
    quoted = ChartSpec(ChartKind.LINES, ["a,b"], ['say "hi"'], [[1.0]])
    assert export_csv(quoted) == b'computedOn,"say ""hi"""\r\n"a,b",1.0\r\n'


def test_empty_spec_csv_is_header_only():
    assert export_csv(ChartSpec(ChartKind.HORIZONTAL_BAR, [], [], [])) == b"computedOn\r\n"


def test_radar_needs_three_metrics():
    with pytest.raises(ChartError) as err:
        render_svg(spec(ChartKind.RADAR, [[0.1, 0.2]]))
    assert "bar" in str(err.value)


def test_equal_values_make_a_regular_polygon():
    svg = render_svg(spec(ChartKind.RADAR, [[0.6] * 5]))
    (poly,) = svg_elements(svg, "polygon", "dataset")
    pts = [tuple(map(float, p.split(","))) for p in poly.get("points").split()]
    cx = sum(x for x, _ in pts) / len(pts)
    cy = sum(y for _, y in pts) / len(pts)
    radii = [math.hypot(x - cx, y - cy) for x, y in pts]
    assert max(radii) - min(radii) < 0.02


def test_value_axis_extends_past_one():
    small = render_svg(spec(ChartKind.VERTICAL_BAR, [[0.5]]))
    large = render_svg(spec(ChartKind.VERTICAL_BAR, [[2.0]]))
    ticks = lambda svg: [t.text for t in svg_elements(svg, "text", "tick")]
    assert ticks(small)[-1] == "1" and ticks(large)[-1] == "2"


def test_invalid_specs():
    with pytest.raises(ChartError):
        ChartSpec(ChartKind.LINES, ["a"], ["b", "c"], [[1.0]])
    with pytest.raises(ChartError):
        ChartSpec(ChartKind.LINES, ["a"], ["b"], [[float("nan")]])


cells = st.one_of(st.none(), st.floats(0, 5, allow_nan=False).map(lambda v: round(v, 3)))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(ChartKind)), st.integers(1, 4), st.integers(1, 6), st.data())
def test_generated_specs(kind, n_rows, n_cols, data):
    if kind is ChartKind.RADAR and n_cols < 3:
        n_cols = 3
    values = [[data.draw(cells) for _ in range(n_cols)] for _ in range(n_rows)]
    s = spec(kind, values)
    svg = render_svg(s)
    for (tag, cls), n in expected_counts(s).items():
        assert len(svg_elements(svg, tag, cls)) == n
    assert svg_values(svg) == csv_values(export_csv(s))
    assert render_svg(s) == svg and export_csv(s) == export_csv(s)
