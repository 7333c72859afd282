import itertools
import random
from datetime import timedelta
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from helpers import (
    FULL_VALUES, T0, brute_force_group, group_fixture, quality_graph,
)
from qualcube import namespaces as ns
from qualcube.analytics import (
    MissingPolicy, Normalization, RankingProfile, filter_observations, group_by_class, rank,
    six_star, trend,
)
from qualcube.namespaces import DQM
from qualcube.qgraph import merge_runs, read_observations
from qualcube.rdf import IRI, Quad, QuadDataset, parse_document
from qualcube.vocab import default_tbox

CORPUS = Path(__file__).parent / "corpus"
EX = "http://example.org/"
G = IRI(EX + "qg")
GROUP = IRI(EX + "group")


def version(i):
    return IRI(f"{EX}dataset/v{i}")


def runs(values_per_version: list) -> QuadDataset:
    """One merged quality graph holding a run per version, a day apart."""
    merged = QuadDataset()
    for i, values in enumerate(values_per_version, 1):
        run = quality_graph(values, version(i).value, T0 + timedelta(days=i), f"{EX}run{i}")
        merged = merge_runs(merged, run, G)
    return merged


def availability_graph():
    return parse_document((CORPUS / "30_availability_quality_graph.trig").read_bytes(), "trig")


# ---- grouping ---------------------------------------------------------------------------------

def test_group_without_instances_is_empty(full_graph):
    group, quads = group_by_class(full_graph, IRI(EX + "Nothing"), GROUP)
    assert len(group) == 0 and quads == set()


def test_group_of_three_in_availability_graph():
    data = availability_graph()
    extra = IRI(EX + "otherCategory")
    # one more category with its own metric and observation must stay outside the group
    data = data.union(QuadDataset([
        Quad(extra, ns.TYPE, DQM.Intrinsic),
        Quad(extra, DQM.hasSyntacticValidityDimension, IRI(EX + "consistency")),
        Quad(IRI(EX + "consistency"), ns.TYPE, DQM.SyntacticValidity),
        Quad(IRI(EX + "consistency"), DQM.hasDatatypeConsistencyMetric, IRI(EX + "dtc")),
        Quad(IRI(EX + "dtc"), ns.TYPE, DQM.DatatypeConsistencyMetric),
        Quad(IRI(EX + "dtc"), ns.HAS_OBSERVATION, IRI(EX + "obs4")),
    ]))
    group, quads = group_by_class(data, DQM.Accessibility, GROUP)
    assert group.members == {IRI(EX + f"obs{i}") for i in (1, 2, 3)}
    assert Quad(GROUP, ns.TYPE, ns.QB_OBSERVATION_GROUP) in quads
    assert len(quads) == 4
    assert all(q.graph is None for q in quads)
    _, placed = group_by_class(data, DQM.Accessibility, GROUP, target_graph=G)
    assert {q.graph for q in placed} == {G}


def test_group_by_metric_root_takes_every_observation(full_graph):
    group, _ = group_by_class(full_graph, ns.METRIC, GROUP)
    everything = {q.subject for q in full_graph.match(predicate=ns.TYPE, obj=ns.QB_OBSERVATION)}
    assert group.members == everything and len(everything) == len(FULL_VALUES)


@pytest.mark.parametrize("seed", range(15))
def test_group_matches_brute_force(seed):
    abox, tbox, classes = group_fixture(random.Random(seed))
    t = default_tbox([tbox])
    for cls in classes:
        group, quads = group_by_class(abox, cls, GROUP, t)
        assert set(group.members) == brute_force_group(abox, tbox, cls), cls
        assert len(quads) == (len(group) + 1 if len(group) else 0)


# ---- filtering ----------------------------------------------------------------------------------

TWO_RUNS = [dict(FULL_VALUES), dict(FULL_VALUES, datatype_consistency=0.9, rdf_availability=False)]


def test_empty_criteria_returns_everything():
    data = runs(TWO_RUNS)
    assert filter_observations(data) == read_observations(data)
    assert len(filter_observations(data)) == 2 * len(FULL_VALUES)


def test_date_range_excluding_everything():
    data = runs(TWO_RUNS)
    assert filter_observations(data, date_range=(T0 + timedelta(days=10), None)) == []
    only_second = filter_observations(data, date_range=(T0 + timedelta(days=2), T0 + timedelta(days=2)))
    assert {ob.computed_on for ob in only_second} == {version(2)}


def test_availability_dimension_subset():
    data = runs(TWO_RUNS)
    got = filter_observations(data, metric_class=DQM.Availability)
    # hand count: three metrics sit under Availability (latency belongs to Performance), two runs each
    classes = {c for ob in got for c in ob.metric_classes}
    assert classes == {DQM.RDFAvailabilityMetric, DQM.EndPointAvailabilityMetric,
                       DQM.DereferenceabilityMetric}
    assert len(got) == 6


def test_value_predicate_and_computed_on():
    data = runs(TWO_RUNS)
    high = filter_observations(data, value_predicate=lambda v: v >= 0.9)
    assert all(ob.number >= 0.9 for ob in high)
    v2 = filter_observations(data, computed_on=version(2))
    assert len(v2) == len(FULL_VALUES) and {ob.computed_on for ob in v2} == {version(2)}


criteria = st.fixed_dictionaries({}, optional={
    "metric_class": st.sampled_from([DQM.Availability, DQM.Accessibility, ns.METRIC,
                                     DQM.LabelledResourcesMetric, DQM.EndPointLatencyMetric]),
    "computed_on": st.sampled_from([version(1), version(2), version(3)]),
    "date_range": st.sampled_from([(None, T0 + timedelta(days=1)), (T0 + timedelta(days=2), None)]),
    "value_predicate": st.sampled_from([lambda v: v > 0.5, lambda v: v == 0]),
})


@settings(max_examples=60, deadline=None)
@given(criteria, criteria)
def test_conjunction_is_intersection(a, b):
    data = runs(TWO_RUNS)
    if set(a) & set(b):
        return
    both = {ob.iri for ob in filter_observations(data, **a, **b)}
    assert both == ({ob.iri for ob in filter_observations(data, **a)}
                    & {ob.iri for ob in filter_observations(data, **b)})


# ---- ranking --------------------------------------------------------------------------------------

def cohort(values: dict, metric="datatype_consistency"):
    return runs([{metric: v} for v in values])


def test_rank_two_candidates():
    data = cohort([0.8, 0.4])
    out = rank([version(2), version(1)], data, RankingProfile({DQM.DatatypeConsistencyMetric: 1}))
    assert out == [(version(1), 0.8), (version(2), 0.4)]


def test_rank_single_candidate():
    data = cohort([0.1])
    for w in (0.001, 1, 50):
        assert [c for c, _ in rank([version(1)], data, RankingProfile({DQM.DatatypeConsistencyMetric: w}))] \
            == [version(1)]


def test_rank_ties_break_on_iri():
    data = cohort([0.5, 0.5, 0.5])
    out = rank([version(3), version(1), version(2)], data,
               RankingProfile({DQM.DatatypeConsistencyMetric: 1}))
    assert [c for c, _ in out] == [version(1), version(2), version(3)]


def test_booleans_count_as_zero_or_one():
    data = runs([{"rdf_availability": True}, {"rdf_availability": False}])
    out = rank([version(1), version(2)], data, RankingProfile({DQM.RDFAvailabilityMetric: 2}))
    assert out == [(version(1), 2.0), (version(2), 0.0)]


def test_latency_normalised_within_cohort():
    data = runs([{"endpoint_latency": 0.3}, {"endpoint_latency": 0.1}, {"endpoint_latency": 0.2}])
    profile = RankingProfile({DQM.EndPointLatencyMetric: 1}, Normalization.MIN_MAX_WITHIN_COHORT)
    out = rank([version(i) for i in (1, 2, 3)], data, profile)
    assert out == [(version(2), 1.0), (version(3), 0.5), (version(1), 0.0)]
    flat = runs([{"endpoint_latency": 0.2}, {"endpoint_latency": 0.2}])
    assert [s for _, s in rank([version(1), version(2)], flat, profile)] == [0.5, 0.5]


def test_missing_policies():
    data = runs([{"datatype_consistency": 0.5}, {"labeled_resource_ratio": 0.9}])
    weights = {DQM.DatatypeConsistencyMetric: 1}
    zero = rank([version(1), version(2)], data, RankingProfile(weights))
    assert zero == [(version(1), 0.5), (version(2), 0.0)]
    excl = rank([version(1), version(2)], data, RankingProfile(weights, missing_policy=MissingPolicy.EXCLUDE))
    assert excl == [(version(1), 0.5)]


def test_latest_observation_wins():
    first = quality_graph({"datatype_consistency": 0.2}, version(1).value, T0, f"{EX}a")
    later = quality_graph({"datatype_consistency": 0.7}, version(1).value, T0 + timedelta(hours=1), f"{EX}b")
    data = merge_runs(merge_runs(QuadDataset(), first, G), later, G)
    assert rank([version(1)], data, RankingProfile({DQM.DatatypeConsistencyMetric: 1})) == [(version(1), 0.7)]


@pytest.mark.parametrize("weights", [{}, {DQM.DatatypeConsistencyMetric: 0},
                                     {DQM.DatatypeConsistencyMetric: -1},
                                     {DQM.DatatypeConsistencyMetric: "1"},
                                     {DQM.DatatypeConsistencyMetric: float("inf")}])
def test_invalid_profiles(weights):
    with pytest.raises(ValueError):
        RankingProfile(weights)


METRICS = ["datatype_consistency", "labeled_resource_ratio", "external_linkage_ratio",
           "rdf_availability", "endpoint_latency"]


def random_cohort(rng, n):
    values = []
    for _ in range(n):
        v = {m: rng.choice([0.0, 0.25, 0.5, 0.75, 1.0, rng.random()]) for m in METRICS
             if rng.random() < 0.85}
        if "rdf_availability" in v:
            v["rdf_availability"] = v["rdf_availability"] >= 0.5
        values.append(v)
    return values


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.5, 3, 10, 1e3]))
def test_rank_ordering_invariant_under_scaling(seed, factor):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    data = runs(random_cohort(rng, n))
    from helpers import result
    weights = {result(m, 0.0)[0].metric_class: rng.choice([0, 0.5, 1, 2, rng.random()]) for m in METRICS}
    weights[DQM.DatatypeConsistencyMetric] = rng.uniform(0.1, 2)
    for norm, policy in itertools.product(Normalization, MissingPolicy):
        base = RankingProfile(weights, norm, policy)
        scaled = RankingProfile({k: w * factor for k, w in weights.items()}, norm, policy)
        cands = [version(i) for i in range(1, n + 1)]
        assert [c for c, _ in rank(cands, data, base)] == [c for c, _ in rank(cands, data, scaled)]


# ---- trends ---------------------------------------------------------------------------------------

def test_trend_three_versions():
    data = cohort([0.5, 0.7, 0.6])
    series = trend(data, DQM.DatatypeConsistencyMetric, [version(1), version(2), version(3)])
    assert series.values() == [0.5, 0.7, 0.6]
    assert trend(data, DQM.DatatypeConsistencyMetric).values() == [0.5, 0.7, 0.6]


def test_trend_single_version_and_skips():
    data = cohort([0.4])
    series = trend(data, DQM.DatatypeConsistencyMetric, [version(1), version(9)])
    assert series.values() == [0.4] and series.skipped == (version(9),)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=5), st.randoms(use_true_random=False))
def test_trend_sorted_and_permutation_stable(values, rnd):
    data = cohort(values)
    series = trend(data, DQM.DatatypeConsistencyMetric)
    stamps = [p.timestamp for p in series.points]
    assert stamps == sorted(stamps)
    quads = list(data)
    rnd.shuffle(quads)
    assert trend(QuadDataset(quads), DQM.DatatypeConsistencyMetric) == series


# ---- six stars ---------------------------------------------------------------------------------------

THRESHOLD_METRICS = ["datatype_consistency", "labeled_resource_ratio", "dereferenceability_ratio"]


def test_six_star_examples():
    data = runs([{m: 0.8 for m in THRESHOLD_METRICS}])
    from helpers import result
    thresholds = {result(m, 0.0)[0].metric_class: 0.8 for m in THRESHOLD_METRICS}
    assert six_star(version(1), data, thresholds, 5).stars == 6
    assert six_star(version(1), data, thresholds, 4).stars == 4
    thresholds[DQM.LabelledResourcesMetric] = 0.81
    rating = six_star(version(1), data, thresholds, 5)
    assert rating.stars == 5 and len(rating.reasons) == 1
    assert "label" in rating.reasons[0].lower()


def test_six_star_missing_observation():
    data = runs([{"datatype_consistency": 1.0}])
    rating = six_star(version(1), data, {DQM.DereferenceabilityMetric: 0.1}, 5)
    assert rating.stars == 5 and rating.reasons[0].startswith("no observation of")


def test_six_star_rejects_bad_base():
    for bad in (-1, 6, True, 2.5):
        with pytest.raises(ValueError):
            six_star(version(1), QuadDataset(), {}, bad)


def test_six_star_exhaustive():
    from helpers import result
    classes = [result(m, 0.0)[0].metric_class for m in THRESHOLD_METRICS]
    levels = [None, 0.3, 0.6]
    minimum = 0.5
    for combo in itertools.product(levels, repeat=3):
        values = {m: v for m, v in zip(THRESHOLD_METRICS, combo) if v is not None}
        data = runs([values]) if values else QuadDataset()
        met = all(v is not None and v >= minimum for v in combo)
        for base in range(6):
            rating = six_star(version(1), data, {c: minimum for c in classes}, base)
            assert rating.stars <= base + 1
            assert rating.stars == (6 if base == 5 and met else base)
            assert (rating.stars == 6) == (base == 5 and met)
