"""Grouping, filtering, ranking, trends and the quality star over quality graphs.

Every function here treats its input as the union of all graphs in the
dataset, so a file holding several quality graphs (or merged runs) can be
queried as one.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Optional

from . import namespaces as ns
from .qgraph import Observation, literal_number, read_observations
from .rdf import IRI, BNode, Quad, QuadDataset, term_key
from .vocab import TBox, closure, default_tbox, instances_of

DURATION_UNITS = frozenset({ns.SECONDS})


def _tbox(t: Optional[TBox]) -> TBox:
    return closure(t) if t is not None else default_tbox()


# ---- grouping ---------------------------------------------------------------------

@dataclass(frozen=True)
class ObservationGroup:
    group_iri: IRI
    members: frozenset
    grouped_by_class: IRI

    def __len__(self) -> int:
        return len(self.members)


def reachable_observations(data: QuadDataset, class_iri: IRI, t: TBox) -> set:
    """Observations hanging below any instance of ``class_iri``.

    Walks hasDimension/hasMetric sub-properties (any depth) from each instance,
    then follows hasObservation sub-properties from every node reached.
    """
    down = t.subproperties(ns.HAS_DIMENSION) | t.subproperties(ns.HAS_METRIC)
    has_obs = t.subproperties(ns.HAS_OBSERVATION)
    start = instances_of(data, class_iri, t)
    seen = set(start)
    queue = deque(start)
    found = set()
    while queue:
        node = queue.popleft()
        for q in data.match(node):
            if q.predicate in has_obs and isinstance(q.object, (IRI, BNode)):
                found.add(q.object)
            elif q.predicate in down and isinstance(q.object, (IRI, BNode)) and q.object not in seen:
                seen.add(q.object)
                queue.append(q.object)
    return found


def group_by_class(data: QuadDataset, class_iri: IRI, group_iri: IRI, t: Optional[TBox] = None,
                   target_graph: Optional[IRI] = None) -> tuple:
    """``(ObservationGroup, quads)``; the quads declare the group and its members.

    Nothing is emitted when the class has no observations below it.
    """
    t = _tbox(t)
    members = frozenset(reachable_observations(data, class_iri, t))
    group = ObservationGroup(group_iri, members, class_iri)
    if not members:
        return group, set()
    quads = {Quad(group_iri, ns.TYPE, ns.QB_OBSERVATION_GROUP, target_graph)}
    quads |= {Quad(group_iri, ns.QB_OBSERVATION_PROP, m, target_graph) for m in members}
    return group, quads


# ---- filtering ------------------------------------------------------------------------

def _matches_class(ob: Observation, cls: IRI, t: TBox) -> bool:
    return any(t.is_subclass(c, cls) for c in ob.metric_classes)


def filter_observations(data: QuadDataset, *, metric_class: Optional[IRI] = None,
                        computed_on: Optional[IRI] = None,
                        date_range: Optional[tuple] = None,
                        value_predicate: Optional[Callable[[float], bool]] = None,
                        t: Optional[TBox] = None) -> list:
    """Observations meeting every supplied criterion, sorted by IRI.

    ``metric_class`` may name a metric class or any category or dimension
    class above it. ``date_range`` is an inclusive ``(start, end)`` pair where
    either end may be None. ``value_predicate`` receives the numeric value;
    non-numeric observations never satisfy it.
    """
    t = _tbox(t)
    observations = read_observations(data)
    below = reachable_observations(data, metric_class, t) if metric_class is not None else None
    out = []
    for ob in observations:
        if metric_class is not None and ob.iri not in below and not _matches_class(ob, metric_class, t):
            continue
        if computed_on is not None and ob.computed_on != computed_on:
            continue
        if date_range is not None:
            start, end = date_range
            if (start is not None and ob.timestamp < start) or (end is not None and ob.timestamp > end):
                continue
        if value_predicate is not None:
            number = ob.number
            if number is None or not value_predicate(number):
                continue
        out.append(ob)
    return out


def latest(observations: Iterable[Observation]) -> Optional[Observation]:
    """Most recent observation; equal timestamps fall back to IRI order."""
    return max(observations, key=lambda ob: (ob.timestamp, ob.iri.value), default=None)


def _latest_by(observations: list, metric_class: IRI, t: TBox) -> dict:
    by_target: dict = {}
    for ob in observations:
        if _matches_class(ob, metric_class, t):
            by_target.setdefault(ob.computed_on, []).append(ob)
    return {target: latest(obs) for target, obs in by_target.items()}


def _exact(ob: Observation) -> Optional[Fraction]:
    number = literal_number(ob.value)
    if number is None or number != number or number in (float("inf"), float("-inf")):
        return None
    try:
        return Fraction(ob.value.lexical) if ob.value.datatype != ns.XSD.boolean.value \
            else Fraction(int(number))
    except ValueError:
        return Fraction(number)


def _decimal(x) -> Fraction:
    """Exact value of a user-supplied number as written; 0.8 means 4/5, not its binary float."""
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


# ---- ranking ---------------------------------------------------------------------------

class Normalization(Enum):
    NONE = "none"
    MIN_MAX_WITHIN_COHORT = "minmax"


class MissingPolicy(Enum):
    SCORE_ZERO = "zero"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class RankingProfile:
    weights: dict
    normalization: Normalization = Normalization.NONE
    missing_policy: MissingPolicy = MissingPolicy.SCORE_ZERO

    def __post_init__(self) -> None:
        weights = {}
        for cls, w in self.weights.items():
            cls = cls if isinstance(cls, IRI) else IRI(cls)
            if isinstance(w, bool) or not isinstance(w, (int, float, Fraction)):
                raise ValueError(f"weight for {cls.value} is not a number")
            if w != w or w in (float("inf"), float("-inf")):
                raise ValueError(f"weight for {cls.value} is not finite")
            if w < 0:
                raise ValueError(f"weight for {cls.value} is negative")
            weights[cls] = w
        if not any(w > 0 for w in weights.values()):
            raise ValueError("a ranking profile needs at least one positive weight")
        object.__setattr__(self, "weights", weights)


def rank(candidates: Iterable[IRI], data: QuadDataset, profile: RankingProfile,
         t: Optional[TBox] = None) -> list:
    """Candidates as ``(IRI, score)`` pairs, best first; ties go to the smaller IRI.

    Each weighted metric contributes ``weight * latest value``. Booleans count
    as 0/1. Under min-max normalization, duration metrics (seconds) are
    rescaled across the cohort so the fastest scores 1 and the slowest 0; a
    cohort of equal durations scores 0.5 each.
    """
    t = _tbox(t)
    candidates = sorted(set(candidates), key=lambda c: c.value)
    observations = read_observations(data)
    scores = {c: Fraction(0) for c in candidates}
    excluded = set()
    for cls, weight in sorted(profile.weights.items(), key=lambda kv: kv[0].value):
        if weight == 0:
            continue
        chosen = _latest_by(observations, cls, t)
        values = {}
        for c in candidates:
            ob = chosen.get(c)
            value = _exact(ob) if ob is not None else None
            if value is not None:
                values[c] = value
        is_duration = any(chosen[c].unit_measure in DURATION_UNITS for c in values)
        if profile.normalization is Normalization.MIN_MAX_WITHIN_COHORT and is_duration and values:
            lo, hi = min(values.values()), max(values.values())
            values = {c: (Fraction(1, 2) if hi == lo else (hi - v) / (hi - lo))
                      for c, v in values.items()}
        w = _decimal(weight)
        for c in candidates:
            if c in values:
                scores[c] += w * values[c]
            elif profile.missing_policy is MissingPolicy.EXCLUDE:
                excluded.add(c)
    ranked = sorted(((c, s) for c, s in scores.items() if c not in excluded),
                    key=lambda cs: (-cs[1], cs[0].value))
    return [(c, float(s)) for c, s in ranked]


# ---- trends ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrendPoint:
    computed_on: IRI
    timestamp: datetime
    value: float


@dataclass(frozen=True)
class TrendSeries:
    metric_class: IRI
    points: tuple
    skipped: tuple = ()

    def values(self) -> list:
        return [p.value for p in self.points]


def trend(data: QuadDataset, metric_class: IRI, computed_on_sequence: Optional[list] = None,
          t: Optional[TBox] = None) -> TrendSeries:
    """Latest value of one metric per version.

    Points follow ``computed_on_sequence`` when given, otherwise ascending
    timestamp. Versions without a numeric observation are listed in
    ``skipped``.
    """
    t = _tbox(t)
    chosen = _latest_by(read_observations(data), metric_class, t)
    if computed_on_sequence is None:
        order = sorted(chosen, key=lambda c: (chosen[c].timestamp, c.value))
    else:
        order = list(dict.fromkeys(computed_on_sequence))
    points, skipped = [], []
    for version in order:
        ob = chosen.get(version)
        number = ob.number if ob is not None else None
        if number is None:
            skipped.append(version)
        else:
            points.append(TrendPoint(version, ob.timestamp, number))
    return TrendSeries(metric_class, tuple(points), tuple(skipped))


# ---- six stars -------------------------------------------------------------------------

@dataclass(frozen=True)
class StarRating:
    stars: int
    reasons: tuple = field(default_factory=tuple)


def six_star(computed_on: IRI, data: QuadDataset, thresholds: dict, base_stars: int,
             t: Optional[TBox] = None) -> StarRating:
    """Award the quality star on top of a five-star rating when every threshold holds."""
    if isinstance(base_stars, bool) or not isinstance(base_stars, int) or not 0 <= base_stars <= 5:
        raise ValueError("base stars must be an integer between 0 and 5")
    t = _tbox(t)
    reasons = []
    if base_stars < 5:
        reasons.append(f"base rating is {base_stars} stars; the quality star needs 5")
    observations = [ob for ob in read_observations(data) if ob.computed_on == computed_on]
    for cls in sorted(thresholds, key=lambda c: c.value if isinstance(c, IRI) else c):
        minimum = thresholds[cls]
        cls = cls if isinstance(cls, IRI) else IRI(cls)
        name = t.label(cls) or cls.value
        ob = latest(o for o in observations if _matches_class(o, cls, t))
        value = _exact(ob) if ob is not None else None
        if value is None:
            reasons.append(f"no observation of {name}")
        elif value < _decimal(minimum):
            reasons.append(f"{name} is {float(value):g}, below the minimum {minimum:g}")
    if base_stars == 5 and not reasons:
        return StarRating(6, ())
    return StarRating(base_stars, tuple(reasons))
