"""Playstyle distance between two state tables, and style prediction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .errors import ConfigError, EvaluationError, NoPredictionError, StateLookupError

AGGREGATIONS = ("uniform", "expected")


@dataclass(frozen=True)
class MetricConfig:
    threshold: int = 2
    aggregation: str = "expected"
    distance: str = "w2"
    squared_mean: bool = False

    def __post_init__(self):
        if self.threshold < 1:
            raise ConfigError("threshold t must be >= 1")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"aggregation must be one of {AGGREGATIONS}")
        if self.distance not in dist.DISTANCES:
            raise ConfigError(f"distance must be one of {sorted(dist.DISTANCES)}")


@dataclass
class StateBreakdown:
    distance: float
    count_a: int
    count_b: int
    weight_a: float = 0.0
    weight_b: float = 0.0


@dataclass
class DistanceResult:
    value: float | None
    intersection_size: int
    per_state: dict = field(default_factory=dict)

    @property
    def defined(self):
        return self.value is not None

    def sort_key(self):
        return math.inf if self.value is None else self.value


def intersect_states(table_a, table_b, t: int = 1) -> set:
    """States visited at least ``t`` times in both tables."""
    small, large = (table_a, table_b) if len(table_a) <= len(table_b) else (table_b, table_a)
    return {
        s
        for s, entry in small.entries.items()
        if entry.count >= t and large.count(s) >= t
    }


def _fitted(entry, action_space):
    key = "categorical" if action_space.is_discrete else "gaussian"
    fit = entry._fits.get(key)
    if fit is None:
        if action_space.is_discrete:
            fit = dist.fit_categorical(entry.actions, action_space.size)
        else:
            fit = dist.fit_gaussian(entry.actions)
        entry._fits[key] = fit
    return fit


def policy_distance(table_a, table_b, state, cfg: MetricConfig = MetricConfig()) -> float:
    """Distance between the two tables' action distributions at ``state``."""
    try:
        entry_a, entry_b = table_a[state], table_b[state]
    except KeyError:
        raise StateLookupError(f"{state!r} is missing from one of the tables") from None
    space = table_a.action_space
    pa, pb = _fitted(entry_a, space), _fitted(entry_b, space)
    if space.is_discrete:
        return dist.DISTANCES[cfg.distance](pa, pb)
    if cfg.distance != "w2":
        raise ConfigError(f"distance {cfg.distance!r} is only defined for discrete action spaces")
    return dist.w2_gaussian(pa, pb, squared_mean=cfg.squared_mean)


def _ordered(states):
    return sorted(states, key=lambda s: (s.digest, s.code))


def playstyle_distance(table_a, table_b, cfg: MetricConfig = MetricConfig()) -> DistanceResult:
    """Aggregate per-state policy distances over the thresholded intersection.

    ``uniform`` averages the per-state distances. ``expected`` averages
    d(A|B) and d(B|A), where d(X|Y) weights each state by Y's visit counts
    renormalised over the intersection.
    """
    states = _ordered(intersect_states(table_a, table_b, cfg.threshold))
    if not states:
        return DistanceResult(None, 0, {})
    d = np.array([policy_distance(table_a, table_b, s, cfg) for s in states])
    ca = np.array([table_a[s].count for s in states], dtype=np.float64)
    cb = np.array([table_b[s].count for s in states], dtype=np.float64)
    wa, wb = ca / ca.sum(), cb / cb.sum()
    if cfg.aggregation == "uniform":
        value = float(d.mean())
    else:
        value = 0.5 * float(d @ wb) + 0.5 * float(d @ wa)
    per_state = {
        s: StateBreakdown(float(d[i]), int(ca[i]), int(cb[i]), float(wa[i]), float(wb[i]))
        for i, s in enumerate(states)
    }
    return DistanceResult(value, len(states), per_state)


def conditional_distance(table_x, table_y, cfg: MetricConfig = MetricConfig()) -> float | None:
    """d(X|Y): expected policy distance under Y's observation distribution."""
    states = _ordered(intersect_states(table_x, table_y, cfg.threshold))
    if not states:
        return None
    d = np.array([policy_distance(table_x, table_y, s, cfg) for s in states])
    w = np.array([table_y[s].count for s in states], dtype=np.float64)
    return float(d @ (w / w.sum()))


def continuous_baseline(feat_a, feat_b, squared_mean: bool = False) -> float:
    """Gaussian W2 between two feature sets, ignoring actions entirely."""
    return dist.w2_gaussian(dist.fit_gaussian(feat_a), dist.fit_gaussian(feat_b), squared_mean)


def candidate_distances(target, candidates, cfg: MetricConfig = MetricConfig()) -> list:
    return [(cid, playstyle_distance(target, table, cfg)) for cid, table in candidates]


def argmin_candidate(scored):
    """First candidate with the smallest defined distance, or None."""
    best_id, best = None, math.inf
    for cid, value in scored:
        if value is not None and value < best:
            best_id, best = cid, value
    return best_id


def predict_style(target, candidates, cfg: MetricConfig = MetricConfig()):
    """Id of the closest candidate; undefined distances rank as +inf."""
    if not candidates:
        raise EvaluationError("at least one candidate is required")
    scored = [(cid, r.value) for cid, r in candidate_distances(target, candidates, cfg)]
    best = argmin_candidate(scored)
    if best is None:
        raise NoPredictionError("every candidate distance is undefined")
    return best


def accuracy(targets, candidates, cfg: MetricConfig = MetricConfig()) -> float:
    """Percentage of targets whose predicted style equals their true id."""
    if not targets:
        raise EvaluationError("no targets to evaluate")
    ids = {cid for cid, _ in candidates}
    missing = {tid for tid, _ in targets} - ids
    if missing:
        raise ConfigError(f"targets reference unknown candidates: {sorted(missing)}")
    correct = 0
    for true_id, table in targets:
        try:
            correct += predict_style(table, candidates, cfg) == true_id
        except NoPredictionError:
            pass
    return 100.0 * correct / len(targets)
