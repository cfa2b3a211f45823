"""Prediction-accuracy experiments on simulated style grids."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from . import sim
from .dataset import PlayDataset
from .discretizer import HSDMapper, LRDMapper, PixelMapper, StateMapper, build_state_table
from .errors import ConfigError, EvaluationError
from .hsd import HSDConfig, init_model, train
from .metric import MetricConfig, argmin_candidate, continuous_baseline, playstyle_distance

log = logging.getLogger(__name__)


@dataclass
class ResultRow:
    configuration: str
    accuracy: float
    mean_intersection: float
    undefined_rate: float
    trials: int = 0

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 100.0:
            raise ValueError("accuracy must lie in [0, 100]")


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)

    def add(self, row: ResultRow):
        self.rows.append(row)
        return row

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["configuration", "accuracy", "mean_intersection", "undefined_rate", "trials"])
        for r in sorted(self.rows, key=lambda r: r.configuration):
            writer.writerow([r.configuration, f"{r.accuracy:.2f}", f"{r.mean_intersection:.2f}",
                             f"{r.undefined_rate:.4f}", r.trials])
        return buf.getvalue()

    def format(self) -> str:
        width = max([len(r.configuration) for r in self.rows] + [13])
        lines = [f"{'configuration':<{width}}  accuracy  mean|S|  undefined"]
        for r in sorted(self.rows, key=lambda r: r.configuration):
            lines.append(f"{r.configuration:<{width}}  {r.accuracy:8.2f}  {r.mean_intersection:7.1f}  {r.undefined_rate:9.3f}")
        return "\n".join(lines)


def make_mapper(spec: str, models=None) -> StateMapper:
    """Parse ``pixel``, ``lrd`` / ``lrd:H,W,DIV`` or ``hsd`` into a mapper."""
    kind, _, args = spec.partition(":")
    if kind == "pixel":
        return PixelMapper()
    if kind == "lrd":
        if args:
            h, w, div = (int(v) for v in args.split(","))
            return LRDMapper((h, w), div)
        return LRDMapper()
    if kind == "hsd":
        if not models:
            raise ConfigError("the hsd mapper needs at least one model")
        return HSDMapper(models[0], int(args or 1))
    raise ConfigError(f"unknown mapper {spec!r}")


def tables_for(mapper: StateMapper, labelled):
    return [(label, build_state_table(mapper, ds)) for label, ds in labelled]


def evaluate_tables(target_tables, candidate_tables, cfg: MetricConfig, name="") -> ResultRow:
    """Accuracy, mean intersection size and undefined-distance rate."""
    if not target_tables:
        raise EvaluationError("no targets to evaluate")
    ids = {cid for cid, _ in candidate_tables}
    for tid, _ in target_tables:
        if tid not in ids:
            raise ConfigError(f"target style {tid!r} has no candidate")
    correct, sizes, undefined = 0, [], 0
    for true_id, target in target_tables:
        scored = []
        for cid, cand in candidate_tables:
            res = playstyle_distance(target, cand, cfg)
            sizes.append(res.intersection_size)
            undefined += not res.defined
            scored.append((cid, res.value))
        correct += argmin_candidate(scored) == true_id
    n = len(target_tables)
    return ResultRow(name, 100.0 * correct / n, float(np.mean(sizes)), undefined / len(sizes), n)


class _Tally:
    def __init__(self):
        self.correct, self.n, self.sizes, self.undefined = 0, 0, [], 0

    def row(self, name):
        if not self.n:
            raise EvaluationError("no targets to evaluate")
        return ResultRow(name, 100.0 * self.correct / self.n, float(np.mean(self.sizes)),
                         self.undefined / len(self.sizes), self.n)


def evaluate_stream(mappers: dict, cfgs: dict, targets, candidates) -> dict:
    """Score a stream of ``(true_id, dataset)`` targets without holding them all.

    Each target is mapped once per mapper and scored under every metric
    config. Returns ``{(mapper_name, cfg_name): ResultRow}``.
    """
    cand_tables = {name: tables_for(m, candidates) for name, m in mappers.items()}
    ids = {cid for cid, _ in candidates}
    tallies = {(m, c): _Tally() for m in mappers for c in cfgs}
    for true_id, ds in targets:
        if true_id not in ids:
            raise ConfigError(f"target style {true_id!r} has no candidate")
        for mname, mapper in mappers.items():
            target = build_state_table(mapper, ds)
            for cname, cfg in cfgs.items():
                tally = tallies[mname, cname]
                scored = []
                for cid, cand in cand_tables[mname]:
                    res = playstyle_distance(target, cand, cfg)
                    tally.sizes.append(res.intersection_size)
                    tally.undefined += not res.defined
                    scored.append((cid, res.value))
                tally.correct += argmin_candidate(scored) == true_id
                tally.n += 1
    return {key: t.row(f"{key[0]}@{key[1]}") for key, t in tallies.items()}


def mean_row(rows, name) -> ResultRow:
    return ResultRow(
        name,
        float(np.mean([r.accuracy for r in rows])),
        float(np.mean([r.mean_intersection for r in rows])),
        float(np.mean([r.undefined_rate for r in rows])),
        rows[0].trials if rows else 0,
    )


def evaluate_continuous(model, targets, candidates, name="continuous") -> ResultRow:
    """Gaussian W2 between hierarchy-1 latent features, actions ignored."""
    cand = [(cid, model.features(ds.observations)) for cid, ds in candidates]
    correct = 0
    for true_id, ds in targets:
        feats = model.features(ds.observations)
        scored = [(cid, continuous_baseline(feats, f)) for cid, f in cand]
        correct += argmin_candidate(scored) == true_id
    return ResultRow(name, 100.0 * correct / len(targets), 0.0, 0.0, len(targets))


def candidate_datasets(speeds, levels, samples=1024, seed=0, cfg=sim.SimConfig()):
    grid = sim.generate_style_grid(speeds, levels, samples, seed, "candidates", 0, cfg)
    return sorted(((style.id, ds) for style, ds in grid.items()), key=lambda p: p[0])


def iter_target_datasets(speeds, levels, trials, samples=1024, seed=0, cfg=sim.SimConfig()):
    """Yield ``trials`` independently seeded datasets per style, disjoint from the candidates."""
    for style in sorted(sim.style_grid(speeds, levels), key=lambda s: s.id):
        for trial in range(trials):
            yield style.id, sim.style_dataset(style, samples, seed, "targets", trial, cfg)


def target_datasets(speeds, levels, trials, samples=1024, seed=0, cfg=sim.SimConfig()):
    return list(iter_target_datasets(speeds, levels, trials, samples, seed, cfg))


def training_dataset(speeds=sim.DEFAULT_SPEEDS, levels=(0, 1, 2, 3, 4, 5), samples_per_style=300, seed=99,
                     cfg=sim.SimConfig()) -> PlayDataset:
    parts = [
        sim.style_dataset(style, samples_per_style, seed, "train", 0, cfg)
        for style in sim.style_grid(speeds, levels)
    ]
    return PlayDataset(
        parts[0].action_space,
        parts[0].obs_shape,
        np.concatenate([p.observations for p in parts]),
        np.concatenate([p.actions for p in parts]),
        "train",
    )


def train_models(train_ds: PlayDataset, seeds, **hsd_kwargs):
    """One HSD model per seed; returns ``[(model, loss_log), ...]``."""
    out = []
    for seed in seeds:
        cfg = HSDConfig.for_dataset(train_ds, seed=seed, **hsd_kwargs)
        model, losses = train(init_model(cfg), train_ds)
        log.info("trained HSD seed=%d final losses %s", seed, losses[-1][1:] if losses else None)
        out.append((model, losses))
    return out


def hsd_accuracy(models, targets, candidates, cfg: MetricConfig, label="hsd"):
    """Per-model rows plus their mean, computed from freshly built tables."""
    rows = []
    for i, model in enumerate(models):
        mapper = HSDMapper(model, 1)
        rows.append(evaluate_tables(tables_for(mapper, targets), tables_for(mapper, candidates), cfg,
                                    f"{label}[{i}]"))
    return rows, mean_row(rows, f"{label}[mean]")
