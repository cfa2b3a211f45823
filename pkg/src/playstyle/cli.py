"""Command-line front end: data generation, HSD training, distances, accuracy tables."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import sim
from .dataset import PlayDataset, load_dataset, save_dataset
from .discretizer import HSDMapper, build_state_table
from .errors import ConfigError, PlaystyleError, TrainingError
from .fixtures import worked_example_tables
from .harness import ResultTable, evaluate_continuous, evaluate_tables, make_mapper, mean_row, tables_for
from .hsd import LOG_COLUMNS, HSDConfig, codebook_usage, init_model, load_model, save_model, train
from .metric import AGGREGATIONS, MetricConfig, playstyle_distance

log = logging.getLogger("playstyle")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_UNDEFINED, EXIT_DIVERGED = 0, 2, 3, 4, 5
MANIFEST = "manifest.csv"
MANIFEST_COLUMNS = ("file", "style_id", "speed", "noise_level", "role", "trial")


def float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def level_list(text):
    """``1..5`` or ``0,2,5``."""
    text = str(text)
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def read_config_file(path):
    """Plain ``key=value`` lines; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


# manifests

def write_manifest(out_dir: Path, rows):
    rows = sorted(rows, key=lambda r: r["file"])
    with open(out_dir / MANIFEST, "w", newline="") as fh:
        writer = csv.DictWriter(fh, MANIFEST_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_manifest(path):
    """Return ``[(style_id, dataset_path)]`` from a manifest file or its directory."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "file" not in rows[0] or "style_id" not in rows[0]:
        raise ConfigError(f"{path}: not a dataset manifest")
    return [(r["style_id"], path.parent / r["file"]) for r in rows]


def load_labelled(path):
    return [(sid, load_dataset(p, sid)) for sid, p in read_manifest(path)]


def load_any(path) -> PlayDataset:
    """A single .psty file, or every dataset listed in a directory's manifest."""
    path = Path(path)
    if path.is_dir() or path.name.endswith(".csv"):
        parts = [ds for _, ds in load_labelled(path)]
        if not parts:
            raise ConfigError(f"{path}: empty manifest")
        return PlayDataset(parts[0].action_space, parts[0].obs_shape,
                           np.concatenate([p.observations for p in parts]),
                           np.concatenate([p.actions for p in parts]), path.stem)
    return load_dataset(path)


# commands

def cmd_gen_data(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trials = range(args.trials) if args.role == "targets" else [0]
    rows = []
    for style in sim.style_grid(args.speeds, args.noise_levels):
        for trial in trials:
            ds = sim.style_dataset(style, args.samples, args.seed, args.role, trial)
            name = f"{style.id}.psty" if args.role == "candidates" else f"{style.id}_t{trial:03d}.psty"
            save_dataset(ds, out / name)
            rows.append(dict(file=name, style_id=style.id, speed=f"{style.target_speed:g}",
                             noise_level=style.level, role=args.role, trial=trial))
    write_manifest(out, rows)
    print(f"wrote {len(rows)} datasets and {MANIFEST} to {out}")
    return EXIT_OK


def cmd_train_hsd(args):
    ds = load_any(args.data)
    cfg = HSDConfig.for_dataset(
        ds, seed=args.seed, epochs=args.epochs, codebook1=args.K, cells1=args.B,
        latent1=args.B * args.cell_dim, learning_rate=args.lr, batch_size=args.batch_size, beta=args.beta,
    )

    def progress(epoch, row):
        log.info("epoch %d step %d L_rec=%.5f L_vq0=%.5f L_vq1=%.5f L_pi=%.5f", epoch, *row)

    try:
        model, losses = train(init_model(cfg), ds, progress=progress)
    except TrainingError as exc:
        print(f"training diverged at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    save_model(model, args.out)
    log_path = Path(args.log) if args.log else Path(args.out).with_suffix(".csv")
    with open(log_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for row in losses:
            writer.writerow([row[0], *(f"{v:.6g}" for v in row[1:])])
    print(f"wrote {args.out} (state space {cfg.state_space(1)}, {len(losses)} steps) and {log_path}")
    return EXIT_OK


def metric_config(args):
    return MetricConfig(threshold=args.t, aggregation=args.aggregation, distance=args.distance,
                        squared_mean=args.squared_mean)


def cmd_distance(args):
    cfg = metric_config(args)
    if args.golden_appendix_b:
        table_a, table_b = worked_example_tables()
    else:
        if len(args.datasets) != 2:
            raise ConfigError("distance needs two dataset paths or --golden-appendix-b")
        models = [load_model(p) for p in args.model]
        mapper = make_mapper(args.mapper, models)
        table_a, table_b = (build_state_table(mapper, load_dataset(p)) for p in args.datasets)
    res = playstyle_distance(table_a, table_b, cfg)
    print(f"distance: {'undefined' if not res.defined else f'{res.value:.6f}'}")
    print(f"intersection: {res.intersection_size}")
    if args.per_state:
        for state, b in res.per_state.items():
            print(f"  {state.digest:016x}  d={b.distance:.6f}  n_a={b.count_a}  n_b={b.count_b}")
    return EXIT_OK if res.defined else EXIT_UNDEFINED


def cmd_accuracy(args):
    cfg = metric_config(args)
    candidates = load_labelled(args.candidates)
    targets = load_labelled(args.targets)
    table = ResultTable()
    models = [load_model(p) for p in args.model]
    kind = args.mapper.partition(":")[0]
    if kind in ("hsd", "continuous") and not models:
        raise ConfigError(f"the {kind} mapper needs at least one --model")
    if kind == "continuous":
        for i, model in enumerate(models):
            table.add(evaluate_continuous(model, targets, candidates, f"continuous[{i}]"))
    elif kind == "hsd":
        hierarchy = int(args.mapper.partition(":")[2] or 1)
        rows = []
        for i, model in enumerate(models):
            mapper = HSDMapper(model, hierarchy)
            rows.append(table.add(evaluate_tables(tables_for(mapper, targets), tables_for(mapper, candidates),
                                                  cfg, f"hsd[{i}]")))
        if len(rows) > 1:
            table.add(mean_row(rows, "hsd[mean]"))
    else:
        mapper = make_mapper(args.mapper)
        table.add(evaluate_tables(tables_for(mapper, targets), tables_for(mapper, candidates), cfg,
                                  mapper.describe()))
    print(table.format())
    if args.csv:
        Path(args.csv).write_text(table.to_csv())
    return EXIT_OK


def cmd_codebook_usage(args):
    model = load_model(args.model)
    ds = load_any(args.data)
    used = codebook_usage(model, ds, args.hierarchy)
    print(f"distinct codes: {used} of {model.config.state_space(args.hierarchy)} possible")
    return EXIT_OK


# parser

def add_metric_flags(p):
    p.add_argument("--t", type=positive_int, default=2, help="intersection threshold")
    p.add_argument("--aggregation", choices=AGGREGATIONS, default="expected")
    p.add_argument("--distance", choices=("w2", "w1", "kl", "mkl"), default="w2")
    p.add_argument("--squared-mean", action="store_true", help="squared mean term in Gaussian W2")
    p.add_argument("--mapper", default="lrd", help="pixel | lrd | lrd:H,W,DIV | hsd[:h] | continuous")
    p.add_argument("--model", action="append", default=[], help="HSD model file (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="playstyle", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="key=value file; explicit flags win")
        p.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
        p.set_defaults(func=func)
        return p

    p = command("gen-data", cmd_gen_data, "generate styled-sim datasets and a manifest")
    p.add_argument("--speeds", type=float_list, default=list(sim.DEFAULT_SPEEDS))
    p.add_argument("--noise-levels", type=level_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--samples", type=positive_int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--role", choices=("candidates", "targets"), default="candidates")
    p.add_argument("--trials", type=positive_int, default=100, help="target datasets per style")
    p.add_argument("--out", default="data")

    p = command("train-hsd", cmd_train_hsd, "train one HSD model")
    p.add_argument("--data", default="data", help="dataset directory (manifest) or .psty file")
    p.add_argument("--K", type=positive_int, default=2, help="top-level codebook size")
    p.add_argument("--B", type=positive_int, default=20, help="top-level cell count")
    p.add_argument("--cell-dim", type=positive_int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=positive_int, default=64)
    p.add_argument("--beta", type=float, default=0.25)
    p.add_argument("--out", default="model.hsdm")
    p.add_argument("--log", help="loss CSV path (default: model path with .csv)")

    p = command("distance", cmd_distance, "playstyle distance between two datasets")
    p.add_argument("datasets", nargs="*")
    p.add_argument("--golden-appendix-b", action="store_true", help="use the built-in three-state example")
    p.add_argument("--per-state", action="store_true")
    add_metric_flags(p)

    p = command("accuracy", cmd_accuracy, "prediction accuracy of targets against candidates")
    p.add_argument("--candidates", required=False, default="data")
    p.add_argument("--targets", required=False, default="targets")
    p.add_argument("--csv", help="also write the table as CSV")
    add_metric_flags(p)

    p = command("codebook-usage", cmd_codebook_usage, "count distinct codes a dataset occupies")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default="data")
    p.add_argument("--hierarchy", type=int, default=1)
    return parser


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config_file(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(values) - known
        if unknown:
            parser.error(f"unknown keys in {args.config}: {', '.join(sorted(unknown))}")
        # string defaults go through each option's type, and explicit flags override them
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return parser, args


def format_config(args):
    skip = {"func", "config", "print_config", "verbose"}
    lines = []
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, list):
            value = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)
        lines.append(f"{key}={value}")
    return "\n".join(lines)


def main(argv=None) -> int:
    try:
        parser, args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.print_config:
        print(format_config(args))
        return EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (PlaystyleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
