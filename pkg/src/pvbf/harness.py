"""Experiment driver: seeded runs over task streams, evaluation after every
task, multi-seed aggregation and CSV/JSON artifact emission."""

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .estimator import ContinualClassifier
from .metrics import AccuracyMatrix, acc, ci95, fr
from .streams import gen_blobs, load_idx, make_split_stream
from .variation import (DEFAULT_HISTOGRAM_EDGES, VariationRecord,
                        compute_deltas, histogram, layer_profile, standardize)


@dataclass
class SeedResult:
    """Everything produced by one seeded run."""

    seed: int
    matrix: AccuracyMatrix
    acc_value: float
    fr_value: float
    records: list
    snapshots: list
    layer_map: tuple
    correlations: np.ndarray = None


@dataclass
class RunReport:
    """Aggregate over all seeds of one configuration."""

    config: ExperimentConfig
    seed_results: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    acc_mean: float = float("nan")
    acc_half: float = float("nan")
    fr_mean: float = float("nan")
    fr_half: float = float("nan")
    wall_clock_seconds: float = 0.0

    @property
    def acc_values(self):
        return [r.acc_value for r in self.seed_results]

    @property
    def fr_values(self):
        return [r.fr_value for r in self.seed_results]


def build_dataset(config):
    if config.dataset == "blobs":
        return gen_blobs(config.blobs_classes, config.blobs_dim,
                         config.blobs_per_class, config.blobs_spread,
                         config.dataset_seed)
    return load_idx(config.idx_images, config.idx_labels)


def task_test_sets(dataset, task_classes):
    """Per-task (inputs, labels) pairs drawn from the test partition."""
    test_idx = dataset.test_indices
    test_labels = dataset.labels[test_idx]
    sets = []
    for classes in task_classes:
        members = test_idx[np.isin(test_labels, classes)]
        sets.append((dataset.inputs[members], dataset.labels[members]))
    return sets


def evaluate(estimator, test_sets, upto):
    """Accuracy on the test sets of tasks 1..upto, single-head argmax."""
    accuracies = []
    for inputs, labels in test_sets[:upto]:
        predictions = estimator.predict(inputs)
        accuracies.append(float(np.mean(predictions == labels)))
    return accuracies


def run_single_seed(config, dataset, seed):
    """One full stream pass for one seed, evaluating after every task."""
    seq = np.random.SeedSequence(seed)
    model_ss, stream_ss = seq.spawn(2)
    stream = make_split_stream(dataset, config.num_tasks, config.classes_per_task,
                               config.batch_size, seed=stream_ss,
                               shuffle_tasks=config.task_order == "shuffled")
    test_sets = task_test_sets(dataset, stream.task_classes)
    est = ContinualClassifier(
        method=config.method,
        hidden_sizes=tuple(config.hidden_sizes),
        activation=config.activation,
        lr=config.lr,
        buffer_capacity=config.buffer_capacity,
        replay_size=config.effective_replay_size(),
        alpha=config.alpha,
        beta=config.beta,
        p=config.p,
        standardizer=config.standardizer,
        dcwr_frequency=config.dcwr_frequency,
        random_state=model_ss,
    )
    classes = np.arange(dataset.num_classes)
    matrix = AccuracyMatrix(config.num_tasks)
    current = None
    for step in stream:
        if current is not None and step.task_id != current:
            est.finish_task()
            matrix.fill_column(current - 1, evaluate(est, test_sets, current))
        est.partial_fit(step.batch.inputs, step.batch.labels,
                        classes=classes, task=step.task_id)
        current = step.task_id
    est.finish_task()
    matrix.fill_column(current - 1, evaluate(est, test_sets, current))
    # forgetting is undefined for one task; report it as zero drop
    fr_value = fr(matrix) if config.num_tasks > 1 else 0.0
    return SeedResult(seed, matrix, acc(matrix), fr_value,
                      est.variation_records_, est.snapshots_, est.net_.layer_map,
                      est.correlations_.values.copy())


def run_experiment(config, write=True):
    """Run every seed of `config`, aggregate, and (optionally) write artifacts.

    A seed whose run raises is recorded under `failures` and excluded
    from the aggregates; the remaining seeds still complete.
    """
    config.validate()
    started = time.perf_counter()
    dataset = build_dataset(config)
    report = RunReport(config=config)
    for seed in config.seeds:
        try:
            report.seed_results.append(run_single_seed(config, dataset, seed))
        except Exception as exc:  # noqa: BLE001 - per-seed isolation is the contract
            report.failures.append({"seed": int(seed), "error": f"{type(exc).__name__}: {exc}"})
    if len(report.seed_results) >= 2:
        report.acc_mean, report.acc_half = ci95(report.acc_values)
        report.fr_mean, report.fr_half = ci95(report.fr_values)
    elif len(report.seed_results) == 1:
        report.acc_mean, report.fr_mean = report.acc_values[0], report.fr_values[0]
        report.acc_half = report.fr_half = 0.0
    report.wall_clock_seconds = time.perf_counter() - started
    if write:
        write_artifacts(report, Path(config.outdir))
    return report


# ----------------------------------------------------------------------
# artifacts


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_accuracy_matrix(path, matrix):
    header = ["task"] + [f"after_task{j + 1}" for j in range(matrix.num_tasks)]
    rows = []
    for i in range(matrix.num_tasks):
        row = [i + 1]
        for j in range(matrix.num_tasks):
            value = matrix.values[i, j]
            row.append("" if np.isnan(value) else f"{value:.10g}")
        rows.append(row)
    _write_csv(path, header, rows)


def write_variation_csv(path, record, layer_map):
    stats = layer_profile(record.rel_changes, layer_map)
    rows = [[s.layer_id, f"{s.mean_rel_change:.10g}"] for s in stats]
    _write_csv(path, ["layer_id", "mean_rel_change"], rows)


def write_histogram_csv(path, record, edges=None):
    edges = DEFAULT_HISTOGRAM_EDGES if edges is None else np.asarray(edges)
    counts = histogram(record.rel_changes, edges)
    bounds = [-np.inf, *edges, np.inf]
    rows = [[f"{bounds[i]:.10g}", f"{bounds[i + 1]:.10g}", int(counts[i])]
            for i in range(len(counts))]
    _write_csv(path, ["bin_lo", "bin_hi", "count"], rows)


def write_correlations_csv(path, correlations):
    rows = [[m, f"{c:.10g}"] for m, c in enumerate(correlations)]
    _write_csv(path, ["parameter", "correlation"], rows)


def write_snapshot(path, snapshot, layer_map, task):
    np.savez(path,
             values=snapshot,
             task=np.asarray(task),
             layer_id=np.asarray([r.layer_id for r in layer_map]),
             kind=np.asarray([r.kind for r in layer_map]),
             start=np.asarray([r.start for r in layer_map]),
             length=np.asarray([r.length for r in layer_map]),
             is_output=np.asarray([r.is_output for r in layer_map]))


def write_artifacts(report, outdir):
    """Emit per-seed accuracy matrices, first-seed diagnostics and summary.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for result in report.seed_results:
        write_accuracy_matrix(outdir / f"acc_matrix_seed{result.seed}.csv", result.matrix)
    if report.seed_results:
        first = report.seed_results[0]
        for record in first.records:
            write_variation_csv(outdir / f"variation_task{record.task}.csv",
                                record, first.layer_map)
            write_histogram_csv(outdir / f"histogram_task{record.task}.csv", record)
        if first.correlations is not None:
            write_correlations_csv(outdir / f"correlations_seed{first.seed}.csv",
                                   first.correlations)
        if report.config.save_snapshots:
            for task, snap in enumerate(first.snapshots):
                write_snapshot(outdir / f"snapshot_task{task}.npz",
                               snap, first.layer_map, task)
    summary = {
        "method": report.config.method,
        "config": report.config.to_dict(),
        "acc": {
            "mean": report.acc_mean,
            "ci95_half": report.acc_half,
            "per_seed": {str(r.seed): r.acc_value for r in report.seed_results},
        },
        "fr": {
            "mean": report.fr_mean,
            "ci95_half": report.fr_half,
            "per_seed": {str(r.seed): r.fr_value for r in report.seed_results},
        },
        "failed_seeds": report.failures,
    }
    with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return outdir / "summary.json"


# ----------------------------------------------------------------------
# snapshot analysis (variation diagnostics without re-running training)


@dataclass(frozen=True)
class _MapRange:
    layer_id: int
    kind: str
    start: int
    length: int
    is_output: bool


def load_snapshot(path):
    with np.load(path) as data:
        layer_map = tuple(
            _MapRange(int(lid), str(kind), int(start), int(length), bool(flag))
            for lid, kind, start, length, flag in zip(
                data["layer_id"], data["kind"], data["start"],
                data["length"], data["is_output"])
        )
        return int(data["task"]), np.asarray(data["values"], dtype=np.float64), layer_map


def analyze_snapshots(snapshot_dir, standardizer="RR", outdir=None):
    """Recompute variation diagnostics from saved parameter snapshots.

    Consecutive snapshots (sorted by task number) yield one variation
    and one histogram CSV each, written next to the snapshots unless
    `outdir` is given. Returns the list of written paths.
    """
    snapshot_dir = Path(snapshot_dir)
    outdir = snapshot_dir if outdir is None else Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = sorted(snapshot_dir.glob("snapshot_task*.npz"),
                   key=lambda p: int(p.stem.replace("snapshot_task", "")))
    if len(files) < 2:
        raise ValueError(f"need at least 2 snapshots in {snapshot_dir}")
    loaded = [load_snapshot(f) for f in files]
    written = []
    for (_, prev, _), (task, curr, layer_map) in zip(loaded, loaded[1:]):
        deltas = compute_deltas(prev, curr)
        rel = standardize(deltas, standardizer)
        record = VariationRecord(task, deltas, rel, standardizer)
        var_path = outdir / f"variation_task{task}.csv"
        hist_path = outdir / f"histogram_task{task}.csv"
        write_variation_csv(var_path, record, layer_map)
        write_histogram_csv(hist_path, record)
        written.extend([var_path, hist_path])
    return written


def load_summaries(directory):
    """Collect summary.json files from a directory and its direct children."""
    directory = Path(directory)
    candidates = sorted(directory.glob("summary.json")) + \
        sorted(directory.glob("*/summary.json"))
    summaries = []
    for path in candidates:
        with open(path, "r", encoding="utf-8") as fh:
            summaries.append((path, json.load(fh)))
    return summaries
