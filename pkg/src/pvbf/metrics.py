"""Accuracy-matrix bookkeeping and stream-level summary metrics."""

import math

import numpy as np


class AccuracyMatrix:
    """K x K grid: entry (i, j) is accuracy on task i after training task j.

    Tasks are 0-indexed here. Entries with i > j are never produced by a
    sequential run and stay NaN; a matrix is complete once every entry
    with i <= j is filled.
    """

    def __init__(self, num_tasks):
        if num_tasks < 1:
            raise ValueError("need at least one task")
        self.num_tasks = int(num_tasks)
        self.values = np.full((num_tasks, num_tasks), np.nan)

    def set_entry(self, task, after_task, accuracy):
        k = self.num_tasks
        if not (0 <= task < k and 0 <= after_task < k):
            raise ValueError(f"index ({task}, {after_task}) outside {k} tasks")
        if not 0.0 <= accuracy <= 1.0:
            raise ValueError(f"accuracy {accuracy} outside [0, 1]")
        self.values[task, after_task] = accuracy

    def fill_column(self, after_task, accuracies):
        """Record accuracies for tasks 0..after_task evaluated at this checkpoint."""
        if len(accuracies) != after_task + 1:
            raise ValueError(
                f"column {after_task} expects {after_task + 1} accuracies, got {len(accuracies)}"
            )
        for task, value in enumerate(accuracies):
            self.set_entry(task, after_task, value)

    def is_complete(self):
        i, j = np.indices(self.values.shape)
        return bool(np.isfinite(self.values[i <= j]).all())


def acc(matrix):
    """Mean final-column accuracy: average over tasks after all training."""
    if not matrix.is_complete():
        raise ValueError("accuracy matrix is not fully filled")
    k = matrix.num_tasks
    total = 0.0
    for i in range(k):
        total += matrix.values[i, k - 1]
    return total / k


def fr(matrix):
    """Mean drop from each earlier task's peak accuracy to its final accuracy."""
    k = matrix.num_tasks
    if k < 2:
        raise ValueError("forgetting is undefined for a single task")
    if not matrix.is_complete():
        raise ValueError("accuracy matrix is not fully filled")
    total = 0.0
    for i in range(k - 1):
        peak = np.nanmax(matrix.values[i])
        total += peak - matrix.values[i, k - 1]
    return total / (k - 1)


def ci95(values):
    """Normal-approximation 95% confidence interval: (mean, half_width)."""
    values = [float(v) for v in values]
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 values for a confidence interval")
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, 1.96 * math.sqrt(variance) / math.sqrt(n)
