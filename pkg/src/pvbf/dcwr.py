"""Dual-layer consolidation memory for the output classifier (D-CWR).

Each class owns three vectors shaped like one classifier row (weights
plus bias). After a training step, the freshly updated rows of the
classes present in the batch become *sensory* traces (mean-shifted
against the batch's classes). With probability p a sensory trace is
blended into the class's *short-term* vector, weighted by how often the
class has occurred before relative to this batch; the short-term vector
is then always blended into the *long-term* vector with a square-root
retention weight. The long-term vectors are what the network predicts
with: they are written back over the classifier after every update.
"""

import numpy as np


class ClassifierMemoryBank:
    """Per-class sensory/short-term/long-term rows plus occurrence counters."""

    def __init__(self, num_classes, row_dim):
        if num_classes < 1 or row_dim < 1:
            raise ValueError("num_classes and row_dim must be positive")
        self.num_classes = int(num_classes)
        self.row_dim = int(row_dim)
        self.sensory_mem = np.zeros((num_classes, row_dim), dtype=np.float64)
        self.short_term = np.zeros((num_classes, row_dim), dtype=np.float64)
        self.long_term = np.zeros((num_classes, row_dim), dtype=np.float64)
        self.occurrences = np.zeros(num_classes, dtype=np.int64)

    def _check_classes(self, classes):
        classes = np.asarray(classes, dtype=np.int64)
        if classes.size == 0:
            raise ValueError("batch class set must be non-empty")
        if classes.min() < 0 or classes.max() >= self.num_classes:
            raise ValueError("class id out of range")
        return classes

    def sensory(self, classifier_rows, classes_in_batch):
        """Store mean-shifted rows for the batch's classes; others untouched.

        Each present class's sensory trace is its classifier row minus
        the mean row over all present classes, so the traces of one
        batch always sum to the zero vector.
        """
        rows = np.asarray(classifier_rows, dtype=np.float64)
        if rows.shape != (self.num_classes, self.row_dim):
            raise ValueError(
                f"expected rows of shape {(self.num_classes, self.row_dim)}, got {rows.shape}"
            )
        classes = self._check_classes(classes_in_batch)
        mean_row = rows[classes].sum(axis=0) / classes.size
        self.sensory_mem[classes] = rows[classes] - mean_row
        return self.sensory_mem[classes].copy()

    def consolidate(self, classes, counts, p, rng):
        """Blend sensory into short-term (with probability p) and always
        short-term into long-term, in ascending class order.

        `counts[i]` is how often `classes[i]` occurs in the batch; the
        blend weights are occurrences/count and its square root.
        """
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        classes = self._check_classes(classes)
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != classes.shape:
            raise ValueError("counts must align with classes")
        if (counts < 1).any():
            raise ValueError("every class in the batch must occur at least once")
        order = np.argsort(classes)
        for j, u in zip(classes[order], counts[order]):
            short_ret = self.occurrences[j] / u
            long_ret = np.sqrt(self.occurrences[j] / u)
            if rng.random() < p:
                self.short_term[j] = (self.short_term[j] * short_ret + self.sensory_mem[j]) / (short_ret + 1.0)
            self.long_term[j] = (self.long_term[j] * long_ret + self.short_term[j]) / (long_ret + 1.0)
            self.occurrences[j] += u

    def update(self, classifier_rows, batch_labels, p, rng):
        """One full bank update from a batch's label multiset."""
        classes, counts = np.unique(np.asarray(batch_labels, dtype=np.int64), return_counts=True)
        self.sensory(classifier_rows, classes)
        self.consolidate(classes, counts, p, rng)

    def install(self, net):
        """Overwrite every classifier row of `net` with its long-term vector.

        Classes never consolidated contribute zero rows; parameters
        outside the output layer are untouched.
        """
        net.set_classifier_rows(self.long_term)
