"""Per-parameter task correlations and the gradient adjustment they drive.

Standardized per-task changes are min-max mapped into [alpha, beta];
across tasks only the elementwise running maximum is kept. Dividing a
gradient by these correlations speeds up parameters that barely moved
on earlier tasks and slows down those that moved most.
"""

from dataclasses import dataclass, field

import numpy as np


def correlate(rel_changes, alpha, beta):
    """Min-max map of relative changes onto [alpha, beta].

    The minimum element maps to alpha, the maximum to beta, affinely in
    between. A degenerate vector (max == min) maps everywhere to alpha,
    treating a uniform change as carrying no correlation signal.
    """
    if not 0 < alpha <= beta:
        raise ValueError(f"require 0 < alpha <= beta, got {alpha}, {beta}")
    rel = np.asarray(rel_changes, dtype=np.float64)
    if rel.size == 0:
        raise ValueError("rel_changes must be non-empty")
    lo, hi = rel.min(), rel.max()
    if hi == lo:
        return np.full_like(rel, alpha)
    t = (rel - lo) / (hi - lo)
    # convex-combination form keeps the endpoints exact; the clip guards
    # against interior values escaping the range by a rounding ulp
    return np.clip(alpha * (1.0 - t) + beta * t, alpha, beta)


@dataclass
class CorrelationMap:
    """Elementwise running maximum of per-task correlation vectors."""

    alpha: float
    beta: float
    values: np.ndarray = field(default=None)
    tasks_seen: int = 0

    def merge_max(self, task_correlations):
        """Fold one task's correlation vector into the running maximum."""
        c_k = np.asarray(task_correlations, dtype=np.float64)
        if self.values is None:
            self.values = c_k.copy()
        else:
            if c_k.shape != self.values.shape:
                raise ValueError(
                    f"length mismatch: map has {self.values.size}, got {c_k.size}"
                )
            np.maximum(self.values, c_k, out=self.values)
        self.tasks_seen += 1
        return self


def adjust_gradients(grads, correlation_map):
    """Elementwise gradient division by the running correlations.

    Requires at least one merged task; every correlation must lie in
    [alpha, beta], so the division can never blow up or flip a sign.
    """
    if correlation_map.tasks_seen < 1:
        raise ValueError("no task correlations merged yet")
    grads = np.asarray(grads, dtype=np.float64)
    c = correlation_map.values
    if grads.shape != c.shape:
        raise ValueError(f"length mismatch: gradients {grads.size}, correlations {c.size}")
    if c.min() < correlation_map.alpha or c.max() > correlation_map.beta:
        raise RuntimeError("correlation map corrupted: values escaped [alpha, beta]")
    return grads / c
