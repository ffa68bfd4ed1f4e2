"""Per-parameter change statistics between two parameter snapshots."""

from dataclasses import dataclass

import numpy as np

STANDARDIZERS = ("RR", "ZS", "RS")

# powers of two spanning 2^-6 .. 2^6; values beyond the last edge land in
# the overflow bin, mirroring the "more than 64x the mean" regime
DEFAULT_HISTOGRAM_EDGES = 2.0 ** np.arange(-6, 7)


@dataclass
class VariationRecord:
    """Absolute and standardized parameter changes over one task interval."""

    task: int
    deltas: np.ndarray
    rel_changes: np.ndarray
    method: str


@dataclass(frozen=True)
class LayerStat:
    layer_id: int
    mean_rel_change: float
    is_output: bool


def compute_deltas(prev_snapshot, curr_snapshot):
    """Elementwise absolute parameter change |curr - prev|."""
    prev = np.asarray(prev_snapshot, dtype=np.float64)
    curr = np.asarray(curr_snapshot, dtype=np.float64)
    if prev.shape != curr.shape:
        raise ValueError(f"snapshot lengths differ: {prev.shape} vs {curr.shape}")
    return np.abs(curr - prev)


def standardize(deltas, method):
    """Map raw deltas to relative changes.

    RR divides by the mean, ZS is the z-score (population std), RS is
    (delta - median) / IQR. Degenerate denominators return the method's
    neutral value: all ones for RR, all zeros for ZS and RS.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.size < 2:
        raise ValueError("need at least 2 values to standardize")
    if method == "RR":
        mean = deltas.mean()
        if mean == 0.0:
            return np.ones_like(deltas)
        return deltas / mean
    if method == "ZS":
        mean = deltas.mean()
        std = np.sqrt(np.mean((deltas - mean) ** 2))
        if std == 0.0:
            return np.zeros_like(deltas)
        return (deltas - mean) / std
    if method == "RS":
        median = np.median(deltas)
        iqr = np.percentile(deltas, 75) - np.percentile(deltas, 25)
        if iqr == 0.0:
            return np.zeros_like(deltas)
        return (deltas - median) / iqr
    raise ValueError(f"unknown standardizer {method!r}")


def layer_profile(rel_changes, layer_map):
    """Mean relative change per layer, in layer order.

    Weight and bias blocks of the same layer are pooled. The layer map
    must tile [0, M) without gaps or overlaps.
    """
    rel_changes = np.asarray(rel_changes, dtype=np.float64)
    ordered = sorted(layer_map, key=lambda r: r.start)
    cursor = 0
    for r in ordered:
        if r.start != cursor:
            raise ValueError("layer map does not tile the parameter vector")
        cursor += r.length
    if cursor != rel_changes.size:
        raise ValueError(
            f"layer map covers {cursor} parameters but vector has {rel_changes.size}"
        )

    sums, counts, flags, order = {}, {}, {}, []
    for r in layer_map:
        if r.layer_id not in sums:
            sums[r.layer_id] = 0.0
            counts[r.layer_id] = 0
            flags[r.layer_id] = r.is_output
            order.append(r.layer_id)
        sums[r.layer_id] += rel_changes[r.start:r.start + r.length].sum()
        counts[r.layer_id] += r.length
    return [LayerStat(lid, sums[lid] / counts[lid], flags[lid]) for lid in order]


def histogram(values, edges=None):
    """Half-open bin counts, plus underflow and overflow bins.

    Returns an integer array of length len(edges) + 1: counts[0] holds
    values below edges[0], counts[i] the bin [edges[i-1], edges[i]),
    and counts[-1] everything at or above the last edge.
    """
    values = np.asarray(values, dtype=np.float64)
    edges = DEFAULT_HISTOGRAM_EDGES if edges is None else np.asarray(edges, dtype=np.float64)
    if edges.size < 1 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    idx = np.searchsorted(edges, values, side="right")
    return np.bincount(idx, minlength=edges.size + 1)
