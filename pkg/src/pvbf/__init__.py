"""Online continual learning lab: replay-based streaming classifiers with
parameter-variation balancing, plus the experiment harness around them."""

from .buffer import ReservoirBuffer
from .config import ConfigError, ExperimentConfig, parse_config
from .correlation import CorrelationMap, adjust_gradients, correlate
from .dcwr import ClassifierMemoryBank
from .estimator import ContinualClassifier
from .harness import RunReport, analyze_snapshots, run_experiment
from .losses import ace_loss, ce_masked
from .metrics import AccuracyMatrix, acc, ci95, fr
from .mlp import MLP
from .streams import (Batch, Dataset, IdxFormatError, TaskStream, gen_blobs,
                      load_idx, make_split_stream)
from .variation import (DEFAULT_HISTOGRAM_EDGES, VariationRecord,
                        compute_deltas, histogram, layer_profile, standardize)

__version__ = "0.1.0"

__all__ = [
    "AccuracyMatrix", "Batch", "ClassifierMemoryBank", "ConfigError",
    "ContinualClassifier", "CorrelationMap", "Dataset",
    "DEFAULT_HISTOGRAM_EDGES", "ExperimentConfig", "IdxFormatError", "MLP",
    "ReservoirBuffer", "RunReport", "TaskStream", "VariationRecord",
    "acc", "ace_loss", "adjust_gradients", "analyze_snapshots", "ce_masked",
    "ci95", "compute_deltas", "correlate", "fr", "gen_blobs", "histogram",
    "layer_profile", "load_idx", "make_split_stream", "parse_config",
    "run_experiment", "standardize",
]
