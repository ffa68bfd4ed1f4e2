"""Datasets and one-pass task streams with disjoint label sets."""

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
TRAIN_FRACTION = 0.8


class IdxFormatError(ValueError):
    """Raised when an IDX file is malformed or inconsistent."""


@dataclass
class Batch:
    """A batch of row-vector inputs with integer labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise ValueError(f"inputs must be 2-D, got shape {self.inputs.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.inputs.shape[0]:
            raise ValueError(
                f"labels shape {self.labels.shape} does not match {self.inputs.shape[0]} rows"
            )

    def __len__(self):
        return self.inputs.shape[0]


@dataclass
class Dataset:
    """Immutable classification dataset with a train/test partition."""

    inputs: np.ndarray
    labels: np.ndarray
    num_classes: int
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.min(initial=0) < 0 or (
            self.labels.size and self.labels.max() >= self.num_classes
        ):
            raise ValueError("labels out of range for num_classes")
        if np.intersect1d(self.train_indices, self.test_indices).size:
            raise ValueError("train and test partitions overlap")

    @property
    def input_dim(self):
        return self.inputs.shape[1]


@dataclass(frozen=True)
class StreamBatch:
    """One stream step: a batch, its task id (1-based) and position flag."""

    batch: Batch
    task_id: int
    is_first_of_task: bool

    @property
    def is_boundary(self):
        """True exactly on the first batch of every task after the first."""
        return self.is_first_of_task and self.task_id >= 2


@dataclass
class TaskStream:
    """Ordered one-pass sequence of batches grouped into label-disjoint tasks."""

    entries: list
    task_classes: list = field(default_factory=list)
    batch_size: int = 0

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def num_tasks(self):
        return len(self.task_classes)


def gen_blobs(num_classes, dim, per_class, spread, seed):
    """Gaussian-cluster dataset with one cluster per class.

    Class means are standard-normal draws from the seeded generator and
    samples are mean + spread * noise. The first 80% of each class's
    samples (by generation index) form the train partition.
    """
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if per_class < 2:
        raise ValueError("need at least 2 samples per class")
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((num_classes, dim))
    inputs = np.empty((num_classes * per_class, dim), dtype=np.float64)
    labels = np.empty(num_classes * per_class, dtype=np.int64)
    train, test = [], []
    n_train = int(per_class * TRAIN_FRACTION)
    for c in range(num_classes):
        lo = c * per_class
        inputs[lo:lo + per_class] = means[c] + spread * rng.standard_normal((per_class, dim))
        labels[lo:lo + per_class] = c
        train.extend(range(lo, lo + n_train))
        test.extend(range(lo + n_train, lo + per_class))
    return Dataset(inputs, labels, num_classes,
                   np.asarray(train, dtype=np.int64), np.asarray(test, dtype=np.int64))


def _read_idx(path, expected_magic):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: file too short for an IDX header")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic != expected_magic:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    ndim = magic & 0xFF
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise IdxFormatError(f"{path}: truncated dimension header")
    dims = struct.unpack(f">{ndim}I", raw[4:header_end])
    count = int(np.prod(dims))
    payload = raw[header_end:header_end + count]
    if len(payload) < count:
        raise IdxFormatError(f"{path}: payload holds {len(payload)} bytes, expected {count}")
    return dims, np.frombuffer(payload, dtype=np.uint8)


def load_idx(images_path, labels_path):
    """Load an IDX image/label file pair (plain or gzipped) as a Dataset.

    Pixels are scaled to [0, 1] and images flattened to row vectors.
    The first 80% of samples (file order) form the train partition.
    """
    img_dims, img_data = _read_idx(images_path, IDX_IMAGES_MAGIC)
    lbl_dims, lbl_data = _read_idx(labels_path, IDX_LABELS_MAGIC)
    n_images, rows, cols = img_dims
    if lbl_dims[0] != n_images:
        raise IdxFormatError(
            f"label count {lbl_dims[0]} does not match image count {n_images}"
        )
    inputs = img_data.astype(np.float64).reshape(n_images, rows * cols) / 255.0
    labels = lbl_data.astype(np.int64)
    num_classes = int(labels.max()) + 1 if labels.size else 0
    n_train = int(n_images * TRAIN_FRACTION)
    return Dataset(inputs, labels, num_classes,
                   np.arange(n_train, dtype=np.int64),
                   np.arange(n_train, n_images, dtype=np.int64))


def make_split_stream(dataset, num_tasks, classes_per_task, batch_size, seed,
                      shuffle_tasks=False):
    """Partition classes into tasks and emit one-pass batches.

    Tasks take classes in ascending id order by default; with
    `shuffle_tasks` a seeded permutation of the class ids is chunked
    instead (drawn before any within-task shuffling). Within a task the
    train samples are shuffled by the seeded generator and chunked into
    batches of `batch_size`; the last batch may be smaller. Every train
    sample of a participating class appears exactly once.
    """
    if num_tasks < 1 or classes_per_task < 1:
        raise ValueError("num_tasks and classes_per_task must be positive")
    if num_tasks * classes_per_task > dataset.num_classes:
        raise ValueError(
            f"{num_tasks} tasks x {classes_per_task} classes exceed "
            f"the {dataset.num_classes} available classes"
        )
    if batch_size < 1:
        raise ValueError("batch_size must be positive")

    rng = np.random.default_rng(seed)
    class_order = (rng.permutation(dataset.num_classes) if shuffle_tasks
                   else np.arange(dataset.num_classes))
    train_idx = dataset.train_indices
    train_labels = dataset.labels[train_idx]
    entries, task_classes = [], []
    for k in range(1, num_tasks + 1):
        classes = np.sort(class_order[(k - 1) * classes_per_task:k * classes_per_task])
        task_classes.append(classes)
        members = train_idx[np.isin(train_labels, classes)]
        order = rng.permutation(members)
        for pos in range(0, order.size, batch_size):
            chunk = order[pos:pos + batch_size]
            entries.append(StreamBatch(
                Batch(dataset.inputs[chunk], dataset.labels[chunk]),
                task_id=k,
                is_first_of_task=pos == 0,
            ))
    return TaskStream(entries, task_classes, batch_size)
