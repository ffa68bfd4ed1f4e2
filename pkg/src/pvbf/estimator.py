"""Streaming classifier estimator wiring replay, loss masking, gradient
balancing and classifier consolidation into one sklearn-style object."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .buffer import ReservoirBuffer
from .correlation import CorrelationMap, adjust_gradients, correlate
from .dcwr import ClassifierMemoryBank
from .losses import ace_loss, ce_masked
from .mlp import MLP
from .streams import Batch
from .variation import VariationRecord, compute_deltas, standardize

# method -> (asymmetric loss, gradient adjustment, classifier memory)
METHODS = {
    "ER": (False, False, False),
    "ER-ACE": (True, False, False),
    "PVBF": (True, True, True),
    "PVBF-noDCWR": (True, True, False),
}

DCWR_FREQUENCIES = ("per-batch", "per-task")


class ContinualClassifier(BaseEstimator, ClassifierMixin):
    """Online continual-learning classifier over a task stream.

    The model is a small MLP trained one batch at a time with
    experience replay. Depending on `method` the loss is either a plain
    cross-entropy over the concatenated incoming+replay batch (ER) or
    the asymmetric two-term loss that masks the incoming batch to its
    own classes (ER-ACE and both PVBF variants). The PVBF variants
    additionally divide gradients by per-parameter correlations learned
    from parameter changes of finished tasks, and full PVBF also
    maintains the dual-layer classifier memory that overwrites the
    output layer after every step.

    Train with ``partial_fit(X, y, classes=..., task=k)`` batch by
    batch; call :meth:`finish_task` when a task's data is exhausted
    (passing a larger ``task`` id to ``partial_fit`` finalises the
    previous task automatically). ``fit(X, y)`` is a single-task
    convenience that performs one pass in batches.

    Parameters
    ----------
    method : {"ER", "ER-ACE", "PVBF", "PVBF-noDCWR"}
    hidden_sizes : tuple of int
        Hidden layer widths of the MLP backbone.
    activation : {"tanh", "relu"}
    lr : float
        SGD learning rate (fixed for the whole stream).
    buffer_capacity : int
        Replay memory size; 0 disables replay.
    replay_size : int or None
        Samples drawn from memory per step; None matches the incoming
        batch size.
    alpha, beta : float
        Correlation range; gradients are scaled by factors in
        [1/beta, 1/alpha].
    p : float
        Probability of blending a sensory trace into short-term memory.
    standardizer : {"RR", "ZS", "RS"}
        How per-task parameter changes are standardized.
    dcwr_frequency : {"per-batch", "per-task"}
        Whether classifier consolidation runs after every step or once
        per finished task.
    batch_size : int
        Chunk size used only by ``fit``.
    random_state : int, SeedSequence or None
        Seeds four private generators (network init, buffer draws,
        consolidation draws, the ``fit`` shuffle), spawned in that order.

    Attributes
    ----------
    net_ : MLP
        Backbone network with flat parameter vector.
    buffer_ : ReservoirBuffer
    correlations_ : CorrelationMap
    bank_ : ClassifierMemoryBank or None
    variation_records_ : list of VariationRecord, one per finished task.
    snapshots_ : list of parameter vectors, the initial state plus one
        snapshot per finished task.
    seen_classes_ : set of class indices observed in the stream so far.
    """

    def __init__(self, method="PVBF", hidden_sizes=(64, 32), activation="tanh",
                 lr=0.1, buffer_capacity=100, replay_size=None, alpha=0.5,
                 beta=2.0, p=0.9, standardizer="RR", dcwr_frequency="per-batch",
                 batch_size=10, random_state=0):
        self.method = method
        self.hidden_sizes = hidden_sizes
        self.activation = activation
        self.lr = lr
        self.buffer_capacity = buffer_capacity
        self.replay_size = replay_size
        self.alpha = alpha
        self.beta = beta
        self.p = p
        self.standardizer = standardizer
        self.dcwr_frequency = dcwr_frequency
        self.batch_size = batch_size
        self.random_state = random_state

    # ------------------------------------------------------------------
    # setup

    def _flags(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {sorted(METHODS)}")
        return METHODS[self.method]

    def _initialize(self, n_features, classes):
        use_ace, use_ec, use_dcwr = self._flags()
        if self.dcwr_frequency not in DCWR_FREQUENCIES:
            raise ValueError(f"unknown dcwr_frequency {self.dcwr_frequency!r}")
        if not 0 < self.alpha <= self.beta:
            raise ValueError("require 0 < alpha <= beta")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")

        classes = np.asarray(classes)
        if classes.ndim != 1 or classes.size < 2 or np.unique(classes).size != classes.size:
            raise ValueError("classes must be a 1-D array of at least 2 distinct labels")
        self.classes_ = np.sort(classes)
        self.n_features_in_ = int(n_features)

        seq = self.random_state
        if not isinstance(seq, np.random.SeedSequence):
            seq = np.random.SeedSequence(seq)
        init_ss, buffer_ss, eps_ss, shuffle_ss = seq.spawn(4)
        self._rng_buffer = np.random.default_rng(buffer_ss)
        self._rng_eps = np.random.default_rng(eps_ss)
        self._rng_shuffle = np.random.default_rng(shuffle_ss)

        sizes = [self.n_features_in_, *self.hidden_sizes, self.classes_.size]
        self.net_ = MLP(sizes, activation=self.activation,
                        rng=np.random.default_rng(init_ss))
        self.buffer_ = ReservoirBuffer(self.buffer_capacity)
        self.correlations_ = CorrelationMap(self.alpha, self.beta)
        self.bank_ = None
        if use_dcwr:
            self.bank_ = ClassifierMemoryBank(self.classes_.size,
                                              self.net_.classifier_rows().shape[1])
        self.seen_classes_ = set()
        self.variation_records_ = []
        self.snapshots_ = []
        self.step_count_ = 0
        self.current_task_ = None
        self._task_finished = False
        self._task_start_params = None
        self._last_combined_labels = None

    def _encode(self, y):
        idx = np.searchsorted(self.classes_, y)
        idx = np.clip(idx, 0, self.classes_.size - 1)
        if not (self.classes_[idx] == y).all():
            raise ValueError("labels outside the declared class set")
        return idx

    # ------------------------------------------------------------------
    # training

    def partial_fit(self, X, y, classes=None, task=1):
        """Train on one stream batch belonging to task `task` (1-based).

        `classes` is required on the first call and fixes the output
        layer; a task id larger than the current one finalises the
        running task before the new one starts.
        """
        X, y = check_X_y(X, y, dtype=np.float64)
        if not hasattr(self, "net_"):
            if classes is None:
                raise ValueError("classes must be provided on the first partial_fit call")
            self._initialize(X.shape[1], classes)
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        y_idx = self._encode(y)

        task = int(task)
        if self.current_task_ is None or task != self.current_task_:
            if self.current_task_ is not None:
                if task < self.current_task_:
                    raise ValueError("task ids must be non-decreasing")
                if not self._task_finished:
                    self.finish_task()
            self._begin_task(task)
        elif self._task_finished:
            raise ValueError(f"task {task} is already finalized")

        self._train_step(X, y_idx)
        return self

    def _begin_task(self, task):
        self.current_task_ = task
        self._task_finished = False
        if self._task_start_params is None:
            self._task_start_params = self.net_.snapshot()
            self.snapshots_.append(self._task_start_params)

    def _train_step(self, X, y_idx):
        use_ace, use_ec, use_dcwr = self._flags()
        replay_n = self.replay_size if self.replay_size is not None else X.shape[0]
        replay = self.buffer_.sample(replay_n, self._rng_buffer)
        curr = np.unique(y_idx)
        seen = np.fromiter(sorted(self.seen_classes_), dtype=np.int64)

        if use_ace:
            logits_in = self.net_.forward(X)
            logits_bf = self.net_.forward(replay.inputs) if len(replay) else \
                np.zeros((0, self.classes_.size))
            _, grad_in, grad_bf = ace_loss(logits_in, y_idx, logits_bf,
                                           replay.labels, curr, seen)
            grads = self.net_.backward(X, grad_in)
            if len(replay):
                grads += self.net_.backward(replay.inputs, grad_bf)
        else:
            if len(replay):
                X_all = np.vstack([X, replay.inputs])
                y_all = np.concatenate([y_idx, replay.labels])
            else:
                X_all, y_all = X, y_idx
            active = np.union1d(seen, curr)
            _, grad = ce_masked(self.net_.forward(X_all), y_all, active)
            grads = self.net_.backward(X_all, grad)

        if use_ec and self.correlations_.tasks_seen >= 1:
            grads = adjust_gradients(grads, self.correlations_)
        self.net_.sgd_step(grads, self.lr)

        combined = np.concatenate([y_idx, replay.labels]) if len(replay) else y_idx.copy()
        if use_dcwr and self.dcwr_frequency == "per-batch":
            self._consolidate_classifier(combined)

        self.buffer_.observe_batch(Batch(X, y_idx), self._rng_buffer)
        self.seen_classes_.update(int(c) for c in curr)
        self._last_combined_labels = combined
        self.step_count_ += 1

    def _consolidate_classifier(self, labels):
        self.bank_.update(self.net_.classifier_rows(), labels, self.p, self._rng_eps)
        self.bank_.install(self.net_)

    def finish_task(self):
        """Close the running task: record its parameter variation, fold it
        into the correlation map and snapshot the new reference state."""
        check_is_fitted(self, "net_")
        if self.current_task_ is None:
            raise ValueError("no task in progress")
        if self._task_finished:
            raise ValueError(f"task {self.current_task_} is already finalized")
        _, _, use_dcwr = self._flags()

        current = self.net_.snapshot()
        deltas = compute_deltas(self._task_start_params, current)
        rel = standardize(deltas, self.standardizer)
        self.variation_records_.append(
            VariationRecord(self.current_task_, deltas, rel, self.standardizer)
        )
        self.correlations_.merge_max(correlate(rel, self.alpha, self.beta))
        self._task_start_params = current
        self.snapshots_.append(current)

        if use_dcwr and self.dcwr_frequency == "per-task" and \
                self._last_combined_labels is not None:
            self._consolidate_classifier(self._last_combined_labels)
        self._task_finished = True
        return self

    def fit(self, X, y):
        """Single-task convenience: one shuffled pass over (X, y) in
        batch_size chunks."""
        X, y = check_X_y(X, y, dtype=np.float64)
        for attr in ("net_", "classes_", "n_features_in_"):
            if hasattr(self, attr):
                delattr(self, attr)
        classes = np.unique(y)
        self._initialize(X.shape[1], classes)
        order = self._rng_shuffle.permutation(X.shape[0])
        X, y = X[order], y[order]
        for lo in range(0, X.shape[0], self.batch_size):
            self.partial_fit(X[lo:lo + self.batch_size], y[lo:lo + self.batch_size],
                             classes=classes, task=1)
        self.finish_task()
        return self

    # ------------------------------------------------------------------
    # inference

    def decision_function(self, X):
        """Raw logits over all classes (single head, no task identifier)."""
        check_is_fitted(self, "net_")
        X = check_array(X, dtype=np.float64)
        return self.net_.forward(X)

    def predict(self, X):
        """Argmax class over all outputs; ties break toward the lowest index."""
        logits = self.decision_function(X)
        return self.classes_[np.argmax(logits, axis=1)]
