"""Fixed-capacity replay memory with reservoir-sampling admission."""

import numpy as np

from .streams import Batch


class ReservoirBuffer:
    """Keeps a uniform random subset of all observed samples.

    After n observations each sample has been retained with probability
    capacity / max(n, capacity), independent of arrival position.

    Parameters
    ----------
    capacity : int
        Maximum number of stored samples. Zero disables storage.
    """

    def __init__(self, capacity):
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.capacity = int(capacity)
        self.stream_count = 0
        self._inputs = []
        self._labels = []
        self._dim = 0

    def __len__(self):
        return len(self._inputs)

    def observe(self, x, label, rng):
        """Admit one sample via reservoir sampling.

        While under capacity the sample is appended; afterwards it
        replaces a uniformly random slot with probability capacity/n.
        """
        self.stream_count += 1
        x = np.asarray(x, dtype=np.float64)
        self._dim = x.shape[0]
        if self.capacity == 0:
            return
        if len(self._inputs) < self.capacity:
            self._inputs.append(x.copy())
            self._labels.append(int(label))
        else:
            slot = int(rng.integers(self.stream_count))
            if slot < self.capacity:
                self._inputs[slot] = x.copy()
                self._labels[slot] = int(label)

    def observe_batch(self, batch, rng):
        for row, label in zip(batch.inputs, batch.labels):
            self.observe(row, label, rng)

    def sample(self, n_requested, rng):
        """Draw min(n_requested, len) stored samples uniformly without replacement."""
        n = min(int(n_requested), len(self._inputs))
        if n <= 0:
            return Batch(np.zeros((0, self._dim)), np.zeros(0, dtype=np.int64))
        idx = rng.choice(len(self._inputs), size=n, replace=False)
        inputs = np.stack([self._inputs[i] for i in idx])
        labels = np.asarray([self._labels[i] for i in idx], dtype=np.int64)
        return Batch(inputs, labels)
