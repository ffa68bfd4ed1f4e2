"""Minimal feed-forward classifier with manual backpropagation.

All parameters live in one flat float64 vector so that downstream
bookkeeping (per-parameter change statistics, gradient rescaling,
classifier-row surgery) can address every scalar weight by index.
Dense layers store their weight matrix in (out_features, in_features)
order, which makes the weights feeding one output class a contiguous
slice of the flat vector.
"""

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("tanh", "relu")


@dataclass(frozen=True)
class LayerRange:
    """One contiguous block of the flat parameter vector."""

    layer_id: int
    kind: str  # "dense-weight" | "dense-bias"
    start: int
    length: int
    is_output: bool


class MLP:
    """Multi-layer perceptron over a flat parameter vector.

    Parameters
    ----------
    layer_sizes : sequence of int
        [input_dim, hidden..., num_classes]; at least two entries.
    activation : {"tanh", "relu"}
        Nonlinearity applied to every hidden layer (the output layer
        emits raw logits).
    rng : numpy Generator, optional
        When given, weights and biases are initialised uniformly in
        [-1/sqrt(fan_in), +1/sqrt(fan_in)]; otherwise all parameters
        start at zero.
    """

    def __init__(self, layer_sizes, activation="tanh", rng=None):
        layer_sizes = [int(s) for s in layer_sizes]
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        if any(s <= 0 for s in layer_sizes):
            raise ValueError(f"layer sizes must be positive, got {layer_sizes}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")

        self.layer_sizes = layer_sizes
        self.activation = activation
        self.num_layers = len(layer_sizes) - 1

        ranges = []
        offset = 0
        for lid in range(self.num_layers):
            fan_in, fan_out = layer_sizes[lid], layer_sizes[lid + 1]
            is_out = lid == self.num_layers - 1
            ranges.append(LayerRange(lid, "dense-weight", offset, fan_in * fan_out, is_out))
            offset += fan_in * fan_out
            ranges.append(LayerRange(lid, "dense-bias", offset, fan_out, is_out))
            offset += fan_out
        self.layer_map = tuple(ranges)
        self.params = np.zeros(offset, dtype=np.float64)

        if rng is not None:
            for lid in range(self.num_layers):
                bound = 1.0 / np.sqrt(layer_sizes[lid])
                w, b = self._weight_range(lid), self._bias_range(lid)
                self.params[w.start:w.start + w.length] = rng.uniform(-bound, bound, w.length)
                self.params[b.start:b.start + b.length] = rng.uniform(-bound, bound, b.length)

    @property
    def num_params(self):
        return self.params.size

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def num_classes(self):
        return self.layer_sizes[-1]

    def _weight_range(self, lid) -> LayerRange:
        return self.layer_map[2 * lid]

    def _bias_range(self, lid) -> LayerRange:
        return self.layer_map[2 * lid + 1]

    def weight_view(self, lid):
        """(out_features, in_features) view into the flat vector."""
        r = self._weight_range(lid)
        fan_in, fan_out = self.layer_sizes[lid], self.layer_sizes[lid + 1]
        return self.params[r.start:r.start + r.length].reshape(fan_out, fan_in)

    def bias_view(self, lid):
        r = self._bias_range(lid)
        return self.params[r.start:r.start + r.length]

    def classifier_row_indices(self, class_id):
        """Flat indices of class `class_id`'s output-layer weights plus bias."""
        if not 0 <= class_id < self.num_classes:
            raise ValueError(f"class {class_id} out of range")
        lid = self.num_layers - 1
        fan_in = self.layer_sizes[lid]
        w = self._weight_range(lid)
        b = self._bias_range(lid)
        weight_idx = np.arange(w.start + class_id * fan_in, w.start + (class_id + 1) * fan_in)
        return np.append(weight_idx, b.start + class_id)

    def classifier_rows(self):
        """(num_classes, fan_in + 1) matrix of per-class weight rows with bias appended."""
        lid = self.num_layers - 1
        return np.hstack([self.weight_view(lid), self.bias_view(lid)[:, None]])

    def set_classifier_rows(self, rows):
        """Overwrite every output-layer row (weights + bias) in place."""
        lid = self.num_layers - 1
        fan_in = self.layer_sizes[lid]
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape != (self.num_classes, fan_in + 1):
            raise ValueError(
                f"expected rows of shape {(self.num_classes, fan_in + 1)}, got {rows.shape}"
            )
        self.weight_view(lid)[:] = rows[:, :-1]
        self.bias_view(lid)[:] = rows[:, -1]

    def _activate(self, z):
        if self.activation == "tanh":
            return np.tanh(z)
        return np.maximum(z, 0.0)

    def _forward_cached(self, X):
        """Forward pass keeping each layer's input for backprop."""
        inputs = []
        a = X
        for lid in range(self.num_layers):
            inputs.append(a)
            z = a @ self.weight_view(lid).T + self.bias_view(lid)
            a = z if lid == self.num_layers - 1 else self._activate(z)
        return inputs, a

    def forward(self, X):
        """Logits for a batch, shape (batch, num_classes)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ValueError(f"expected inputs of shape (batch, {self.input_dim}), got {X.shape}")
        return self._forward_cached(X)[1]

    def backward(self, X, grad_logits):
        """Gradient of the scalar loss implied by `grad_logits` w.r.t. every parameter.

        `grad_logits` is d(loss)/d(logits) for the same batch `X`; the
        return value is a flat vector aligned with `self.params`.
        """
        X = np.asarray(X, dtype=np.float64)
        grad_logits = np.asarray(grad_logits, dtype=np.float64)
        inputs, logits = self._forward_cached(X)
        if grad_logits.shape != logits.shape:
            raise ValueError(
                f"grad_logits shape {grad_logits.shape} does not match logits {logits.shape}"
            )

        grads = np.zeros_like(self.params)
        delta = grad_logits
        for lid in range(self.num_layers - 1, -1, -1):
            a_prev = inputs[lid]
            gw = delta.T @ a_prev
            gb = delta.sum(axis=0)
            if not (np.isfinite(gw).all() and np.isfinite(gb).all()):
                raise ValueError(f"non-finite gradient in layer {lid}")
            w, b = self._weight_range(lid), self._bias_range(lid)
            grads[w.start:w.start + w.length] = gw.ravel()
            grads[b.start:b.start + b.length] = gb
            if lid > 0:
                da = delta @ self.weight_view(lid)
                # inputs[lid] is the post-activation output of layer lid-1, which
                # is all both derivatives need: tanh' = 1-a^2, relu' = (a > 0)
                a = inputs[lid]
                if self.activation == "tanh":
                    delta = da * (1.0 - a * a)
                else:
                    delta = da * (a > 0.0)
        return grads

    def sgd_step(self, grads, lr):
        """In-place step params <- params - lr * grads."""
        grads = np.asarray(grads, dtype=np.float64)
        if grads.shape != self.params.shape:
            raise ValueError(f"gradient length {grads.size} != parameter length {self.params.size}")
        if lr < 0:
            raise ValueError("learning rate must be non-negative")
        self.params -= lr * grads

    def snapshot(self):
        """Immutable value copy of the current parameters."""
        return self.params.copy()
