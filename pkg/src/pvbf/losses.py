"""Cross-entropy over a restricted class set, with exact logit gradients.

Masking is realised by excluding inactive classes from the softmax
normalisation, which is numerically equivalent to pinning their logits
at negative infinity but never produces non-finite intermediates.
"""

import numpy as np


def ce_masked(logits, labels, active_classes):
    """Mean negative log-likelihood with softmax restricted to `active_classes`.

    Args:
        logits: (batch, num_classes) array.
        labels: (batch,) integer class ids; every label must be active.
        active_classes: iterable of class ids included in the softmax.

    Returns:
        (loss, grad_at_logits); the gradient is zero at every inactive
        class position and already includes the 1/batch factor.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    active = np.unique(np.asarray(list(active_classes), dtype=np.int64))
    if active.size == 0:
        raise ValueError("active_classes must be non-empty")
    if active[0] < 0 or active[-1] >= logits.shape[1]:
        raise ValueError("active class id out of logit range")
    if not np.isin(labels, active).all():
        raise ValueError("every label must belong to active_classes")

    n = logits.shape[0]
    sub = logits[:, active]
    peak = sub.max(axis=1, keepdims=True)
    logsumexp = peak[:, 0] + np.log(np.exp(sub - peak).sum(axis=1))
    positions = np.searchsorted(active, labels)
    loss = float(np.mean(logsumexp - sub[np.arange(n), positions]))

    grad_sub = np.exp(sub - logsumexp[:, None])
    grad_sub[np.arange(n), positions] -= 1.0
    grad_sub /= n
    grad = np.zeros_like(logits)
    grad[:, active] = grad_sub
    return loss, grad


def ace_loss(logits_in, labels_in, logits_bf, labels_bf, curr_classes, seen_classes):
    """Asymmetric combined loss: incoming batch masked to current classes,
    replay batch masked to all classes seen so far plus the current ones.

    An empty replay batch contributes zero loss. Returns
    (total_loss, grad_at_incoming_logits, grad_at_replay_logits).
    """
    loss_in, grad_in = ce_masked(logits_in, labels_in, curr_classes)
    logits_bf = np.asarray(logits_bf, dtype=np.float64)
    if logits_bf.shape[0] == 0:
        return loss_in, grad_in, np.zeros_like(logits_bf)
    replay_classes = np.union1d(np.asarray(list(seen_classes), dtype=np.int64),
                                np.asarray(list(curr_classes), dtype=np.int64))
    loss_bf, grad_bf = ce_masked(logits_bf, labels_bf, replay_classes)
    return loss_bf + loss_in, grad_in, grad_bf
