"""Pure numpy implementations of the training kernels.

Reference path: always available, selected with NERDUO_BACKEND=numpy.
"""

import numpy as np


def softmax_xent(logits, gold, mask):
    """Masked mean cross-entropy and its logit gradient.

    logits: (n, c) float64, gold: (n,) int64, mask: (n,) bool with at
    least one True.  Returns (loss, dlogits) where dlogits already
    carries the 1/m averaging factor and is zero on masked-out rows.
    """
    m = int(mask.sum())
    shifted = logits - logits.max(axis=1, keepdims=True)
    expv = np.exp(shifted)
    denom = expv.sum(axis=1, keepdims=True)
    rows = np.arange(logits.shape[0])
    logp_gold = shifted[rows, gold] - np.log(denom[:, 0])
    loss = -(logp_gold * mask).sum() / m
    dlogits = expv / denom
    dlogits[rows, gold] -= 1.0
    dlogits *= (mask.astype(np.float64) / m)[:, None]
    return loss, dlogits


def adam_update(param, grad, m, v, step, lr, beta1, beta2, eps):
    """One Adam step on flat arrays, in place.

    Biased moment updates, bias correction, then
    param -= lr * m_hat / (sqrt(v_hat) + eps).
    """
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**step)
    v_hat = v / (1.0 - beta2**step)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


def gather_span_reps(emb, begins, ends):
    """Stack [emb[b]; emb[e]] rows for every span, shape (k, 2d)."""
    return np.concatenate((emb[begins], emb[ends]), axis=1)
