"""Numba-jitted training kernels.

Same contracts as numpy_backend; loops are sequential so results are
reproducible run to run on the same machine.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def softmax_xent(logits, gold, mask):
    n, c = logits.shape
    m = 0
    for i in range(n):
        if mask[i]:
            m += 1
    dlogits = np.zeros((n, c))
    loss = 0.0
    inv_m = 1.0 / m
    for i in range(n):
        if not mask[i]:
            continue
        row_max = logits[i, 0]
        for j in range(1, c):
            if logits[i, j] > row_max:
                row_max = logits[i, j]
        denom = 0.0
        for j in range(c):
            e = np.exp(logits[i, j] - row_max)
            dlogits[i, j] = e
            denom += e
        loss -= logits[i, gold[i]] - row_max - np.log(denom)
        scale = inv_m / denom
        for j in range(c):
            dlogits[i, j] *= scale
        dlogits[i, gold[i]] -= inv_m
    return loss * inv_m, dlogits


@njit(cache=True)
def adam_update(param, grad, m, v, step, lr, beta1, beta2, eps):
    c1 = 1.0 - beta1**step
    c2 = 1.0 - beta2**step
    for i in range(param.shape[0]):
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
        m_hat = m[i] / c1
        v_hat = v[i] / c2
        param[i] -= lr * m_hat / (np.sqrt(v_hat) + eps)


@njit(cache=True)
def gather_span_reps(emb, begins, ends):
    k = begins.shape[0]
    d = emb.shape[1]
    out = np.empty((k, 2 * d))
    for i in range(k):
        b = begins[i]
        e = ends[i]
        for j in range(d):
            out[i, j] = emb[b, j]
            out[i, d + j] = emb[e, j]
    return out
