"""Shared test oracles, all independent of the library code paths they check."""

import math

from nerduo.bio import EntitySpan


def naive_forward(inputs, weights, bias):
    """Triple-loop matrix multiply oracle for the linear head."""
    n = len(inputs)
    c = len(weights)
    d = len(weights[0])
    out = [[0.0] * c for _ in range(n)]
    for i in range(n):
        for j in range(c):
            acc = bias[j]
            for k in range(d):
                acc += weights[j][k] * inputs[i][k]
            out[i][j] = acc
    return out


def rowwise_xent(logits_rows, gold, mask=None):
    """Independent per-row softmax cross-entropy, mean over unmasked rows."""
    total = 0.0
    count = 0
    for i, row in enumerate(logits_rows):
        if mask is not None and not mask[i]:
            continue
        mx = max(row)
        denom = sum(math.exp(x - mx) for x in row)
        total += -(row[gold[i]] - mx - math.log(denom))
        count += 1
    return total / count


def central_diff_grads(loss_fn, arrays, step=1e-5):
    """Central finite differences of loss_fn with respect to each array, in place."""
    grads = []
    for arr in arrays:
        grad = arr.copy()
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = loss_fn()
            flat[i] = keep - step
            down = loss_fn()
            flat[i] = keep
            gflat[i] = (up - down) / (2.0 * step)
        grads.append(grad)
    return grads


def max_rel_err(a, b, floor=1e-8):
    """Inf-norm relative error between two gradients.

    Central differences carry an absolute noise floor of roughly 1e-10
    (rounding in the loss evaluations), so per-entry relative error is
    meaningless for entries near zero; the error is scaled by the largest
    entry instead, which is the standard gradient-check convention.
    """
    diff = max(abs(float(x) - float(y)) for x, y in zip(a.reshape(-1), b.reshape(-1)))
    scale = max(
        floor,
        max(abs(float(x)) for x in a.reshape(-1)),
        max(abs(float(y)) for y in b.reshape(-1)),
    )
    return diff / scale


def random_layout(rng, n, types, density=0.4, max_len=3):
    """Random non-overlapping typed spans over n positions."""
    spans = []
    i = 0
    while i < n:
        if rng.random() < density:
            length = rng.randint(1, min(max_len, n - i))
            spans.append(EntitySpan(i, i + length - 1, rng.choice(types)))
            i += length
        else:
            i += 1
    return spans


def brute_force_scores(gold, pred):
    """Set-intersection scorer over (sentence, begin, end, type) tuples.

    Returns (per_class_f1 dict, macro_p, macro_r, macro_f1) computed
    independently of the evaluator.
    """
    gold_tuples = {(i, s.begin, s.end, s.etype) for i, spans in enumerate(gold) for s in spans}
    pred_tuples = {(i, s.begin, s.end, s.etype) for i, spans in enumerate(pred) for s in spans}
    classes = sorted({t[3] for t in gold_tuples | pred_tuples})
    per_class = {}
    precisions, recalls, f1s = [], [], []
    for cls in classes:
        g = {t for t in gold_tuples if t[3] == cls}
        p = {t for t in pred_tuples if t[3] == cls}
        tp = len(g & p)
        precision = tp / len(p) if p else 0.0
        recall = tp / len(g) if g else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = f1
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    k = len(classes)
    if k == 0:
        raise ValueError("no classes")
    return per_class, sum(precisions) / k, sum(recalls) / k, sum(f1s) / k
