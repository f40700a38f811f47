"""Mini-batch training of either head with Adam and early stopping.

Each batch's gradient is the mean of the per-sentence gradients; one
optimizer step runs per batch.  After every epoch the head is scored on
the validation set with entity-level macro F1, and the best-scoring head
is returned.  All randomness flows from the config seed through named
sub-seeds, so identical configs reproduce bit-identical runs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bio import RepairPolicy, TagSpace
from .errors import NumericError
from .evaluation import evaluate_spans
from .heads import LinearHead
from .seq_model import SeqExample, seq_loss_and_grad, seq_predict
from .span_model import (
    SpanExample,
    SpanLabelSpace,
    align_spans_to_words,
    classify_spans,
    resolve_overlaps,
    span_loss_and_grad,
)

SEQ = "seq"
SPAN = "span"


def derive_seed(base: int, name: str) -> int:
    """Stable named sub-seed from the single run seed."""
    digest = hashlib.blake2b(f"{base}:{name}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class TrainConfig:
    model_kind: str = SEQ
    learning_rate: float = 1e-5
    batch_size: int = 1
    max_epochs: int = 10
    patience: int = 3
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.model_kind not in (SEQ, SPAN):
            raise ValueError(f"model_kind must be '{SEQ}' or '{SPAN}'")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass
class AdamState:
    """First and second moment accumulators plus the shared step counter."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState, config: TrainConfig) -> AdamState:
    """One Adam update, in place on the parameter arrays."""
    state.step += 1
    for name in params:
        grad = grads[name]
        if not np.isfinite(grad).all():
            raise NumericError(f"non-finite gradient for parameter {name!r}")
        if grad.shape != params[name].shape:
            raise ValueError(f"gradient shape mismatch for parameter {name!r}")
        kernels.adam_update(
            params[name].reshape(-1),
            np.ascontiguousarray(grad, dtype=np.float64).reshape(-1),
            state.m[name].reshape(-1),
            state.v[name].reshape(-1),
            state.step,
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
        )
    return state


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_loss: float
    val_precision: float
    val_recall: float
    val_macro_f1: float


@dataclass(frozen=True)
class TrainResult:
    head: LinearHead
    history: tuple[EpochRecord, ...]
    best_epoch: int


def _loss_and_grad(example, head, config):
    if config.model_kind == SEQ:
        return seq_loss_and_grad(head, example.emb, example.gold, example.mask)
    return span_loss_and_grad(head, example.reps, example.gold)


def predict_word_spans(example, head, config, out_space, overlap_seed: int):
    """Decode one prepared example to word-level spans, per model kind."""
    if config.model_kind == SEQ:
        return seq_predict(head, example.emb, example.sub, out_space, repair=RepairPolicy.ORPHAN_I_STARTS_ENTITY)
    typed = classify_spans(head, example.reps, example.spans, out_space)
    word_level = align_spans_to_words(typed, example.sub)
    return resolve_overlaps(word_level, overlap_seed, type_order=out_space.labels[:-1])


def evaluate_examples(examples, head, config, out_space, overlap_seed: int):
    gold = [ex.gold_spans for ex in examples]
    pred = [predict_word_spans(ex, head, config, out_space, overlap_seed) for ex in examples]
    return evaluate_spans(gold, pred)


def train(head: LinearHead, train_set, val_set, config: TrainConfig, out_space) -> TrainResult:
    """Train the head; returns the best head by validation macro F1.

    ``train_set`` and ``val_set`` hold prepared examples matching the
    configured model kind; ``out_space`` is the TagSpace (sequence) or
    SpanLabelSpace (span) the head classifies into.
    """
    if not train_set or not val_set:
        raise ValueError("train and validation sets must be non-empty")
    if isinstance(out_space, TagSpace) != (config.model_kind == SEQ):
        raise ValueError("out_space does not match model_kind")
    expected = SeqExample if config.model_kind == SEQ else SpanExample
    if not all(isinstance(ex, expected) for ex in list(train_set) + list(val_set)):
        raise ValueError(f"examples do not match model_kind {config.model_kind!r}")

    shuffle_rng = np.random.default_rng(derive_seed(config.seed, "shuffle"))
    overlap_seed = derive_seed(config.seed, "overlap")
    params = head.params()
    state = AdamState.for_params(params)
    history: list[EpochRecord] = []
    best_head = head.copy()
    best_f1 = -1.0
    best_epoch = -1
    epochs_since_improvement = 0

    for epoch in range(1, config.max_epochs + 1):
        order = shuffle_rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start : start + config.batch_size]]
            grad_sum: dict[str, np.ndarray] | None = None
            for example in batch:
                loss, grads = _loss_and_grad(example, head, config)
                losses.append(loss)
                if grad_sum is None:
                    grad_sum = grads
                else:
                    for name in grad_sum:
                        grad_sum[name] += grads[name]
            mean_grads = {name: g / len(batch) for name, g in grad_sum.items()}
            adam_step(params, mean_grads, state, config)

        report = evaluate_examples(val_set, head, config, out_space, overlap_seed)
        history.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=float(np.mean(losses)),
                val_precision=report.macro_precision,
                val_recall=report.macro_recall,
                val_macro_f1=report.macro_f1,
            )
        )
        if report.macro_f1 > best_f1:
            best_f1 = report.macro_f1
            best_head = head.copy()
            best_epoch = epoch
            epochs_since_improvement = 0
        else:
            epochs_since_improvement += 1
            if epochs_since_improvement >= config.patience:
                break

    return TrainResult(head=best_head, history=tuple(history), best_epoch=best_epoch)
