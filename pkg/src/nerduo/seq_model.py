"""Sequence labeling model: BIO classification of every subtoken.

A linear head maps each subtoken embedding to one logit per BIO tag; the
loss is the mean negative log softmax probability of the gold tag over
the non-special positions.  Decoding takes the argmax tag row, converts
it to subtoken spans, and snaps every span to the words enveloping its
endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .bio import EntitySpan, RepairPolicy, TagSpace, bio_to_spans
from .corpus import NO_WORD, AnnotatedSentence, SubtokenizedSentence, project_tags_to_subtokens
from .heads import LinearHead, forward


def seq_forward(head: LinearHead, emb: np.ndarray) -> np.ndarray:
    """Per-subtoken logits, shape (n, |tags|)."""
    return forward(head, emb)


def _check_loss_inputs(logits, gold, mask):
    n, c = logits.shape
    if gold.shape != (n,) or mask.shape != (n,):
        raise ValueError("gold and mask must have one entry per logit row")
    if not mask.any():
        raise ValueError("all positions are masked out of the loss")
    if ((gold < 0) | (gold >= c))[mask].any():
        raise ValueError("gold index out of range")


def seq_loss(logits: np.ndarray, gold_indices, loss_mask) -> float:
    """Mean negative log softmax probability of the gold tags.

    The mean runs over unmasked positions only; special positions must be
    masked out by the caller.
    """
    gold = np.asarray(gold_indices, dtype=np.int64)
    mask = np.asarray(loss_mask, dtype=bool)
    logits = np.asarray(logits, dtype=np.float64)
    _check_loss_inputs(logits, gold, mask)
    loss, _ = kernels.softmax_xent(logits, gold, mask)
    return float(loss)


def seq_loss_and_grad(head: LinearHead, emb: np.ndarray, gold_indices, loss_mask):
    """Loss plus analytic gradients for the head parameters."""
    gold = np.asarray(gold_indices, dtype=np.int64)
    mask = np.asarray(loss_mask, dtype=bool)
    logits = seq_forward(head, emb)
    _check_loss_inputs(logits, gold, mask)
    loss, dlogits = kernels.softmax_xent(logits, gold, mask)
    grads = {"weights": dlogits.T @ emb, "bias": dlogits.sum(axis=0)}
    return float(loss), grads


def seq_grad(head: LinearHead, emb: np.ndarray, gold_indices, loss_mask):
    """Gradients of the loss with respect to weights and bias."""
    _, grads = seq_loss_and_grad(head, emb, gold_indices, loss_mask)
    return grads


@dataclass(frozen=True)
class TokenPrediction:
    """Raw logits plus argmax tags over the non-special positions."""

    logits: np.ndarray
    tags: tuple[str, ...]


def predict_tags(head: LinearHead, emb: np.ndarray, sub: SubtokenizedSentence, tag_space: TagSpace) -> TokenPrediction:
    logits = seq_forward(head, emb)
    positions = sub.content_positions()
    picks = np.argmax(logits[positions], axis=1)
    tags = tuple(tag_space.tags[i] for i in picks)
    return TokenPrediction(logits=logits, tags=tags)


def seq_predict(
    head: LinearHead,
    emb: np.ndarray,
    sub: SubtokenizedSentence,
    tag_space: TagSpace,
    repair: RepairPolicy = RepairPolicy.ORPHAN_I_STARTS_ENTITY,
) -> list[EntitySpan]:
    """Word-level entity spans decoded from the argmax tag row.

    Subtoken spans are remapped to the words containing their endpoints;
    spans that collide after remapping are merged by keeping the one that
    starts earlier.
    """
    prediction = predict_tags(head, emb, sub, tag_space)
    positions = sub.content_positions()
    word_spans: list[EntitySpan] = []
    for span in bio_to_spans(prediction.tags, repair=repair):
        wb = sub.word_index[positions[span.begin]]
        we = sub.word_index[positions[span.end]]
        candidate = EntitySpan(wb, we, span.etype)
        if word_spans and candidate.begin <= word_spans[-1].end:
            continue  # collision after remap: earlier-starting span wins
        word_spans.append(candidate)
    return word_spans


@dataclass(frozen=True)
class SeqExample:
    """One sentence prepared for sequence-model training or evaluation."""

    sentence_id: str
    emb: np.ndarray
    gold: np.ndarray  # int64 tag index per subtoken row (specials get O)
    mask: np.ndarray  # bool, False on special positions
    sub: SubtokenizedSentence
    gold_spans: tuple[EntitySpan, ...]  # word level


def build_seq_examples(materialized, tag_space: TagSpace) -> list[SeqExample]:
    """Assemble training examples from (sentence, sub, emb) triples."""
    examples = []
    for sentence, sub, emb in materialized:
        sub_tags = project_tags_to_subtokens(sentence, sub)
        gold = np.asarray([tag_space.index[t] for t in sub_tags], dtype=np.int64)
        mask = np.asarray([w != NO_WORD for w in sub.word_index], dtype=bool)
        gold_spans = tuple(bio_to_spans(sentence.tags, repair=RepairPolicy.STRICT))
        examples.append(
            SeqExample(
                sentence_id=sentence.id,
                emb=emb,
                gold=gold,
                mask=mask,
                sub=sub,
                gold_spans=gold_spans,
            )
        )
    return examples
