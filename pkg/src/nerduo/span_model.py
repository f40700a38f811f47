"""Span prediction model: classify every candidate subtoken span.

Candidates are all (b, e) pairs with b <= e over the non-special
positions; each is represented by concatenating the embeddings of its
begin and end subtokens and classified into an entity type or the extra
negative class marking a non-entity.  Decoding drops negatives, snaps
the survivors to word boundaries, and resolves overlaps in two stages:
containment removal, then seeded random removal of partial overlaps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bio import EntitySpan, RepairPolicy, bio_to_spans
from .corpus import NO_WORD, LabelSet, SubtokenizedSentence, word_extents
from .errors import LabelingError
from .heads import LinearHead, forward

NEG_LABEL = "Neg_Span"


@dataclass(frozen=True)
class SpanLabelSpace:
    """Entity types plus the negative class, which always sits last."""

    labels: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.labels.count(NEG_LABEL) != 1 or self.labels[-1] != NEG_LABEL:
            raise LabelingError(f"{NEG_LABEL} must appear exactly once, in last position")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.labels)})

    def __len__(self):
        return len(self.labels)

    @property
    def neg_index(self) -> int:
        return len(self.labels) - 1


def build_span_space(label_set: LabelSet) -> SpanLabelSpace:
    if len(label_set) == 0:
        raise LabelingError("cannot build a span label space from an empty label set")
    return SpanLabelSpace(labels=tuple(label_set.types) + (NEG_LABEL,))


def enumerate_spans(n: int, max_len: int | None = None) -> list[tuple[int, int]]:
    """All (b, e) pairs with b <= e in lexicographic order.

    Uncapped, that is n(n+1)/2 candidates; ``max_len`` optionally caps
    the span length e - b + 1.
    """
    if n < 1:
        raise ValueError("need at least one position to enumerate spans")
    if max_len is not None and max_len < 1:
        raise ValueError("max_len must be >= 1")
    spans = []
    for b in range(n):
        top = n if max_len is None else min(n, b + max_len)
        for e in range(b, top):
            spans.append((b, e))
    return spans


def represent_spans(emb: np.ndarray, spans) -> np.ndarray:
    """Concatenated begin/end embedding rows, shape (k, 2d)."""
    if len(spans) == 0:
        return np.empty((0, 2 * emb.shape[1]))
    begins = np.asarray([b for b, _ in spans], dtype=np.int64)
    ends = np.asarray([e for _, e in spans], dtype=np.int64)
    if begins.min() < 0 or ends.max() >= emb.shape[0]:
        raise IndexError("span endpoint outside the embedding matrix")
    return kernels.gather_span_reps(emb, begins, ends)


def span_loss(logits: np.ndarray, gold_indices) -> float:
    """Mean negative log softmax probability of the gold span labels."""
    logits = np.asarray(logits, dtype=np.float64)
    gold = np.asarray(gold_indices, dtype=np.int64)
    if logits.shape[0] == 0:
        raise ValueError("no spans to score")
    if gold.shape != (logits.shape[0],):
        raise ValueError("need one gold label per span")
    if ((gold < 0) | (gold >= logits.shape[1])).any():
        raise ValueError("gold index out of range")
    mask = np.ones(logits.shape[0], dtype=bool)
    loss, _ = kernels.softmax_xent(logits, gold, mask)
    return float(loss)


def span_loss_and_grad(head: LinearHead, reps: np.ndarray, gold_indices):
    gold = np.asarray(gold_indices, dtype=np.int64)
    logits = forward(head, reps)
    if logits.shape[0] == 0:
        raise ValueError("no spans to score")
    if ((gold < 0) | (gold >= logits.shape[1])).any():
        raise ValueError("gold index out of range")
    mask = np.ones(logits.shape[0], dtype=bool)
    loss, dlogits = kernels.softmax_xent(logits, gold, mask)
    grads = {"weights": dlogits.T @ reps, "bias": dlogits.sum(axis=0)}
    return float(loss), grads


def span_grad(head: LinearHead, reps: np.ndarray, gold_indices):
    _, grads = span_loss_and_grad(head, reps, gold_indices)
    return grads


def classify_spans(head: LinearHead, reps: np.ndarray, spans, space: SpanLabelSpace) -> list[EntitySpan]:
    """Argmax label per candidate row; negatives are dropped.

    Logit ties resolve to the lowest label ordinal, so a type beats the
    negative class (which sits last).
    """
    if len(spans) == 0:
        return []
    logits = forward(head, reps)
    picks = np.argmax(logits, axis=1)
    out = []
    for (b, e), k in zip(spans, picks):
        if k != space.neg_index:
            out.append(EntitySpan(b, e, space.labels[k]))
    return out


def span_predict(head: LinearHead, emb: np.ndarray, spans, space: SpanLabelSpace) -> list[EntitySpan]:
    """Classify candidate (b, e) subtoken spans; see classify_spans."""
    if len(spans) == 0:
        return []
    return classify_spans(head, represent_spans(emb, spans), spans, space)


def align_spans_to_words(spans, sub: SubtokenizedSentence) -> list[EntitySpan]:
    """Snap subtoken spans to the words containing their endpoints."""
    out = []
    for span in spans:
        wb = sub.word_index[span.begin]
        we = sub.word_index[span.end]
        if wb == NO_WORD or we == NO_WORD:
            raise ValueError(f"span endpoint on a special position: ({span.begin}, {span.end})")
        out.append(EntitySpan(wb, we, span.etype))
    return out


def _ordinal(etype: str, type_order) -> int:
    try:
        return type_order.index(etype)
    except ValueError:
        raise LabelingError(f"unknown entity type {etype!r}") from None


def resolve_overlaps(spans, rng_seed: int, type_order=None) -> list[EntitySpan]:
    """Two-stage removal until no two surviving spans overlap.

    Stage 1 repeatedly drops any span fully contained in another (on
    identical extents the lower type ordinal survives).  Stage 2 walks
    the remaining spans in (begin, end, ordinal) order and, for the first
    partially overlapping pair, removes one of the two chosen by the
    seeded generator, repeating until no overlap is left.
    """
    if type_order is None:
        type_order = sorted({s.etype for s in spans})
    else:
        type_order = list(type_order)

    def key(s: EntitySpan):
        return (s.begin, s.end, _ordinal(s.etype, type_order))

    alive = sorted(spans, key=key)

    # stage 1: containment
    changed = True
    while changed:
        changed = False
        for i, inner in enumerate(alive):
            for j, outer in enumerate(alive):
                if i == j:
                    continue
                if not outer.contains(inner):
                    continue
                if (inner.begin, inner.end) == (outer.begin, outer.end):
                    drop = i if key(inner) >= key(outer) else j
                else:
                    drop = i
                del alive[drop]
                changed = True
                break
            if changed:
                break

    # stage 2: partial overlaps
    rng = random.Random(rng_seed)
    while True:
        pair = None
        for i in range(len(alive)):
            for j in range(i + 1, len(alive)):
                if alive[i].overlaps(alive[j]):
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            break
        del alive[pair[rng.randrange(2)]]
    return alive


def gold_subtoken_extents(gold_word_spans, sub: SubtokenizedSentence) -> dict[tuple[int, int], str]:
    """Map each gold entity to its exact subtoken extent."""
    extents = word_extents(sub)
    out = {}
    for span in gold_word_spans:
        b = extents[span.begin][0]
        e = extents[span.end][1]
        out[(b, e)] = span.etype
    return out


@dataclass(frozen=True)
class SpanExample:
    """One sentence prepared for span-model training or evaluation."""

    sentence_id: str
    reps: np.ndarray  # (k, 2d)
    gold: np.ndarray  # int64 label index per candidate
    spans: tuple[tuple[int, int], ...]  # candidate subtoken index pairs
    sub: SubtokenizedSentence
    gold_spans: tuple[EntitySpan, ...]  # word level


def build_span_examples(materialized, space: SpanLabelSpace, max_len: int | None = None) -> list[SpanExample]:
    """Assemble span candidates with exact-match gold labels.

    A candidate gets an entity type iff its subtoken extent matches a
    gold entity exactly; every other candidate is the negative class.
    """
    examples = []
    for sentence, sub, emb in materialized:
        positions = sub.content_positions()
        ords = enumerate_spans(len(positions), max_len=max_len)
        spans = tuple((positions[b], positions[e]) for b, e in ords)
        gold_word_spans = tuple(bio_to_spans(sentence.tags, repair=RepairPolicy.STRICT))
        extent_types = gold_subtoken_extents(gold_word_spans, sub)
        gold = np.asarray(
            [space.index.get(extent_types.get(span, NEG_LABEL), space.neg_index) for span in spans],
            dtype=np.int64,
        )
        examples.append(
            SpanExample(
                sentence_id=sentence.id,
                reps=represent_spans(emb, spans),
                gold=gold,
                spans=spans,
                sub=sub,
                gold_spans=gold_word_spans,
            )
        )
    return examples


def span_pipeline_predict(
    head: LinearHead,
    emb: np.ndarray,
    sub: SubtokenizedSentence,
    space: SpanLabelSpace,
    rng_seed: int,
    max_len: int | None = None,
) -> list[EntitySpan]:
    """Full decode: classify candidates, align to words, resolve overlaps."""
    positions = sub.content_positions()
    ords = enumerate_spans(len(positions), max_len=max_len)
    spans = [(positions[b], positions[e]) for b, e in ords]
    typed = span_predict(head, emb, spans, space)
    word_level = align_spans_to_words(typed, sub)
    return resolve_overlaps(word_level, rng_seed, type_order=space.labels[:-1])
