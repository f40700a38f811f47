"""Dual-paradigm named entity recognition over pluggable token embeddings.

Two model kinds share one corpus and evaluation stack: a sequence
labeler that classifies every subtoken into a BIO tag, and a span
predictor that classifies every candidate subtoken span into an entity
type or a negative class.  Both train linear heads on frozen embeddings
and decode to word-aligned, non-overlapping entities.
"""

from .bio import EntitySpan, RepairPolicy, TagSpace, bio_to_spans, build_tagspace, spans_to_bio, validate_bio
from .corpus import (
    AnnotatedSentence,
    ChunkSplitter,
    LabelSet,
    SubtokenizedSentence,
    identity_splitter,
    parse_conll,
    project_tags_to_subtokens,
    serialize_conll,
    subtokenize,
)
from .embeddings import HashedEmbedder, embed, hashed_embed, load_embedding_file, provider_from_spec
from .evaluation import EvalReport, evaluate_spans, macro_scores, match_entities, report_text
from .heads import LinearHead, init_head, load_checkpoint, save_checkpoint
from .seq_model import seq_forward, seq_grad, seq_loss, seq_predict
from .span_model import (
    SpanLabelSpace,
    align_spans_to_words,
    build_span_space,
    enumerate_spans,
    represent_spans,
    resolve_overlaps,
    span_grad,
    span_loss,
    span_predict,
)
from .training import AdamState, TrainConfig, TrainResult, adam_step, train

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "AnnotatedSentence",
    "ChunkSplitter",
    "EntitySpan",
    "EvalReport",
    "HashedEmbedder",
    "LabelSet",
    "LinearHead",
    "RepairPolicy",
    "SpanLabelSpace",
    "SubtokenizedSentence",
    "TagSpace",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "align_spans_to_words",
    "bio_to_spans",
    "build_span_space",
    "build_tagspace",
    "embed",
    "enumerate_spans",
    "evaluate_spans",
    "hashed_embed",
    "identity_splitter",
    "init_head",
    "load_checkpoint",
    "load_embedding_file",
    "macro_scores",
    "match_entities",
    "parse_conll",
    "project_tags_to_subtokens",
    "provider_from_spec",
    "report_text",
    "represent_spans",
    "resolve_overlaps",
    "save_checkpoint",
    "seq_forward",
    "seq_grad",
    "seq_loss",
    "seq_predict",
    "serialize_conll",
    "span_grad",
    "span_loss",
    "span_predict",
    "spans_to_bio",
    "subtokenize",
    "train",
    "validate_bio",
]
