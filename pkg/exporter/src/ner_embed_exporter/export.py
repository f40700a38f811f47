"""Run a pretrained transformer over CoNLL sentences and write the
ner-embeddings interchange file.

Each sentence is fed to the encoder as the raw string of its words
joined by single spaces; the tokenizer's character offsets map every
subtoken back to the word containing its first character, which is the
alignment the downstream heads rely on.  Vectors come from the last
hidden layer and are serialized as float32 decimal text, one JSON record
per sentence, after a single JSON header line.
"""

from __future__ import annotations

import bisect
import json
import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from .conll import read_sentences

logger = logging.getLogger(__name__)

FORMAT_NAME = "ner-embeddings"
FORMAT_VERSION = 1

# tokenizers report a huge sentinel when they carry no real limit
_NO_LIMIT = int(1e9)


@dataclass
class ExportConfig:
    model: str
    input_path: str
    output_path: str
    include_specials: bool = False
    precision_note: str = "float32 decimal text"

    def __post_init__(self):
        if not self.model:
            raise ValueError("model name must be non-empty")


@dataclass
class ExportSummary:
    exported: int = 0
    skipped: list[str] = field(default_factory=list)


def _word_starts(words):
    starts = []
    offset = 0
    for word in words:
        starts.append(offset)
        offset += len(word) + 1
    return starts


def _align(words, encoding):
    """word index per subtoken; -1 for special positions.

    A subtoken belongs to the word containing its first character in the
    space-joined sentence string.
    """
    starts = _word_starts(words)
    word_index = []
    for (begin, _), special in zip(encoding["offset_mapping"], encoding["special_tokens_mask"]):
        if special:
            word_index.append(-1)
            continue
        w = bisect.bisect_right(starts, begin) - 1
        word_index.append(w)
    return word_index


def _covers_all_words(word_index, n_words):
    seen = {w for w in word_index if w >= 0}
    return seen == set(range(n_words))


def _length_limit(tokenizer, model):
    candidates = []
    if tokenizer.model_max_length and tokenizer.model_max_length < _NO_LIMIT:
        candidates.append(int(tokenizer.model_max_length))
    max_pos = getattr(model.config, "max_position_embeddings", None)
    if max_pos:
        candidates.append(int(max_pos))
    return min(candidates) if candidates else None


def export(config: ExportConfig) -> ExportSummary:
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModel.from_pretrained(config.model)
    model.eval()
    limit = _length_limit(tokenizer, model)

    with open(config.input_path, encoding="utf-8") as fh:
        sentences = read_sentences(fh.read())
    seen_ids = set()
    for sentence in sentences:
        if sentence.id in seen_ids:
            raise ValueError(f"duplicate sentence id {sentence.id!r} in {config.input_path}")
        seen_ids.add(sentence.id)

    summary = ExportSummary()
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "encoder": config.model,
        "specials_included": config.include_specials,
        "precision": config.precision_note,
    }
    with open(config.output_path, "w", encoding="utf-8") as out:
        out.write(json.dumps(header) + "\n")
        for sentence in sentences:
            record = _export_sentence(sentence, tokenizer, model, limit, config.include_specials)
            if record is None:
                summary.skipped.append(sentence.id)
                continue
            out.write(json.dumps(record) + "\n")
            summary.exported += 1
    logger.info(
        "exported %d sentence(s) to %s (%d skipped)",
        summary.exported,
        config.output_path,
        len(summary.skipped),
    )
    return summary


def _export_sentence(sentence, tokenizer, model, limit, include_specials):
    text = " ".join(sentence.words)
    encoding = tokenizer(
        text,
        add_special_tokens=include_specials,
        return_offsets_mapping=True,
        return_special_tokens_mask=True,
    )
    ids = encoding["input_ids"]
    if not ids:
        logger.warning("sentence %s: empty tokenization, skipped", sentence.id)
        return None
    if limit is not None and len(ids) > limit:
        logger.warning(
            "sentence %s: %d subtokens exceed the encoder limit of %d, skipped",
            sentence.id,
            len(ids),
            limit,
        )
        return None
    word_index = _align(sentence.words, encoding)
    if not _covers_all_words(word_index, len(sentence.words)):
        logger.warning("sentence %s: tokenizer left a word without subtokens, skipped", sentence.id)
        return None

    with torch.no_grad():
        output = model(input_ids=torch.tensor([ids]), attention_mask=torch.ones(1, len(ids), dtype=torch.long))
    hidden = output.last_hidden_state[0].to(torch.float32).numpy()

    return {
        "id": sentence.id,
        "subtokens": tokenizer.convert_ids_to_tokens(ids),
        "word_index": word_index,
        "dim": int(hidden.shape[1]),
        # float() of a float32 is exact, so the decimal text reparses bit-identically
        "vectors": [[float(v) for v in row] for row in hidden],
    }
