"""Per-subtoken embedding providers.

Two interchangeable sources for the subtoken vectors the classifier heads
consume: a deterministic hashed embedder (context-free, for desk-scale
experiments and tests) and matrices precomputed by an external encoder,
read from the interchange file format.

Interchange format (JSON Lines, UTF-8): the first line is a header map
{"format": "ner-embeddings", "version": 1, "encoder": <text>,
"specials_included": <bool>}; every following line is one record map with
fields id, subtokens, word_index (-1 marks sentence-boundary specials),
dim, and vectors (row-major, one row per subtoken).  Numbers are 32-bit
floats serialized as decimal text.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .corpus import NO_WORD, AnnotatedSentence, SubtokenizedSentence, subtokenize
from .errors import CoverageError, EmbeddingFormatError

FORMAT_NAME = "ner-embeddings"
FORMAT_VERSION = 1


def _token_vector(token: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic vector in [-1, 1] for one subtoken string.

    Successive 64-byte blake2b digests of "<seed>|<block>|<token>" are
    read as big-endian uint64 words and scaled into (-1, 1); the token
    string is the only input besides the seed, so the embedding is
    context-free by construction.
    """
    blocks = []
    for block in range(math.ceil(dim / 8)):
        digest = hashlib.blake2b(
            f"{seed}|{block}|{token}".encode("utf-8"), digest_size=64
        ).digest()
        words = np.frombuffer(digest, dtype=">u8").astype(np.float64)
        blocks.append((words + 0.5) / 2.0**64 * 2.0 - 1.0)
    return np.concatenate(blocks)[:dim]


def hashed_embed(sub: SubtokenizedSentence, dim: int, seed: int) -> np.ndarray:
    """Embedding matrix for a subtokenized sentence, one hashed row per subtoken."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    cache: dict[str, np.ndarray] = {}
    rows = np.empty((len(sub), dim))
    for i, token in enumerate(sub.subtokens):
        vec = cache.get(token)
        if vec is None:
            vec = _token_vector(token, dim, seed)
            cache[token] = vec
        rows[i] = vec
    return rows


class HashedEmbedder:
    """Context-free deterministic embedding provider."""

    def __init__(self, dim: int, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def rows_for(self, sub: SubtokenizedSentence, sentence_id: str | None = None) -> np.ndarray:
        rows = np.empty((len(sub), self.dim))
        for i, token in enumerate(sub.subtokens):
            vec = self._cache.get(token)
            if vec is None:
                vec = _token_vector(token, self.dim, self.seed)
                self._cache[token] = vec
            rows[i] = vec
        return rows

    def subtokenized(self, sentence: AnnotatedSentence, splitter, add_specials: bool) -> SubtokenizedSentence:
        return subtokenize(sentence, splitter, add_specials)

    def __repr__(self):
        return f"HashedEmbedder(dim={self.dim}, seed={self.seed})"


def _synth_char_spans(subtokens, word_index):
    """Contiguous per-word char spans over the concatenated subtoken strings."""
    spans = []
    offset = 0
    prev_word = None
    for token, w in zip(subtokens, word_index):
        if w == NO_WORD:
            spans.append((offset, offset))
            continue
        if prev_word is not None and w != prev_word:
            offset += 1
        spans.append((offset, offset + len(token)))
        offset += len(token)
        prev_word = w
    return tuple(spans)


class FileEmbeddingProvider:
    """Serves precomputed matrices and their subtokenizations by sentence id."""

    def __init__(self, dim: int, encoder: str, specials_included: bool, records):
        self.dim = dim
        self.encoder = encoder
        self.specials_included = specials_included
        self._subs: dict[str, SubtokenizedSentence] = {}
        self._matrices: dict[str, np.ndarray] = {}
        self.ids: list[str] = []
        for sid, sub, matrix in records:
            self.ids.append(sid)
            self._subs[sid] = sub
            self._matrices[sid] = matrix

    def matrix(self, sentence_id: str) -> np.ndarray:
        try:
            return self._matrices[sentence_id]
        except KeyError:
            raise CoverageError(f"no embeddings stored for sentence id {sentence_id!r}") from None

    def subtokenized_by_id(self, sentence_id: str) -> SubtokenizedSentence:
        try:
            return self._subs[sentence_id]
        except KeyError:
            raise CoverageError(f"no embeddings stored for sentence id {sentence_id!r}") from None

    def subtokenized(self, sentence: AnnotatedSentence, splitter, add_specials: bool) -> SubtokenizedSentence:
        """The stored subtokenization; splitter and specials flag are ignored."""
        sub = self.subtokenized_by_id(sentence.id)
        if sub.num_words != len(sentence):
            raise CoverageError(
                f"sentence {sentence.id!r}: file covers {sub.num_words} words, "
                f"input has {len(sentence)}"
            )
        return sub

    def rows_for(self, sub: SubtokenizedSentence, sentence_id: str | None = None) -> np.ndarray:
        if sentence_id is None:
            raise CoverageError("file-backed provider needs a sentence id")
        matrix = self.matrix(sentence_id)
        if matrix.shape[0] != len(sub):
            raise EmbeddingFormatError(
                f"sentence {sentence_id!r}: stored matrix has {matrix.shape[0]} rows, "
                f"subtokenization has {len(sub)}"
            )
        return matrix

    def __repr__(self):
        return (
            f"FileEmbeddingProvider(dim={self.dim}, encoder={self.encoder!r}, "
            f"sentences={len(self.ids)})"
        )


def _validate_record(obj, record_no, dim, specials_included):
    for key in ("id", "subtokens", "word_index", "dim", "vectors"):
        if key not in obj:
            raise EmbeddingFormatError(f"missing field {key!r}", record=record_no)
    sid = obj["id"]
    subtokens = obj["subtokens"]
    word_index = obj["word_index"]
    vectors = obj["vectors"]
    if not isinstance(sid, str):
        raise EmbeddingFormatError("id must be a string", record=record_no)
    if not subtokens or not all(isinstance(t, str) for t in subtokens):
        raise EmbeddingFormatError("subtokens must be a non-empty list of strings", record=record_no)
    if len(word_index) != len(subtokens) or len(vectors) != len(subtokens):
        raise EmbeddingFormatError(
            "subtokens, word_index and vectors must have equal length", record=record_no
        )
    rdim = obj["dim"]
    if not isinstance(rdim, int) or rdim < 1:
        raise EmbeddingFormatError("dim must be a positive integer", record=record_no)
    if dim is not None and rdim != dim:
        raise EmbeddingFormatError(
            f"dim {rdim} differs from earlier records ({dim})", record=record_no
        )
    seen_word = -1
    specials = []
    for pos, w in enumerate(word_index):
        if not isinstance(w, int):
            raise EmbeddingFormatError("word_index entries must be integers", record=record_no)
        if w == NO_WORD:
            specials.append(pos)
            continue
        if w < 0:
            raise EmbeddingFormatError(f"bad word index {w}", record=record_no)
        if w not in (seen_word, seen_word + 1):
            raise EmbeddingFormatError(
                f"word_index must be non-decreasing and gapless, got {w} after {seen_word}",
                record=record_no,
            )
        seen_word = max(seen_word, w)
    if seen_word < 0:
        raise EmbeddingFormatError("record contains no word-aligned subtokens", record=record_no)
    if specials and not specials_included:
        raise EmbeddingFormatError(
            "word_index contains specials but the header says specials_included=false",
            record=record_no,
        )
    if specials_included and specials != [0, len(word_index) - 1]:
        raise EmbeddingFormatError(
            "specials must be exactly the first and last positions", record=record_no
        )
    try:
        matrix = np.asarray(vectors, dtype=np.float64)
    except (TypeError, ValueError):
        raise EmbeddingFormatError("vectors must be numeric rows", record=record_no) from None
    if matrix.ndim != 2 or matrix.shape != (len(subtokens), rdim):
        raise EmbeddingFormatError(
            f"vector block must be {len(subtokens)}x{rdim}", record=record_no
        )
    if not np.isfinite(matrix).all():
        raise EmbeddingFormatError("vectors contain non-finite entries", record=record_no)
    # values travel as float32; quantize so equality against the file holds
    matrix = matrix.astype(np.float32).astype(np.float64)
    sub = SubtokenizedSentence(
        subtokens=tuple(subtokens),
        word_index=tuple(word_index),
        char_spans=_synth_char_spans(subtokens, word_index),
        has_specials=bool(specials),
    )
    return sid, sub, matrix, rdim


def load_embedding_file(path) -> FileEmbeddingProvider:
    """Load an interchange file into a read-only provider."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise EmbeddingFormatError(f"{path}: empty embedding file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise EmbeddingFormatError(f"{path}: bad header line: {exc}") from None
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise EmbeddingFormatError(f"{path}: not a {FORMAT_NAME} file")
    if header.get("version") != FORMAT_VERSION:
        raise EmbeddingFormatError(f"{path}: unsupported version {header.get('version')!r}")
    specials_included = bool(header.get("specials_included", False))
    encoder = str(header.get("encoder", ""))
    records = []
    seen_ids = set()
    dim = None
    for record_no, line in enumerate(lines[1:], start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EmbeddingFormatError(f"bad JSON: {exc}", record=record_no) from None
        sid, sub, matrix, dim = _validate_record(obj, record_no, dim, specials_included)
        if sid in seen_ids:
            raise EmbeddingFormatError(f"duplicate sentence id {sid!r}", record=record_no)
        seen_ids.add(sid)
        records.append((sid, sub, matrix))
    if dim is None:
        raise EmbeddingFormatError(f"{path}: no records")
    return FileEmbeddingProvider(dim, encoder, specials_included, records)


def embed(provider, sub: SubtokenizedSentence, sentence_id: str | None = None) -> np.ndarray:
    """Matrix with one row per subtoken position of ``sub``."""
    rows = provider.rows_for(sub, sentence_id)
    if rows.shape != (len(sub), provider.dim):
        raise EmbeddingFormatError(
            f"provider returned shape {rows.shape}, expected ({len(sub)}, {provider.dim})"
        )
    return rows


def provider_from_spec(spec: str):
    """Build a provider from "hashed:<dim>:<seed>" or "file:<path>"."""
    if spec.startswith("hashed:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad provider spec {spec!r}; expected hashed:<dim>:<seed>")
        try:
            return HashedEmbedder(dim=int(parts[1]), seed=int(parts[2]))
        except ValueError:
            raise ValueError(f"bad provider spec {spec!r}") from None
    if spec.startswith("file:"):
        return load_embedding_file(spec.split(":", 1)[1])
    raise ValueError(f"unknown provider spec {spec!r}")


def materialize(sentences, provider, splitter, add_specials: bool):
    """Pair every sentence with its subtokenization and embedding matrix.

    Hashed providers subtokenize with the given splitter; file-backed
    providers return the subtokenization stored alongside the vectors.
    """
    out = []
    for sentence in sentences:
        sub = provider.subtokenized(sentence, splitter, add_specials)
        out.append((sentence, sub, embed(provider, sub, sentence.id)))
    return out
