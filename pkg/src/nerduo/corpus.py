"""CoNLL ingestion and word/subtoken alignment.

Sentences are kept as immutable word-level records with BIO tags; the
subtoken view stores, for every subtoken, the index of the word that
contains it, so predictions made at subtoken level can always be snapped
back to whole words.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LabelingError, ParseError

# word_index sentinel for sentence-boundary markers
NO_WORD = -1

BEGIN_MARKER = "<s>"
END_MARKER = "</s>"


@dataclass(frozen=True)
class LabelSet:
    """Ordered set of entity type names."""

    types: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        types = tuple(self.types)
        object.__setattr__(self, "types", types)
        seen = {}
        for i, name in enumerate(types):
            if not name:
                raise LabelingError("entity type names must be non-empty")
            if name in ("O", "Neg_Span"):
                raise LabelingError(f"entity type name {name!r} is reserved")
            if name in seen:
                raise LabelingError(f"duplicate entity type name {name!r}")
            seen[name] = i
        object.__setattr__(self, "index", seen)

    def __len__(self):
        return len(self.types)

    def __contains__(self, name):
        return name in self.index


@dataclass(frozen=True)
class AnnotatedSentence:
    """Word tokens with gold BIO tags; comments are preserved verbatim."""

    id: str
    words: tuple[str, ...]
    tags: tuple[str, ...]
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "comments", tuple(self.comments))
        if len(self.words) != len(self.tags):
            raise ValueError(
                f"sentence {self.id!r}: {len(self.words)} words but {len(self.tags)} tags"
            )

    def __len__(self):
        return len(self.words)


@dataclass(frozen=True)
class SubtokenizedSentence:
    """Subtokens plus their alignment back to words.

    ``word_index[i]`` is the index of the word containing subtoken ``i``,
    or ``NO_WORD`` for sentence-boundary markers.  ``char_spans`` are
    offsets into the text reconstructed by joining the words with single
    spaces; spans of subtokens belonging to one word are contiguous.
    """

    subtokens: tuple[str, ...]
    word_index: tuple[int, ...]
    char_spans: tuple[tuple[int, int], ...]
    has_specials: bool = False

    def __post_init__(self):
        object.__setattr__(self, "subtokens", tuple(self.subtokens))
        object.__setattr__(self, "word_index", tuple(self.word_index))
        object.__setattr__(self, "char_spans", tuple(tuple(s) for s in self.char_spans))
        n = len(self.subtokens)
        if len(self.word_index) != n or len(self.char_spans) != n:
            raise ValueError("subtokens, word_index and char_spans must have equal length")

    def __len__(self):
        return len(self.subtokens)

    @property
    def num_words(self) -> int:
        return max((w for w in self.word_index if w != NO_WORD), default=-1) + 1

    def content_positions(self) -> list[int]:
        """Subtoken positions that belong to a word (specials excluded)."""
        return [i for i, w in enumerate(self.word_index) if w != NO_WORD]


def word_extents(sub: SubtokenizedSentence) -> list[tuple[int, int]]:
    """First and last subtoken position of every word, in word order."""
    extents: list[list[int]] = [[-1, -1] for _ in range(sub.num_words)]
    for pos, w in enumerate(sub.word_index):
        if w == NO_WORD:
            continue
        if extents[w][0] < 0:
            extents[w][0] = pos
        extents[w][1] = pos
    for w, (first, _) in enumerate(extents):
        if first < 0:
            raise ValueError(f"word {w} has no subtokens")
    return [(first, last) for first, last in extents]


# ---------------------------------------------------------------------------
# Subtoken splitters


def identity_splitter(word: str) -> list[str]:
    """Each word is its own single subtoken."""
    return [word]


class ChunkSplitter:
    """Deterministic rule-based splitter.

    A word is first split where the character class changes (letters,
    digits, everything else), then every run longer than ``chunk_len``
    characters is cut into ``chunk_len``-sized pieces.
    """

    def __init__(self, chunk_len: int = 4):
        if chunk_len < 1:
            raise ValueError("chunk_len must be >= 1")
        self.chunk_len = chunk_len

    @staticmethod
    def _char_class(ch: str) -> int:
        if ch.isalpha():
            return 0
        if ch.isdigit():
            return 1
        return 2

    def __call__(self, word: str) -> list[str]:
        runs = []
        start = 0
        for i in range(1, len(word)):
            if self._char_class(word[i]) != self._char_class(word[i - 1]):
                runs.append(word[start:i])
                start = i
        runs.append(word[start:])
        pieces = []
        for run in runs:
            for j in range(0, len(run), self.chunk_len):
                pieces.append(run[j : j + self.chunk_len])
        return pieces

    def __repr__(self):
        return f"ChunkSplitter(chunk_len={self.chunk_len})"


def splitter_from_spec(spec: str):
    """Parse a splitter spec: "identity" or "rule:<k>"."""
    if spec == "identity":
        return identity_splitter
    if spec == "rule":
        return ChunkSplitter()
    if spec.startswith("rule:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad splitter spec {spec!r}") from None
        return ChunkSplitter(k)
    raise ValueError(f"unknown splitter spec {spec!r}")


def subtokenize(sentence: AnnotatedSentence, splitter, add_specials: bool = False) -> SubtokenizedSentence:
    """Split every word into subtokens and record the alignment.

    With ``add_specials`` a begin marker is prepended and an end marker
    appended; both carry ``word_index == NO_WORD``.
    """
    if len(sentence) == 0:
        raise ValueError(f"sentence {sentence.id!r} is empty")
    subtokens: list[str] = []
    word_index: list[int] = []
    spans: list[tuple[int, int]] = []
    offset = 0
    for w, word in enumerate(sentence.words):
        pieces = splitter(word)
        if not pieces or any(p == "" for p in pieces):
            raise ValueError(f"splitter produced an empty piece for word {word!r}")
        if w > 0:
            offset += 1  # single joining space in the reconstructed text
        for piece in pieces:
            subtokens.append(piece)
            word_index.append(w)
            spans.append((offset, offset + len(piece)))
            offset += len(piece)
    if add_specials:
        subtokens = [BEGIN_MARKER] + subtokens + [END_MARKER]
        word_index = [NO_WORD] + word_index + [NO_WORD]
        spans = [(0, 0)] + spans + [(offset, offset)]
    return SubtokenizedSentence(
        subtokens=tuple(subtokens),
        word_index=tuple(word_index),
        char_spans=tuple(spans),
        has_specials=add_specials,
    )


def project_tags_to_subtokens(sentence: AnnotatedSentence, sub: SubtokenizedSentence) -> list[str]:
    """Project word-level BIO tags onto subtokens.

    The first subtoken of a word keeps the word's tag; continuation
    subtokens of a B-T or I-T word get I-T, continuations of an O word
    get O.  Special positions get O (they are excluded from the loss via
    the word_index sentinel).
    """
    if sub.num_words != len(sentence):
        raise ValueError("subtokenization does not match the sentence")
    out: list[str] = []
    prev_word = None
    for w in sub.word_index:
        if w == NO_WORD:
            out.append("O")
            continue
        tag = sentence.tags[w]
        if w == prev_word and tag != "O":
            out.append("I-" + tag[2:])
        else:
            out.append(tag)
        prev_word = w
    return out


# ---------------------------------------------------------------------------
# CoNLL parsing and serialization
#
# Format: UTF-8, sentences separated by one or more blank lines, comment
# lines start with '#' (a comment token pair "id X" sets the sentence id),
# token lines are whitespace-separated columns with the token first and
# the BIO tag last.


def _check_tag(tag: str, label_set: LabelSet, line_no: int) -> None:
    if tag == "O":
        return
    if len(tag) > 2 and tag[1] == "-" and tag[0] in ("B", "I"):
        etype = tag[2:]
        if etype in label_set:
            return
        raise LabelingError(f"line {line_no}: unknown entity type in tag {tag!r}")
    raise LabelingError(f"line {line_no}: malformed BIO tag {tag!r}")


def _comment_id(comments: list[str]) -> str | None:
    for comment in comments:
        toks = comment.lstrip("#").split()
        for i, tok in enumerate(toks[:-1]):
            if tok == "id":
                return toks[i + 1]
    return None


def parse_conll(text: str, label_set: LabelSet) -> list[AnnotatedSentence]:
    """Parse CoNLL text into one AnnotatedSentence per block."""
    sentences: list[AnnotatedSentence] = []
    comments: list[str] = []
    words: list[str] = []
    tags: list[str] = []

    def flush():
        if not words and not comments:
            return
        if not words:
            # comment-only block: attach to nothing, drop it
            comments.clear()
            return
        sid = _comment_id(comments)
        if sid is None:
            sid = str(len(sentences))
        sentences.append(
            AnnotatedSentence(
                id=sid, words=tuple(words), tags=tuple(tags), comments=tuple(comments)
            )
        )
        comments.clear()
        words.clear()
        tags.clear()

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.lstrip().startswith("#"):
            comments.append(line)
            continue
        cols = line.split()
        if len(cols) < 2:
            raise ParseError(
                f"token line needs at least a token and a tag, got {len(cols)} column(s)",
                line=line_no,
            )
        word, tag = cols[0], cols[-1]
        _check_tag(tag, label_set, line_no)
        words.append(word)
        tags.append(tag)
    flush()
    return sentences


def infer_label_set(text: str) -> LabelSet:
    """Collect the entity types appearing in a CoNLL file's tag column."""
    types = set()
    for line in text.split("\n"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tag = line.split()[-1]
        if len(tag) > 2 and tag[1] == "-" and tag[0] in ("B", "I"):
            types.add(tag[2:])
    return LabelSet(types=tuple(sorted(types)))


def serialize_conll(sentences, predictions=None) -> str:
    """Render sentences back to CoNLL text; round-trips through parse_conll.

    ``predictions`` optionally supplies replacement word-level tag lists,
    one per sentence.  Comment lines are emitted verbatim.
    """
    if predictions is not None and len(predictions) != len(sentences):
        raise ValueError(
            f"{len(sentences)} sentences but {len(predictions)} prediction rows"
        )
    lines: list[str] = []
    for i, sentence in enumerate(sentences):
        tags = sentence.tags if predictions is None else list(predictions[i])
        if len(tags) != len(sentence.words):
            raise ValueError(
                f"sentence {sentence.id!r}: {len(sentence.words)} words but {len(tags)} tags"
            )
        lines.extend(sentence.comments)
        lines.extend(f"{w} {t}" for w, t in zip(sentence.words, tags))
        lines.append("")
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
