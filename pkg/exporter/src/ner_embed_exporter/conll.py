"""Minimal CoNLL reader for the exporter.

Format contract: UTF-8, sentences separated by blank lines, comment
lines start with '#' (an "id X" token pair in a comment names the
sentence), token lines have the token in column 1; remaining columns are
ignored here.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Sentence:
    id: str
    words: tuple[str, ...]


def _comment_id(comments):
    for comment in comments:
        toks = comment.lstrip("#").split()
        for i, tok in enumerate(toks[:-1]):
            if tok == "id":
                return toks[i + 1]
    return None


def read_sentences(text: str) -> list[Sentence]:
    sentences: list[Sentence] = []
    comments: list[str] = []
    words: list[str] = []

    def flush():
        if words:
            sid = _comment_id(comments)
            if sid is None:
                sid = str(len(sentences))
            sentences.append(Sentence(id=sid, words=tuple(words)))
        comments.clear()
        words.clear()

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
            raise ValueError(f"line {line_no}: token line needs at least token and tag columns")
        words.append(cols[0])
    flush()
    return sentences
