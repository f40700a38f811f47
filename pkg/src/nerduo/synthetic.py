"""Bundled synthetic corpus generator.

Builds small corpora whose token strings make both model kinds linearly
separable over hashed embeddings: every entity token encodes its type
and its role (solo, begin, middle, end) in the string itself, filler
tokens only ever carry O, and each sentence holds exactly one entity, so
no spurious begin/end token pair co-occurs.
"""

from __future__ import annotations

import random

from .corpus import AnnotatedSentence, LabelSet, serialize_conll

ENTITY_TYPES = ("Corp", "Loc", "Per", "Prod", "Event")
FILLERS = ("the", "a", "on", "at", "of", "and", "it", "was", "to", "in")


def label_set() -> LabelSet:
    return LabelSet(types=ENTITY_TYPES)


def _entity(etype: str, length: int, variant: int) -> tuple[list[str], list[str]]:
    stem = etype.lower()
    if length == 1:
        return [f"{stem}solo{variant}"], [f"B-{etype}"]
    words = [f"{stem}beg{variant}"]
    words += [f"{stem}mid{variant}"] * (length - 2)
    words.append(f"{stem}end{variant}")
    tags = [f"B-{etype}"] + [f"I-{etype}"] * (length - 1)
    return words, tags


def build_sentences(count: int = 50, seed: int = 13) -> list[AnnotatedSentence]:
    """Deterministic corpus with one entity per sentence, types cycling."""
    rng = random.Random(seed)
    sentences = []
    for i in range(count):
        etype = ENTITY_TYPES[i % len(ENTITY_TYPES)]
        length = i % 3 + 1
        variant = i // len(ENTITY_TYPES) % 2
        entity_words, entity_tags = _entity(etype, length, variant)
        lead = [rng.choice(FILLERS) for _ in range(rng.randint(2, 4))]
        tail = [rng.choice(FILLERS) for _ in range(rng.randint(1, 3))]
        words = lead + entity_words + tail
        tags = ["O"] * len(lead) + entity_tags + ["O"] * len(tail)
        sentences.append(
            AnnotatedSentence(
                id=f"synth-{i}",
                words=tuple(words),
                tags=tuple(tags),
                comments=(f"# id synth-{i}",),
            )
        )
    return sentences


def write_corpus(path, count: int = 50, seed: int = 13) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_conll(build_sentences(count=count, seed=seed)))


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="python -m nerduo.synthetic",
        description="Write the bundled synthetic corpus to a CoNLL file.",
    )
    parser.add_argument("output", help="output .conll path")
    parser.add_argument("--sentences", type=int, default=50)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args(argv)
    write_corpus(args.output, count=args.sentences, seed=args.seed)
    print(f"wrote {args.sentences} sentences to {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
