"""BIO tag space construction and tag/span conversion."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .corpus import LabelSet
from .errors import LabelingError


@dataclass(frozen=True)
class TagSpace:
    """All BIO tags in a fixed order: O first, then B-T, I-T per type.

    The ordering is fixed so logit column indices stay stable across runs.
    """

    tags: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tags)})

    def __len__(self):
        return len(self.tags)


@dataclass(frozen=True)
class EntitySpan:
    """A typed token span with inclusive begin and end indices."""

    begin: int
    end: int
    etype: str

    def __post_init__(self):
        if self.begin < 0 or self.end < self.begin:
            raise ValueError(f"invalid span ({self.begin}, {self.end})")

    def overlaps(self, other: "EntitySpan") -> bool:
        return self.begin <= other.end and other.begin <= self.end

    def contains(self, other: "EntitySpan") -> bool:
        return self.begin <= other.begin and other.end <= self.end


class RepairPolicy(enum.Enum):
    """How to treat malformed predicted tag sequences when decoding."""

    STRICT = "strict"
    ORPHAN_I_STARTS_ENTITY = "orphan"


def build_tagspace(label_set: LabelSet) -> TagSpace:
    """Tag space of size 2 * |types| + 1."""
    if len(label_set) == 0:
        raise LabelingError("cannot build a tag space from an empty label set")
    tags = ["O"]
    for name in label_set.types:
        tags.append(f"B-{name}")
        tags.append(f"I-{name}")
    return TagSpace(tags=tuple(tags))


def split_tag(tag: str) -> tuple[str, str | None]:
    """Break a tag into its kind ("O", "B", "I") and entity type."""
    if tag == "O":
        return "O", None
    if len(tag) > 2 and tag[1] == "-" and tag[0] in ("B", "I"):
        return tag[0], tag[2:]
    raise LabelingError(f"malformed BIO tag {tag!r}")


def spans_to_bio(spans, n: int) -> list[str]:
    """Encode non-overlapping spans as a BIO tag row of length n."""
    tags = ["O"] * n
    ordered = sorted(spans, key=lambda s: (s.begin, s.end))
    prev_end = -1
    for span in ordered:
        if span.begin <= prev_end:
            raise ValueError(f"overlapping spans at {span.begin}")
        if span.end >= n:
            raise ValueError(f"span ({span.begin}, {span.end}) exceeds length {n}")
        tags[span.begin] = f"B-{span.etype}"
        for i in range(span.begin + 1, span.end + 1):
            tags[i] = f"I-{span.etype}"
        prev_end = span.end
    return tags


def bio_to_spans(tags, repair: RepairPolicy = RepairPolicy.ORPHAN_I_STARTS_ENTITY) -> list[EntitySpan]:
    """Decode a BIO tag row into typed spans.

    Maximal B-T (I-T)* runs become spans.  An I-T without a preceding
    B-T/I-T of the same type either starts a new span (ORPHAN_I_STARTS_ENTITY)
    or raises (STRICT).
    """
    spans: list[EntitySpan] = []
    open_type: str | None = None
    open_begin = -1

    def close(upto: int):
        nonlocal open_type
        if open_type is not None:
            spans.append(EntitySpan(open_begin, upto, open_type))
            open_type = None

    for i, tag in enumerate(tags):
        kind, etype = split_tag(tag)
        if kind == "O":
            close(i - 1)
        elif kind == "B":
            close(i - 1)
            open_type, open_begin = etype, i
        else:  # I
            if open_type == etype:
                continue
            if repair is RepairPolicy.STRICT:
                raise LabelingError(f"orphan tag {tag!r} at position {i}", position=i)
            close(i - 1)
            open_type, open_begin = etype, i
    close(len(tags) - 1)
    return spans


@dataclass(frozen=True)
class BioViolation:
    position: int
    kind: str  # "orphan-i" or "type-switch"
    tag: str


def validate_bio(tags) -> list[BioViolation]:
    """Report every orphan I tag and every type switch inside an I run."""
    violations: list[BioViolation] = []
    prev_type: str | None = None
    for i, tag in enumerate(tags):
        kind, etype = split_tag(tag)
        if kind == "I" and etype != prev_type:
            if prev_type is None:
                violations.append(BioViolation(i, "orphan-i", tag))
            else:
                violations.append(BioViolation(i, "type-switch", tag))
        prev_type = etype if kind in ("B", "I") else None
    return violations
