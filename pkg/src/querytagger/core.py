"""Domain types and BIO-tag utilities shared by every other module.

Label indices follow the fixed order ``O, B-BRD, I-BRD, B-PRD, I-PRD``.
The Viterbi tie-break and the transition mask both depend on this order,
so it must never change.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence


class EntityType(str, Enum):
    """The two entity kinds a query can contain: brand and product type."""

    BRD = "BRD"
    PRD = "PRD"


class Source(str, Enum):
    """Provenance of a tagged query."""

    GOLDEN = "GOLDEN"
    NOISY = "NOISY"
    SYNTHETIC = "SYNTHETIC"
    PREDICTED = "PREDICTED"


class LabelTag(str, Enum):
    """Per-token BIO labels, declared in the fixed index order."""

    O = "O"
    B_BRD = "B-BRD"
    I_BRD = "I-BRD"
    B_PRD = "B-PRD"
    I_PRD = "I-PRD"

    @property
    def entity_type(self) -> EntityType | None:
        if self is LabelTag.O:
            return None
        return EntityType(self.value.split("-", 1)[1])

    @property
    def is_begin(self) -> bool:
        return self.value.startswith("B-")

    @property
    def is_inside(self) -> bool:
        return self.value.startswith("I-")


LABELS: tuple[LabelTag, ...] = tuple(LabelTag)
LABEL_INDEX: dict[LabelTag, int] = {lab: i for i, lab in enumerate(LABELS)}
NUM_LABELS = len(LABELS)


def begin_tag(entity_type: EntityType) -> LabelTag:
    return LabelTag(f"B-{entity_type.value}")


def inside_tag(entity_type: EntityType) -> LabelTag:
    return LabelTag(f"I-{entity_type.value}")


def label_ids(labels: Sequence[LabelTag | str]) -> list[int]:
    """Map label tags to their fixed indices."""
    return [LABEL_INDEX[LabelTag(lab)] for lab in labels]


class InvalidBioError(ValueError):
    """A label sequence violates the BIO scheme at a specific token."""

    def __init__(self, index: int, message: str):
        super().__init__(f"invalid BIO sequence at token {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class EntitySpan:
    """A token-index span [start, end) holding one entity."""

    entity_type: EntityType
    start: int
    end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "entity_type", EntityType(self.entity_type))
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad span bounds [{self.start}, {self.end})")


def validate_bio(labels: Sequence[LabelTag | str]) -> tuple[LabelTag, ...]:
    """Parse and validate a BIO label sequence, returning canonical tags.

    Every I-X must directly follow B-X or I-X of the same entity type.
    """
    out: list[LabelTag] = []
    prev: LabelTag | None = None
    for i, raw in enumerate(labels):
        try:
            lab = LabelTag(raw)
        except ValueError:
            raise InvalidBioError(i, f"unknown label {raw!r}") from None
        if lab.is_inside:
            if prev is None:
                raise InvalidBioError(i, f"{lab.value} at sequence start")
            if prev.entity_type != lab.entity_type:
                raise InvalidBioError(i, f"{lab.value} follows {prev.value}")
        out.append(lab)
        prev = lab
    return tuple(out)


def bio_repair(labels: Sequence[LabelTag | str]) -> tuple[LabelTag, ...]:
    """Lenient repair for externally produced label files.

    Orphan I-X tags (after start, O, or a different entity type) are
    promoted to B-X. Used only at dataset ingestion; everything internal
    is strict.
    """
    out: list[LabelTag] = []
    prev: LabelTag | None = None
    for raw in labels:
        lab = LabelTag(raw)
        if lab.is_inside and (prev is None or prev.entity_type != lab.entity_type):
            lab = begin_tag(lab.entity_type)  # type: ignore[arg-type]
        out.append(lab)
        prev = lab
    return tuple(out)


def bio_decode(labels: Sequence[LabelTag | str]) -> list[EntitySpan]:
    """Turn a valid BIO sequence into entity spans sorted by start."""
    labs = validate_bio(labels)
    spans: list[EntitySpan] = []
    start: int | None = None
    etype: EntityType | None = None

    def close(end: int) -> None:
        nonlocal start
        if start is not None:
            spans.append(EntitySpan(etype, start, end))  # type: ignore[arg-type]
            start = None

    for i, lab in enumerate(labs):
        if lab.is_begin:
            close(i)
            start, etype = i, lab.entity_type
        elif lab is LabelTag.O:
            close(i)
    close(len(labs))
    return spans


def bio_encode(spans: Iterable[EntitySpan], length: int) -> tuple[LabelTag, ...]:
    """Inverse of bio_decode: render spans as a BIO label sequence."""
    labels = [LabelTag.O] * length
    prev_end = 0
    for span in sorted(spans, key=lambda s: (s.start, s.end)):
        if span.end > length:
            raise ValueError(f"span [{span.start}, {span.end}) exceeds length {length}")
        if span.start < prev_end:
            raise ValueError(f"span [{span.start}, {span.end}) overlaps a previous span")
        labels[span.start] = begin_tag(span.entity_type)
        for i in range(span.start + 1, span.end):
            labels[i] = inside_tag(span.entity_type)
        prev_end = span.end
    return tuple(labels)


@dataclass(frozen=True)
class SeqPattern:
    """Collapsed entity sequence of a query, e.g. BRD+O+PRD."""

    elements: tuple[str, ...]

    def __str__(self) -> str:
        return "+".join(self.elements)


def pattern_of(labels: Sequence[LabelTag | str]) -> SeqPattern:
    """Per-token entity classes with adjacent duplicates collapsed."""
    labs = validate_bio(labels)
    out: list[str] = []
    for lab in labs:
        cls = "O" if lab is LabelTag.O else lab.entity_type.value  # type: ignore[union-attr]
        if not out or out[-1] != cls:
            out.append(cls)
    return SeqPattern(tuple(out))


@dataclass(frozen=True)
class TaggedQuery:
    """A tokenized query with one BIO label per token."""

    tokens: tuple[str, ...]
    labels: tuple[LabelTag, ...]
    source: Source

    def __post_init__(self) -> None:
        tokens = tuple(self.tokens)
        labels = validate_bio(self.labels)
        if not tokens:
            raise ValueError("query must have at least one token")
        if len(tokens) != len(labels):
            raise ValueError(
                f"{len(tokens)} tokens but {len(labels)} labels"
            )
        if any(not tok or tok.split() != [tok] for tok in tokens):
            raise ValueError("tokens must be non-empty and whitespace-free")
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "source", Source(self.source))

    def spans(self) -> list[EntitySpan]:
        return bio_decode(self.labels)

    def span_surface(self, span: EntitySpan) -> str:
        return " ".join(self.tokens[span.start:span.end])


def entity_surfaces(
    tokens: Sequence[str], labels: Sequence[LabelTag | str]
) -> tuple[list[str], list[str]]:
    """Surface strings of brand and product-type spans, in token order."""
    brands: list[str] = []
    products: list[str] = []
    for span in bio_decode(labels):
        surface = " ".join(tokens[span.start:span.end])
        if span.entity_type is EntityType.BRD:
            brands.append(surface)
        else:
            products.append(surface)
    return brands, products


@dataclass(frozen=True)
class Catalog:
    """Ground-truth sets of brand and product-type strings.

    Entries must already be normalized exactly like query tokens
    (lowercase, single spaces) or greedy matching cannot work.
    """

    brands: frozenset[str]
    product_types: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "brands", frozenset(self.brands))
        object.__setattr__(self, "product_types", frozenset(self.product_types))
        for kind, entries in (("brand", self.brands), ("product type", self.product_types)):
            for entry in entries:
                if not entry or entry != " ".join(entry.lower().split()):
                    raise ValueError(f"{kind} entry not normalized: {entry!r}")


@dataclass(frozen=True)
class Dataset:
    """An immutable list of tagged queries, optionally with a uniform role.

    role=None marks mixed working sets (e.g. a training pool that blends
    golden, noisy, and synthetic items); files on disk always carry a role.
    """

    items: tuple[TaggedQuery, ...]
    role: Source | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if self.role is not None:
            role = Source(self.role)
            if role is Source.PREDICTED:
                raise ValueError("PREDICTED is not a dataset role")
            bad = next((q for q in self.items if q.source is not role), None)
            if bad is not None:
                raise ValueError(
                    f"dataset role {role.value} but item has source {bad.source.value}"
                )
            object.__setattr__(self, "role", role)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[TaggedQuery]:
        return iter(self.items)


@dataclass(frozen=True)
class GoldenSplit:
    """Train/dev/test partition of the golden data."""

    train: Dataset
    dev: Dataset
    test: Dataset


def split_golden(golden: Dataset, seed: int) -> GoldenSplit:
    """Hold out 15% as test, then split the rest 90/10 into train/dev.

    Rounding is by floor with remainders going to train. Deterministic
    for a given seed; duplicates are split as-is, never deduplicated.
    """
    if golden.role is not Source.GOLDEN:
        raise ValueError("split_golden expects a GOLDEN dataset")
    n = len(golden.items)
    if n < 20:
        raise ValueError(f"need at least 20 golden queries to split, got {n}")
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    n_test = (n * 15) // 100
    n_dev = (n - n_test) // 10

    def take(ids: Sequence[int]) -> Dataset:
        return Dataset(tuple(golden.items[i] for i in sorted(ids)), role=Source.GOLDEN)

    return GoldenSplit(
        train=take(idx[n_test + n_dev:]),
        dev=take(idx[n_test:n_test + n_dev]),
        test=take(idx[:n_test]),
    )
