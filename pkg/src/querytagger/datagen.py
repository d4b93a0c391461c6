"""Dataset construction: greedy catalog labeling, synthetic queries,
stratified sampling, ambiguity balancing, and a seeded mini-world corpus
generator for desk-scale experiments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

from .core import (
    Catalog,
    Dataset,
    EntitySpan,
    EntityType,
    LabelTag,
    Source,
    TaggedQuery,
    begin_tag,
    bio_encode,
    inside_tag,
    pattern_of,
)


@dataclass(frozen=True)
class AmbiguousLexicon:
    """Strings that appear in the catalog as both a brand and a product type."""

    entries: frozenset[str]

    @classmethod
    def from_catalog(cls, catalog: Catalog) -> "AmbiguousLexicon":
        return cls(frozenset(catalog.brands & catalog.product_types))

    @classmethod
    def empty(cls) -> "AmbiguousLexicon":
        return cls(frozenset())


# ---------------------------------------------------------------------------
# Greedy catalog matching (the legacy tagger, reused as the weak labeler)
# ---------------------------------------------------------------------------

def _entry_index(entries: frozenset[str]) -> tuple[dict[int, set[tuple[str, ...]]], int]:
    by_len: dict[int, set[tuple[str, ...]]] = {}
    max_len = 0
    for entry in entries:
        toks = tuple(entry.split())
        by_len.setdefault(len(toks), set()).add(toks)
        max_len = max(max_len, len(toks))
    return by_len, max_len


def distant_label(
    tokens: Sequence[str], catalog: Catalog, source: Source = Source.NOISY
) -> TaggedQuery:
    """Sequential greedy exact match: brands first, then product types.

    Left to right, the longest catalog match at each position wins;
    tokens claimed earlier are never relabeled. Unmatched tokens stay O.
    """
    if not tokens:
        raise ValueError("tokens must be non-empty")
    tokens = tuple(tokens)
    n = len(tokens)
    labels: list[LabelTag | None] = [None] * n
    for etype, entries in (
        (EntityType.BRD, catalog.brands),
        (EntityType.PRD, catalog.product_types),
    ):
        by_len, max_len = _entry_index(entries)
        i = 0
        while i < n:
            if labels[i] is not None:
                i += 1
                continue
            matched = 0
            for m in range(min(max_len, n - i), 0, -1):
                if m not in by_len:
                    continue
                if any(labels[j] is not None for j in range(i, i + m)):
                    continue
                if tokens[i:i + m] in by_len[m]:
                    labels[i] = begin_tag(etype)
                    for j in range(i + 1, i + m):
                        labels[j] = inside_tag(etype)
                    matched = m
                    break
            i += matched if matched else 1
    final = tuple(lab if lab is not None else LabelTag.O for lab in labels)
    return TaggedQuery(tokens, final, source)


def generate_synthetic(catalog: Catalog) -> Dataset:
    """One single-entity query per catalog entry, covering it completely."""
    if not catalog.brands and not catalog.product_types:
        raise ValueError("catalog is empty")
    items: list[TaggedQuery] = []
    for etype, entries in (
        (EntityType.BRD, catalog.brands),
        (EntityType.PRD, catalog.product_types),
    ):
        for entry in sorted(entries):
            toks = tuple(entry.split())
            labels = (begin_tag(etype),) + (inside_tag(etype),) * (len(toks) - 1)
            items.append(TaggedQuery(toks, labels, Source.SYNTHETIC))
    return Dataset(tuple(items), role=Source.SYNTHETIC)


# ---------------------------------------------------------------------------
# Stratified sampling by entity sequence pattern
# ---------------------------------------------------------------------------

def stratified_indices(items: Sequence[TaggedQuery], n: int, seed: int) -> list[int]:
    """Indices of a pattern-stratified sample; quotas use largest-remainder
    rounding over exact integer proportions."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n >= len(items):
        return list(range(len(items)))
    if n == 0:
        return []
    groups: dict[str, list[int]] = {}
    for i, query in enumerate(items):
        groups.setdefault(str(pattern_of(query.labels)), []).append(i)
    total = len(items)
    keys = sorted(groups)
    quota = {k: (n * len(groups[k])) // total for k in keys}
    remainder = {k: n * len(groups[k]) - quota[k] * total for k in keys}
    leftover = n - sum(quota.values())
    for k in sorted(keys, key=lambda k: (-remainder[k], -len(groups[k]), k))[:leftover]:
        quota[k] += 1
    rng = random.Random(seed)
    chosen: list[int] = []
    for k in keys:
        if quota[k]:
            chosen.extend(rng.sample(groups[k], quota[k]))
    return sorted(chosen)


def stratified_sample(data: Dataset, n: int, seed: int) -> Dataset:
    """Sample n items keeping per-pattern proportions within one item."""
    idx = stratified_indices(data.items, n, seed)
    return Dataset(tuple(data.items[i] for i in idx), role=data.role)


# ---------------------------------------------------------------------------
# Ambiguity balancing
# ---------------------------------------------------------------------------

def _reading_indices(
    items: Sequence[TaggedQuery], entry: str
) -> dict[EntityType, list[int]]:
    out: dict[EntityType, list[int]] = {EntityType.BRD: [], EntityType.PRD: []}
    for i, query in enumerate(items):
        seen: set[EntityType] = set()
        for span in query.spans():
            if query.span_surface(span) == entry:
                seen.add(span.entity_type)
        for etype in seen:
            out[etype].append(i)
    return out


def balance_ambiguous(
    train: Dataset, lexicon: AmbiguousLexicon, seed: int = 0
) -> Dataset:
    """Oversample the minority reading of each ambiguous entry.

    For every entry read as both BRD and PRD somewhere in the data,
    uniformly chosen queries of the rarer reading are duplicated until
    the two query counts are equal. Entries with a single reading are
    left alone. Duplicates preferentially come from queries containing
    no other ambiguous entry so balancing one entry does not skew
    another.
    """
    items = list(train.items)
    rng = random.Random(seed)
    entries = sorted(lexicon.entries)
    for entry in entries:
        counts = _reading_indices(items, entry)
        brd, prd = counts[EntityType.BRD], counts[EntityType.PRD]
        if not brd or not prd or len(brd) == len(prd):
            continue
        minority = brd if len(brd) < len(prd) else prd
        deficit = abs(len(brd) - len(prd))
        others = set(entries) - {entry}

        def pure(i: int) -> bool:
            q = items[i]
            return not any(q.span_surface(s) in others for s in q.spans())

        pool = [i for i in minority if pure(i)] or list(minority)
        for _ in range(deficit):
            items.append(items[rng.choice(pool)])
    return Dataset(tuple(items), role=train.role)


# ---------------------------------------------------------------------------
# Mini-world corpus generator
# ---------------------------------------------------------------------------

# Anchor entities keep well-known fixtures (e.g. "lg washer mini")
# resolvable in any generated world. Generation order is frequency rank:
# anchors come first and thus dominate the skewed draws below.
SEED_BRANDS = (
    "lg", "ge", "behr", "milwaukee", "dewalt", "makita",
    "samsung", "ridgid", "cosco", "hampton bay",
)
SEED_PRODUCT_TYPES = (
    "washer", "dryer", "drill", "paint", "faucet",
    "table", "fridge", "ice maker", "chair", "light",
)
# Common filler words; the generator extends them with pseudo-word
# fillers so the O vocabulary is open and rare tokens stay genuinely
# ambiguous between "unseen entity" and "unseen filler".
COMMON_FILLERS = (
    "mini", "cheap", "discount", "gas", "bronze", "outdoor", "indoor",
    "small", "large", "heavy", "white", "black", "best", "cordless",
    "34", "in", "cu", "ft", "7.4", "pull",
)
N_PSEUDO_FILLERS = 60
# A guard word turns the catalog entry right after it into plain context.
GUARDS = ("no", "without", "for")
# An extension widens the true product span past the catalog entry.
EXTENSIONS = ("set", "kit", "combo")

# Per-slot probabilities of the two hard constructs; both mirror classic
# greedy-matcher failures (spurious entity after a guard, span stopping
# short of the extension word).
DISTRACTOR_RATE = 0.18
EXTENSION_RATE = 0.12
# Frequency skew of entity and filler draws: weight (rank+1)^-ZIPF_S.
ZIPF_S = 1.2

PATTERN_TEMPLATES: tuple[tuple[str, ...], ...] = (
    ("BRD", "O", "PRD"),
    ("BRD", "O", "PRD", "O"),
    ("BRD", "PRD", "O"),
    ("O", "PRD", "O"),
)

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class MiniWorldConfig:
    """Knobs for the generated desk-scale corpus.

    n_synthetic must equal n_brands + n_product_types since the synthetic
    set carries exactly one query per catalog entry.
    """

    n_brands: int = 50
    n_product_types: int = 50
    n_golden: int = 500
    n_noisy: int = 5000
    n_synthetic: int = 100
    noise_rate: float = 0.15
    ambiguity_rate: float = 0.1
    pattern_weights: tuple[float, ...] = (0.35, 0.25, 0.2, 0.2)
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_brands", "n_product_types", "n_golden", "n_noisy", "n_synthetic"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("noise_rate", "ambiguity_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if len(self.pattern_weights) != len(PATTERN_TEMPLATES):
            raise ValueError(f"need {len(PATTERN_TEMPLATES)} pattern weights")
        if any(w < 0 for w in self.pattern_weights) or sum(self.pattern_weights) <= 0:
            raise ValueError("pattern weights must be non-negative and not all zero")
        if self.n_synthetic != self.n_brands + self.n_product_types:
            raise ValueError(
                "n_synthetic must equal n_brands + n_product_types "
                f"({self.n_brands + self.n_product_types}), got {self.n_synthetic}"
            )


@dataclass(frozen=True)
class MiniWorld:
    catalog: Catalog
    golden: Dataset
    noisy: Dataset
    synthetic: Dataset


def _pseudo_word(rng: random.Random, used: set[str]) -> str:
    while True:
        word = "".join(
            rng.choice(_CONSONANTS) + rng.choice(_VOWELS)
            for _ in range(rng.randint(2, 3))
        )
        if rng.random() < 0.3:
            word += rng.choice(_CONSONANTS)
        if word not in used:
            used.add(word)
            return word


def _pseudo_entity(rng: random.Random, used: set[str]) -> str:
    if rng.random() < 0.25:
        return f"{_pseudo_word(rng, used)} {_pseudo_word(rng, used)}"
    return _pseudo_word(rng, used)


class _Pools:
    """Rank-ordered entity/filler lists with precomputed skewed weights."""

    def __init__(self, brands: list[str], pts: list[str], fillers: list[str]):
        self.brands = brands
        self.pts = pts
        self.fillers = fillers
        self.brand_cw = _zipf_cum_weights(len(brands))
        self.pt_cw = _zipf_cum_weights(len(pts))
        self.filler_cw = _zipf_cum_weights(len(fillers))


def _zipf_cum_weights(n: int) -> list[float]:
    return list(accumulate((i + 1) ** -ZIPF_S for i in range(n)))


def _pick(rng: random.Random, items: list[str], cum_weights: list[float]) -> str:
    return rng.choices(items, cum_weights=cum_weights, k=1)[0]


def _build_pools(cfg: MiniWorldConfig) -> _Pools:
    rng = random.Random(f"{cfg.seed}/catalog")
    used = set(COMMON_FILLERS) | set(GUARDS) | set(EXTENSIONS)
    for entry in SEED_BRANDS + SEED_PRODUCT_TYPES:
        used.update(entry.split())

    brands = list(SEED_BRANDS[:cfg.n_brands])
    while len(brands) < cfg.n_brands:
        brands.append(_pseudo_entity(rng, used))
    pts = list(SEED_PRODUCT_TYPES[:cfg.n_product_types])
    while len(pts) < cfg.n_product_types:
        pts.append(_pseudo_entity(rng, used))

    if cfg.ambiguity_rate > 0:
        k = round(cfg.ambiguity_rate * min(cfg.n_brands, cfg.n_product_types))
        if k < 1 or k >= min(cfg.n_brands, cfg.n_product_types):
            raise ValueError(
                f"ambiguity_rate {cfg.ambiguity_rate} infeasible for "
                f"{cfg.n_brands} brands / {cfg.n_product_types} product types"
            )
        # Share the tail entries so the seeded anchors stay unambiguous.
        pts[-k:] = brands[-k:]

    fillers = list(COMMON_FILLERS)
    for _ in range(N_PSEUDO_FILLERS):
        fillers.append(_pseudo_word(rng, used))
    return _Pools(brands, pts, fillers)


def _template_query(
    rng: random.Random, pools: _Pools, pattern: tuple[str, ...]
) -> tuple[tuple[str, ...], tuple[LabelTag, ...]]:
    tokens: list[str] = []
    spans: list[EntitySpan] = []
    for slot in pattern:
        if slot == "BRD":
            entry = _pick(rng, pools.brands, pools.brand_cw).split()
            spans.append(EntitySpan(EntityType.BRD, len(tokens), len(tokens) + len(entry)))
            tokens.extend(entry)
        elif slot == "PRD":
            entry = _pick(rng, pools.pts, pools.pt_cw).split()
            start = len(tokens)
            tokens.extend(entry)
            if rng.random() < EXTENSION_RATE:
                tokens.append(rng.choice(EXTENSIONS))
            spans.append(EntitySpan(EntityType.PRD, start, len(tokens)))
        else:
            if rng.random() < DISTRACTOR_RATE:
                tokens.append(rng.choice(GUARDS))
                tokens.extend(_pick(rng, pools.pts, pools.pt_cw).split())
            else:
                for _ in range(rng.randint(1, 2)):
                    tokens.append(_pick(rng, pools.fillers, pools.filler_cw))
    return tuple(tokens), bio_encode(spans, len(tokens))


def _corrupt(query: TaggedQuery, rng: random.Random) -> TaggedQuery:
    """Damage one span: shift a boundary, flip its type, or drop it."""
    spans = query.spans()
    if not spans:
        return query
    target = rng.randrange(len(spans))
    span = spans[target]
    length = len(query.tokens)
    prev_end = spans[target - 1].end if target else 0
    next_start = spans[target + 1].start if target + 1 < len(spans) else length
    moves = []
    if span.start > prev_end:
        moves.append((span.start - 1, span.end))
    if span.end < next_start:
        moves.append((span.start, span.end + 1))
    if span.end - span.start > 1:
        moves.append((span.start + 1, span.end))
        moves.append((span.start, span.end - 1))
    ops = ["drop", "flip"] + (["shift"] if moves else [])
    op = ops[rng.randrange(len(ops))]
    new_spans = list(spans)
    if op == "flip":
        other = EntityType.PRD if span.entity_type is EntityType.BRD else EntityType.BRD
        new_spans[target] = EntitySpan(other, span.start, span.end)
    elif op == "drop":
        del new_spans[target]
    else:
        start, end = moves[rng.randrange(len(moves))]
        new_spans[target] = EntitySpan(span.entity_type, start, end)
    return TaggedQuery(query.tokens, bio_encode(new_spans, length), query.source)


def generate_miniworld(cfg: MiniWorldConfig) -> MiniWorld:
    """Deterministic catalog plus golden/noisy/synthetic datasets.

    Golden labels are exact by construction. Noisy labels come from the
    greedy matcher and are then corrupted on a noise_rate fraction of
    queries. Entity and filler draws are frequency-skewed, so the golden
    slice alone leaves tail entities uncovered; the noisy and synthetic
    pools are what eventually supply them.
    """
    pools = _build_pools(cfg)
    catalog = Catalog(brands=frozenset(pools.brands), product_types=frozenset(pools.pts))
    weights = list(cfg.pattern_weights)

    def pick_pattern(rng: random.Random) -> tuple[str, ...]:
        return rng.choices(PATTERN_TEMPLATES, weights=weights, k=1)[0]

    golden_items = []
    for i in range(cfg.n_golden):
        rng = random.Random(f"{cfg.seed}/golden/{i}")
        tokens, labels = _template_query(rng, pools, pick_pattern(rng))
        golden_items.append(TaggedQuery(tokens, labels, Source.GOLDEN))

    noisy_items = []
    for i in range(cfg.n_noisy):
        rng = random.Random(f"{cfg.seed}/noisy/{i}")
        tokens, _ = _template_query(rng, pools, pick_pattern(rng))
        query = distant_label(tokens, catalog, source=Source.NOISY)
        if rng.random() < cfg.noise_rate:
            query = _corrupt(query, rng)
        noisy_items.append(query)

    return MiniWorld(
        catalog=catalog,
        golden=Dataset(tuple(golden_items), role=Source.GOLDEN),
        noisy=Dataset(tuple(noisy_items), role=Source.NOISY),
        synthetic=generate_synthetic(catalog),
    )
