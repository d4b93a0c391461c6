"""Raw query string to token list normalization.

Catalog entries and queries must go through the same normalization or
greedy matching breaks, so this is the single tokenizer for everything.
"""

from __future__ import annotations

from dataclasses import dataclass

# Kept so brand names like "b&q", fractions like "7.4", and tokens like
# "pull-down" survive; every other non-alphanumeric character is dropped.
DEFAULT_KEEP_PUNCT = frozenset(".-&'/")


class EmptyQueryError(ValueError):
    """Normalization removed every character of the query."""


@dataclass(frozen=True)
class NormalizationConfig:
    """Character-level cleanup applied before whitespace tokenization.

    Tokens are always whitespace-delimited and never empty, so runs of
    whitespace collapse regardless; the flag is kept as an explicit knob
    for config files.
    """

    lowercase: bool = True
    collapse_whitespace: bool = True
    keep_punct: frozenset[str] = DEFAULT_KEEP_PUNCT


DEFAULT_CONFIG = NormalizationConfig()


def normalize_query(raw: str, config: NormalizationConfig = DEFAULT_CONFIG) -> list[str]:
    """Lowercase, drop unwanted characters, and split into tokens.

    Idempotent: re-normalizing the joined output is a no-op. Raises
    EmptyQueryError when nothing survives.
    """
    text = raw.lower() if config.lowercase else raw
    kept: list[str] = []
    for ch in text:
        if ch.isspace():
            kept.append(" ")
        elif ch.isalnum() or ch in config.keep_punct:
            kept.append(ch)
    tokens = "".join(kept).split()
    if not tokens:
        raise EmptyQueryError(f"query normalized to nothing: {raw!r}")
    return tokens
