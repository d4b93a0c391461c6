import pytest
from hypothesis import given, strategies as st

from querytagger.preprocess import (
    EmptyQueryError,
    NormalizationConfig,
    normalize_query,
)


def test_basic_lowercase_split():
    assert normalize_query("LG washer mini") == ["lg", "washer", "mini"]


def test_whitespace_collapse_and_decimals():
    assert normalize_query("  GE   7.4 cu ft ") == ["ge", "7.4", "cu", "ft"]


def test_all_stripped_raises():
    with pytest.raises(EmptyQueryError):
        normalize_query("!!!")


def test_empty_string_raises():
    with pytest.raises(EmptyQueryError):
        normalize_query("   ")


def test_kept_punctuation():
    assert normalize_query("b&q pull-down 1/2' pipe") == ["b&q", "pull-down", "1/2'", "pipe"]


def test_dropped_punctuation():
    assert normalize_query("washer, dryer?") == ["washer", "dryer"]


def test_custom_keep_punct():
    cfg = NormalizationConfig(keep_punct=frozenset())
    assert normalize_query("7.4 b&q", cfg) == ["74", "bq"]


@given(st.text(max_size=60))
def test_idempotent(raw):
    try:
        tokens = normalize_query(raw)
    except EmptyQueryError:
        return
    assert normalize_query(" ".join(tokens)) == tokens


@given(st.text(max_size=60))
def test_tokens_clean_under_defaults(raw):
    try:
        tokens = normalize_query(raw)
    except EmptyQueryError:
        return
    for tok in tokens:
        assert tok
        assert tok == tok.lower()
        assert not any(ch.isspace() for ch in tok)
