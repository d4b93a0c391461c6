"""Neural encoder: char BiLSTM -> word BiGRU -> per-token label scores.

Plain numpy with hand-written reverse-mode gradients, float64 end to end
so finite-difference checks can run at tight tolerances.

Cell equations (canonical forms, gate blocks stacked row-wise):

LSTM (gate order i, f, g, o):
    [i f g o]pre = W x + U h_prev + b
    i, f, o = sigmoid(...);  g = tanh(g_pre)
    c = f * c_prev + i * g;  h = o * tanh(c)

GRU (gate order r, z, n; z carries the previous state):
    r = sigmoid(W_r x + U_r h_prev + b_r)
    z = sigmoid(W_z x + U_z h_prev + b_z)
    n = tanh(W_n x + U_n (r * h_prev) + b_n)
    h = z * h_prev + (1 - z) * n

Each word's representation is the concatenation of the final forward and
final backward LSTM states over its characters. The BiGRU input is the
word embedding concatenated with that representation; when character
features are disabled the char slice is zero-filled so the BiGRU keeps
the same width and the parameter count drops by exactly the char table
plus the two LSTM cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .core import NUM_LABELS, TaggedQuery, label_ids
from .crf import TransitionMatrix, build_bio_mask, crf_nll_grad

UNK = "<unk>"


class Vocab:
    """Frozen token and character id maps; id 0 is always UNK."""

    __slots__ = ("words", "chars", "_word_ids", "_char_ids")

    def __init__(self, words: Sequence[str], chars: Sequence[str]):
        words = tuple(words)
        chars = tuple(chars)
        if not words or words[0] != UNK:
            raise ValueError(f"word list must start with {UNK!r}")
        if not chars or chars[0] != UNK:
            raise ValueError(f"char list must start with {UNK!r}")
        if len(set(words)) != len(words) or len(set(chars)) != len(chars):
            raise ValueError("duplicate vocabulary entries")
        self.words = words
        self.chars = chars
        self._word_ids = {w: i for i, w in enumerate(words)}
        self._char_ids = {c: i for i, c in enumerate(chars)}

    @classmethod
    def build(cls, queries: Iterable[TaggedQuery]) -> "Vocab":
        word_set: set[str] = set()
        char_set: set[str] = set()
        for query in queries:
            for tok in query.tokens:
                word_set.add(tok)
                char_set.update(tok)
        word_set.discard(UNK)
        char_set.discard(UNK)
        return cls((UNK, *sorted(word_set)), (UNK, *sorted(char_set)))

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def n_chars(self) -> int:
        return len(self.chars)

    def word_id(self, token: str) -> int:
        return self._word_ids.get(token, 0)

    def char_id_list(self, token: str) -> list[int]:
        return [self._char_ids.get(c, 0) for c in token]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Vocab)
            and self.words == other.words
            and self.chars == other.chars
        )

    def __repr__(self) -> str:
        return f"Vocab({self.n_words} words, {self.n_chars} chars)"


@dataclass(frozen=True)
class ModelDims:
    """Layer widths; hidden sizes are per direction."""

    word_emb: int = 100
    char_emb: int = 25
    char_hidden: int = 25
    word_hidden: int = 100
    labels: int = NUM_LABELS

    def __post_init__(self) -> None:
        for name in ("word_emb", "char_emb", "char_hidden", "word_hidden", "labels"):
            if getattr(self, name) < 1:
                raise ValueError(f"dims.{name} must be positive")
        if self.labels != NUM_LABELS:
            raise ValueError(f"labels must be {NUM_LABELS}")

    @property
    def gru_input(self) -> int:
        return self.word_emb + 2 * self.char_hidden


@dataclass
class LstmCell:
    w_in: np.ndarray   # (4H, D)
    w_rec: np.ndarray  # (4H, H)
    bias: np.ndarray   # (4H,)


@dataclass
class GruCell:
    w_in: np.ndarray   # (3H, D)
    w_rec: np.ndarray  # (3H, H)
    bias: np.ndarray   # (3H,)


@dataclass
class ModelParams:
    """All trainable state plus the vocab and flags needed to run it."""

    dims: ModelDims
    vocab: Vocab
    use_char_embedding: bool
    use_crf: bool
    word_table: np.ndarray
    char_table: np.ndarray | None
    char_fwd: LstmCell | None
    char_bwd: LstmCell | None
    gru_fwd: GruCell
    gru_bwd: GruCell
    proj_w: np.ndarray
    proj_b: np.ndarray
    trans: TransitionMatrix

    def copy(self) -> "ModelParams":
        def cell(c):
            if c is None:
                return None
            kind = LstmCell if isinstance(c, LstmCell) else GruCell
            return kind(c.w_in.copy(), c.w_rec.copy(), c.bias.copy())

        return ModelParams(
            dims=self.dims,
            vocab=self.vocab,
            use_char_embedding=self.use_char_embedding,
            use_crf=self.use_crf,
            word_table=self.word_table.copy(),
            char_table=None if self.char_table is None else self.char_table.copy(),
            char_fwd=cell(self.char_fwd),
            char_bwd=cell(self.char_bwd),
            gru_fwd=cell(self.gru_fwd),
            gru_bwd=cell(self.gru_bwd),
            proj_w=self.proj_w.copy(),
            proj_b=self.proj_b.copy(),
            trans=TransitionMatrix(
                start=self.trans.start.copy(),
                trans=self.trans.trans.copy(),
                end=self.trans.end.copy(),
                mask=self.trans.mask,
            ),
        )


# Gradients are carried as a plain dict keyed by the block names below,
# one array per block with the same shape as the parameter.
GradDict = dict[str, np.ndarray]


def named_arrays(params: ModelParams) -> list[tuple[str, np.ndarray]]:
    """All trainable arrays in a fixed, documented order."""
    out: list[tuple[str, np.ndarray]] = [("word_table", params.word_table)]
    if params.use_char_embedding:
        assert params.char_table is not None
        out.append(("char_table", params.char_table))
        for name, cell in (("char_fwd", params.char_fwd), ("char_bwd", params.char_bwd)):
            out += [
                (f"{name}.w_in", cell.w_in),
                (f"{name}.w_rec", cell.w_rec),
                (f"{name}.bias", cell.bias),
            ]
    for name, cell in (("gru_fwd", params.gru_fwd), ("gru_bwd", params.gru_bwd)):
        out += [
            (f"{name}.w_in", cell.w_in),
            (f"{name}.w_rec", cell.w_rec),
            (f"{name}.bias", cell.bias),
        ]
    out += [
        ("proj_w", params.proj_w),
        ("proj_b", params.proj_b),
        ("trans.start", params.trans.start),
        ("trans.trans", params.trans.trans),
        ("trans.end", params.trans.end),
    ]
    return out


def zero_grads(params: ModelParams) -> GradDict:
    return {name: np.zeros_like(arr) for name, arr in named_arrays(params)}


def param_count(params: ModelParams) -> int:
    return sum(arr.size for _, arr in named_arrays(params))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

class _LstmCache:
    __slots__ = ("xs", "hp", "cp", "gi", "gf", "gg", "go", "tc")

    def __init__(self, steps: int, dim_in: int, hidden: int):
        self.xs = np.empty((steps, dim_in))
        self.hp = np.empty((steps, hidden))
        self.cp = np.empty((steps, hidden))
        self.gi = np.empty((steps, hidden))
        self.gf = np.empty((steps, hidden))
        self.gg = np.empty((steps, hidden))
        self.go = np.empty((steps, hidden))
        self.tc = np.empty((steps, hidden))


def _lstm_run(cell: LstmCell, xs: np.ndarray) -> tuple[np.ndarray, _LstmCache]:
    steps = xs.shape[0]
    hidden = cell.w_rec.shape[1]
    cache = _LstmCache(steps, xs.shape[1], hidden)
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    hs = np.empty((steps, hidden))
    for t in range(steps):
        x = xs[t]
        pre = cell.w_in @ x + cell.w_rec @ h + cell.bias
        gi = _sigmoid(pre[:hidden])
        gf = _sigmoid(pre[hidden:2 * hidden])
        gg = np.tanh(pre[2 * hidden:3 * hidden])
        go = _sigmoid(pre[3 * hidden:])
        cache.xs[t] = x
        cache.hp[t] = h
        cache.cp[t] = c
        c = gf * c + gi * gg
        tc = np.tanh(c)
        h = go * tc
        cache.gi[t], cache.gf[t], cache.gg[t], cache.go[t], cache.tc[t] = gi, gf, gg, go, tc
        hs[t] = h
    return hs, cache


def _lstm_backward(
    cell: LstmCell, cache: _LstmCache, d_hs: np.ndarray,
    d_w_in: np.ndarray, d_w_rec: np.ndarray, d_bias: np.ndarray,
) -> np.ndarray:
    steps, hidden = cache.gi.shape
    d_xs = np.empty_like(cache.xs)
    dh = np.zeros(hidden)
    dc = np.zeros(hidden)
    for t in range(steps - 1, -1, -1):
        dh = dh + d_hs[t]
        gi, gf, gg, go, tc = cache.gi[t], cache.gf[t], cache.gg[t], cache.go[t], cache.tc[t]
        do = dh * tc
        dc = dc + dh * go * (1.0 - tc * tc)
        dpre = np.concatenate([
            dc * gg * gi * (1.0 - gi),
            dc * cache.cp[t] * gf * (1.0 - gf),
            dc * gi * (1.0 - gg * gg),
            do * go * (1.0 - go),
        ])
        d_w_in += np.outer(dpre, cache.xs[t])
        d_w_rec += np.outer(dpre, cache.hp[t])
        d_bias += dpre
        d_xs[t] = cell.w_in.T @ dpre
        dh = cell.w_rec.T @ dpre
        dc = dc * gf
    return d_xs


# ---------------------------------------------------------------------------
# GRU
# ---------------------------------------------------------------------------

class _GruCache:
    __slots__ = ("xs", "hp", "r", "z", "n")

    def __init__(self, steps: int, dim_in: int, hidden: int):
        self.xs = np.empty((steps, dim_in))
        self.hp = np.empty((steps, hidden))
        self.r = np.empty((steps, hidden))
        self.z = np.empty((steps, hidden))
        self.n = np.empty((steps, hidden))


def _gru_run(cell: GruCell, xs: np.ndarray) -> tuple[np.ndarray, _GruCache]:
    steps = xs.shape[0]
    hidden = cell.w_rec.shape[1]
    cache = _GruCache(steps, xs.shape[1], hidden)
    h = np.zeros(hidden)
    hs = np.empty((steps, hidden))
    for t in range(steps):
        x = xs[t]
        a = cell.w_in @ x + cell.bias
        rec = cell.w_rec[:2 * hidden] @ h
        r = _sigmoid(a[:hidden] + rec[:hidden])
        z = _sigmoid(a[hidden:2 * hidden] + rec[hidden:])
        n = np.tanh(a[2 * hidden:] + cell.w_rec[2 * hidden:] @ (r * h))
        cache.xs[t] = x
        cache.hp[t] = h
        cache.r[t], cache.z[t], cache.n[t] = r, z, n
        h = z * h + (1.0 - z) * n
        hs[t] = h
    return hs, cache


def _gru_backward(
    cell: GruCell, cache: _GruCache, d_hs: np.ndarray,
    d_w_in: np.ndarray, d_w_rec: np.ndarray, d_bias: np.ndarray,
) -> np.ndarray:
    steps, hidden = cache.r.shape
    d_xs = np.empty_like(cache.xs)
    dh = np.zeros(hidden)
    for t in range(steps - 1, -1, -1):
        dh = dh + d_hs[t]
        r, z, n, hp = cache.r[t], cache.z[t], cache.n[t], cache.hp[t]
        dz_gate = dh * (hp - n)
        dn_pre = dh * (1.0 - z) * (1.0 - n * n)
        dh_prev = dh * z
        drh = cell.w_rec[2 * hidden:].T @ dn_pre
        dh_prev += drh * r
        dr_pre = drh * hp * r * (1.0 - r)
        dz_pre = dz_gate * z * (1.0 - z)
        drz = np.concatenate([dr_pre, dz_pre])
        dpre = np.concatenate([drz, dn_pre])
        d_w_in += np.outer(dpre, cache.xs[t])
        d_bias += dpre
        d_w_rec[:2 * hidden] += np.outer(drz, hp)
        d_w_rec[2 * hidden:] += np.outer(dn_pre, r * hp)
        d_xs[t] = cell.w_in.T @ dpre
        dh = dh_prev + cell.w_rec[:2 * hidden].T @ drz
    return d_xs


# ---------------------------------------------------------------------------
# Character-level word representation
# ---------------------------------------------------------------------------

class _CharCache:
    __slots__ = ("ids", "fwd", "bwd")

    def __init__(self, ids: list[int], fwd: _LstmCache, bwd: _LstmCache):
        self.ids = ids
        self.fwd = fwd
        self.bwd = bwd


def _char_repr_cached(word: str, params: ModelParams) -> tuple[np.ndarray, _CharCache]:
    ids = params.vocab.char_id_list(word)
    xs = params.char_table[ids]
    hs_f, cache_f = _lstm_run(params.char_fwd, xs)
    hs_b, cache_b = _lstm_run(params.char_bwd, xs[::-1])
    vec = np.concatenate([hs_f[-1], hs_b[-1]])
    return vec, _CharCache(ids, cache_f, cache_b)


def char_word_repr(word: str, params: ModelParams) -> np.ndarray:
    """Final forward and backward LSTM states over the word's characters."""
    if not word:
        raise ValueError("word must be non-empty")
    if not params.use_char_embedding:
        raise ValueError("character features are disabled for this model")
    vec, _ = _char_repr_cached(word, params)
    return vec


def _char_backward(
    word: str, cache: _CharCache, d_vec: np.ndarray, params: ModelParams, grads: GradDict
) -> None:
    hidden = params.dims.char_hidden
    steps = len(cache.ids)
    d_hs = np.zeros((steps, hidden))
    d_hs[-1] = d_vec[:hidden]
    d_xs = _lstm_backward(
        params.char_fwd, cache.fwd, d_hs,
        grads["char_fwd.w_in"], grads["char_fwd.w_rec"], grads["char_fwd.bias"],
    )
    d_hs = np.zeros((steps, hidden))
    d_hs[-1] = d_vec[hidden:]
    d_xs_rev = _lstm_backward(
        params.char_bwd, cache.bwd, d_hs,
        grads["char_bwd.w_in"], grads["char_bwd.w_rec"], grads["char_bwd.bias"],
    )
    d_xs = d_xs + d_xs_rev[::-1]
    np.add.at(grads["char_table"], cache.ids, d_xs)


# ---------------------------------------------------------------------------
# Query encoding
# ---------------------------------------------------------------------------

class _EncodeCache:
    __slots__ = ("tokens", "word_ids", "drop_mask", "gru_f", "gru_b", "h")

    def __init__(self, tokens, word_ids, drop_mask, gru_f, gru_b, h):
        self.tokens = tokens
        self.word_ids = word_ids
        self.drop_mask = drop_mask
        self.gru_f = gru_f
        self.gru_b = gru_b
        self.h = h


def _encode_cached(
    tokens: Sequence[str],
    params: ModelParams,
    char_memo: dict[str, tuple[np.ndarray, _CharCache]] | None = None,
    drop_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, _EncodeCache]:
    dims = params.dims
    length = len(tokens)
    word_ids = [params.vocab.word_id(t) for t in tokens]
    xs = np.zeros((length, dims.gru_input))
    xs[:, :dims.word_emb] = params.word_table[word_ids]
    if params.use_char_embedding:
        for i, tok in enumerate(tokens):
            if char_memo is not None:
                hit = char_memo.get(tok)
                if hit is None:
                    hit = _char_repr_cached(tok, params)
                    char_memo[tok] = hit
                xs[i, dims.word_emb:] = hit[0]
            else:
                xs[i, dims.word_emb:] = _char_repr_cached(tok, params)[0]
    if drop_mask is not None:
        xs *= drop_mask[:, None]
    hs_f, gru_f = _gru_run(params.gru_fwd, xs)
    hs_b_rev, gru_b = _gru_run(params.gru_bwd, xs[::-1])
    h = np.concatenate([hs_f, hs_b_rev[::-1]], axis=1)
    emissions = h @ params.proj_w.T + params.proj_b
    return emissions, _EncodeCache(tuple(tokens), word_ids, drop_mask, gru_f, gru_b, h)


def encode_query(tokens: Sequence[str], params: ModelParams) -> np.ndarray:
    """Per-token label scores, shape (len(tokens), 5)."""
    if not tokens:
        raise ValueError("tokens must be non-empty")
    emissions, _ = _encode_cached(tokens, params)
    return emissions


def _encode_backward(
    d_emissions: np.ndarray,
    cache: _EncodeCache,
    params: ModelParams,
    grads: GradDict,
    char_dvec: dict[str, np.ndarray] | None,
) -> None:
    dims = params.dims
    grads["proj_w"] += d_emissions.T @ cache.h
    grads["proj_b"] += d_emissions.sum(axis=0)
    dh = d_emissions @ params.proj_w
    d_xs = _gru_backward(
        params.gru_fwd, cache.gru_f, dh[:, :dims.word_hidden],
        grads["gru_fwd.w_in"], grads["gru_fwd.w_rec"], grads["gru_fwd.bias"],
    )
    d_xs_rev = _gru_backward(
        params.gru_bwd, cache.gru_b, dh[::-1, dims.word_hidden:],
        grads["gru_bwd.w_in"], grads["gru_bwd.w_rec"], grads["gru_bwd.bias"],
    )
    d_xs = d_xs + d_xs_rev[::-1]
    if cache.drop_mask is not None:
        d_xs *= cache.drop_mask[:, None]
    np.add.at(grads["word_table"], cache.word_ids, d_xs[:, :dims.word_emb])
    if params.use_char_embedding and char_dvec is not None:
        for i, tok in enumerate(cache.tokens):
            d_char = d_xs[i, dims.word_emb:]
            seen = char_dvec.get(tok)
            if seen is None:
                char_dvec[tok] = d_char.copy()
            else:
                seen += d_char


# ---------------------------------------------------------------------------
# Loss, gradients, optimizer, init
# ---------------------------------------------------------------------------

def model_loss_grads(
    batch: Sequence[TaggedQuery],
    params: ModelParams,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[float, GradDict]:
    """Mean batch loss and gradients for every trainable array.

    CRF mode: mean per-query negative log-likelihood. Otherwise: mean
    per-token cross-entropy over softmax emissions.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    if dropout and rng is None:
        raise ValueError("dropout needs an rng")
    grads = zero_grads(params)
    char_memo: dict[str, tuple[np.ndarray, _CharCache]] = {}
    char_dvec: dict[str, np.ndarray] = {}
    total_loss = 0.0
    total_tokens = 0
    for query in batch:
        mask = None
        if dropout:
            keep = rng.random(len(query.tokens)) >= dropout
            mask = keep.astype(float) / (1.0 - dropout)
        emissions, cache = _encode_cached(query.tokens, params, char_memo, mask)
        if params.use_crf:
            loss, d_e, tgrads = crf_nll_grad(emissions, params.trans, query.labels)
            grads["trans.start"] += tgrads.start
            grads["trans.trans"] += tgrads.trans
            grads["trans.end"] += tgrads.end
        else:
            probs = _softmax_rows(emissions)
            ids = label_ids(query.labels)
            rows = np.arange(len(ids))
            loss = float(-np.log(probs[rows, ids]).sum())
            d_e = probs
            d_e[rows, ids] -= 1.0
        total_loss += loss
        total_tokens += len(query.tokens)
        _encode_backward(d_e, cache, params, grads, char_dvec)
    if params.use_char_embedding:
        for word, d_vec in char_dvec.items():
            _char_backward(word, char_memo[word][1], d_vec, params, grads)
    denom = float(len(batch) if params.use_crf else total_tokens)
    for arr in grads.values():
        arr /= denom
    return total_loss / denom, grads


def sgd_step(
    params: ModelParams, grads: GradDict, lr: float, clip: float
) -> ModelParams:
    """Global-norm clipping followed by a plain gradient step.

    Returns a fresh ModelParams; the input is never mutated, so any held
    reference doubles as a snapshot.
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    if clip <= 0:
        raise ValueError("clip must be positive")
    sq = 0.0
    for name, _ in named_arrays(params):
        g = grads[name]
        if not np.isfinite(g).all():
            raise ValueError(f"non-finite gradient in block {name!r}")
        sq += float((g * g).sum())
    norm = math.sqrt(sq)
    step = lr * (clip / norm) if norm > clip else lr

    def upd(name: str, arr: np.ndarray) -> np.ndarray:
        return arr - step * grads[name]

    def cell(kind, prefix: str, c):
        return kind(
            upd(f"{prefix}.w_in", c.w_in),
            upd(f"{prefix}.w_rec", c.w_rec),
            upd(f"{prefix}.bias", c.bias),
        )

    return replace(
        params,
        word_table=upd("word_table", params.word_table),
        char_table=(
            upd("char_table", params.char_table) if params.use_char_embedding else None
        ),
        char_fwd=cell(LstmCell, "char_fwd", params.char_fwd) if params.use_char_embedding else None,
        char_bwd=cell(LstmCell, "char_bwd", params.char_bwd) if params.use_char_embedding else None,
        gru_fwd=cell(GruCell, "gru_fwd", params.gru_fwd),
        gru_bwd=cell(GruCell, "gru_bwd", params.gru_bwd),
        proj_w=upd("proj_w", params.proj_w),
        proj_b=upd("proj_b", params.proj_b),
        trans=TransitionMatrix(
            start=upd("trans.start", params.trans.start),
            trans=upd("trans.trans", params.trans.trans),
            end=upd("trans.end", params.trans.end),
            mask=params.trans.mask,
        ),
    )


EmbeddingTable = dict[str, np.ndarray]


def init_params(
    dims: ModelDims,
    vocab: Vocab,
    pretrained: EmbeddingTable | None = None,
    seed: int = 0,
    use_char_embedding: bool = True,
    use_crf: bool = True,
) -> ModelParams:
    """Seeded initialization: Glorot-uniform weights, zero biases.

    Embedding rows are uniform in +-sqrt(3/dim); rows present in
    `pretrained` are copied verbatim afterwards, so the random layout is
    independent of the pretrained file.
    """
    rng = np.random.default_rng(seed)

    def glorot(rows: int, cols: int) -> np.ndarray:
        bound = math.sqrt(6.0 / (rows + cols))
        return rng.uniform(-bound, bound, (rows, cols))

    def emb(rows: int, cols: int) -> np.ndarray:
        bound = math.sqrt(3.0 / cols)
        return rng.uniform(-bound, bound, (rows, cols))

    def lstm(dim_in: int, hidden: int) -> LstmCell:
        return LstmCell(glorot(4 * hidden, dim_in), glorot(4 * hidden, hidden), np.zeros(4 * hidden))

    def gru(dim_in: int, hidden: int) -> GruCell:
        return GruCell(glorot(3 * hidden, dim_in), glorot(3 * hidden, hidden), np.zeros(3 * hidden))

    word_table = emb(vocab.n_words, dims.word_emb)
    char_table = None
    char_fwd = char_bwd = None
    if use_char_embedding:
        char_table = emb(vocab.n_chars, dims.char_emb)
        char_fwd = lstm(dims.char_emb, dims.char_hidden)
        char_bwd = lstm(dims.char_emb, dims.char_hidden)
    gru_fwd = gru(dims.gru_input, dims.word_hidden)
    gru_bwd = gru(dims.gru_input, dims.word_hidden)
    proj_w = glorot(dims.labels, 2 * dims.word_hidden)
    proj_b = np.zeros(dims.labels)

    if pretrained is not None:
        for word, vec in pretrained.items():
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (dims.word_emb,):
                raise ValueError(
                    f"pretrained vector for {word!r} has width {vec.shape}, "
                    f"expected ({dims.word_emb},)"
                )
            idx = vocab.word_id(word)
            if idx != 0 or word == UNK:
                word_table[idx] = vec

    return ModelParams(
        dims=dims,
        vocab=vocab,
        use_char_embedding=use_char_embedding,
        use_crf=use_crf,
        word_table=word_table,
        char_table=char_table,
        char_fwd=char_fwd,
        char_bwd=char_bwd,
        gru_fwd=gru_fwd,
        gru_bwd=gru_bwd,
        proj_w=proj_w,
        proj_b=proj_b,
        trans=TransitionMatrix.zeros(build_bio_mask()),
    )
