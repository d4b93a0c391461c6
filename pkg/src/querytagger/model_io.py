"""Versioned single-file model serialization plus embedding utilities.

Model file layout (all integers little-endian):
  magic "QTGM", format version u32,
  flags (use_char_embedding u8, use_crf u8),
  dims (5 x u32),
  catalog fingerprint (length-prefixed UTF-8),
  word vocab, char vocab (u32 count, then length-prefixed UTF-8 entries
  in id order), then every tensor as a length-prefixed name, u8 ndim,
  u32 shape, and raw float64 little-endian data.

The BIO transition mask is structural and rebuilt on load, not stored.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .crf import TransitionMatrix, build_bio_mask
from .net import (
    EmbeddingTable,
    GruCell,
    LstmCell,
    ModelDims,
    ModelParams,
    Vocab,
    named_arrays,
)

MAGIC = b"QTGM"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """The file is not a model file or uses an unsupported version."""


@dataclass(frozen=True)
class ModelArtifact:
    """A loaded model: parameters plus file-level metadata."""

    params: ModelParams
    version: int
    fingerprint: str


def _pack_str(text: str) -> bytes:
    data = text.encode("utf-8")
    return struct.pack("<I", len(data)) + data


def save_model(params: ModelParams, path: str | Path, fingerprint: str = "") -> None:
    """Write a self-contained model file; see the module docstring."""
    dims = params.dims
    chunks = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<BB", int(params.use_char_embedding), int(params.use_crf)),
        struct.pack(
            "<5I", dims.word_emb, dims.char_emb, dims.char_hidden,
            dims.word_hidden, dims.labels,
        ),
        _pack_str(fingerprint),
    ]
    for entries in (params.vocab.words, params.vocab.chars):
        chunks.append(struct.pack("<I", len(entries)))
        chunks.extend(_pack_str(entry) for entry in entries)
    tensors = named_arrays(params)
    chunks.append(struct.pack("<I", len(tensors)))
    for name, arr in tensors:
        chunks.append(_pack_str(name))
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError(f"{self.path}: truncated model file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def text(self) -> str:
        (n,) = self.unpack("<I")
        return self.take(n).decode("utf-8")


def load_model(path: str | Path) -> ModelArtifact:
    """Read a model file; predictions of the result are bit-identical to
    the saved model's."""
    path = Path(path)
    reader = _Reader(path.read_bytes(), path)
    if reader.take(len(MAGIC)) != MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: model format version {version} not supported "
            f"(this reader handles version {FORMAT_VERSION})"
        )
    use_char, use_crf = reader.unpack("<BB")
    dims = ModelDims(*reader.unpack("<5I"))
    fingerprint = reader.text()
    (n_words,) = reader.unpack("<I")
    words = [reader.text() for _ in range(n_words)]
    (n_chars,) = reader.unpack("<I")
    chars = [reader.text() for _ in range(n_chars)]
    vocab = Vocab(words, chars)
    (n_tensors,) = reader.unpack("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        name = reader.text()
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(reader.take(count * 8), dtype="<f8").reshape(shape)
        tensors[name] = arr.astype(np.float64)

    def cell(kind, prefix: str):
        return kind(
            tensors[f"{prefix}.w_in"], tensors[f"{prefix}.w_rec"], tensors[f"{prefix}.bias"]
        )

    params = ModelParams(
        dims=dims,
        vocab=vocab,
        use_char_embedding=bool(use_char),
        use_crf=bool(use_crf),
        word_table=tensors["word_table"],
        char_table=tensors.get("char_table"),
        char_fwd=cell(LstmCell, "char_fwd") if use_char else None,
        char_bwd=cell(LstmCell, "char_bwd") if use_char else None,
        gru_fwd=cell(GruCell, "gru_fwd"),
        gru_bwd=cell(GruCell, "gru_bwd"),
        proj_w=tensors["proj_w"],
        proj_b=tensors["proj_b"],
        trans=TransitionMatrix(
            start=tensors["trans.start"],
            trans=tensors["trans.trans"],
            end=tensors["trans.end"],
            mask=build_bio_mask(),
        ),
    )
    return ModelArtifact(params=params, version=version, fingerprint=fingerprint)


# ---------------------------------------------------------------------------
# Embedding text files
# ---------------------------------------------------------------------------

def load_embeddings(path: str | Path, dims: int | None = None) -> EmbeddingTable:
    """Read "<word> <v1> ... <vd>" lines; dims=None infers d from line 1."""
    path = Path(path)
    table: EmbeddingTable = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        word, values = fields[0], fields[1:]
        if dims is None:
            if not values:
                raise ValueError(f"{path}:{lineno}: no vector values")
            dims = len(values)
        if len(values) != dims:
            raise ValueError(
                f"{path}:{lineno}: expected {dims} values, got {len(values)}"
            )
        try:
            table[word] = np.array([float(v) for v in values])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric vector value") from None
    if not table:
        raise ValueError(f"{path}: no embeddings")
    return table


def vocab_coverage(table: EmbeddingTable, words) -> float:
    """Percentage of the given words present in the embedding table."""
    words = [w for w in words]
    if not words:
        return 0.0
    hit = sum(1 for w in words if w in table)
    return 100.0 * hit / len(words)


def nearest_neighbors(table: EmbeddingTable, word: str, k: int) -> list[str]:
    """Top-k words by cosine similarity, query excluded, ties broken
    lexicographically."""
    if word not in table:
        raise KeyError(f"{word!r} not in embedding table")
    if k < 0:
        raise ValueError("k must be >= 0")
    others = sorted(w for w in table if w != word)
    if not others:
        return []
    mat = np.stack([table[w] for w in others]).astype(float)
    query = np.asarray(table[word], dtype=float)
    norms = np.linalg.norm(mat, axis=1) * (np.linalg.norm(query) or 1.0)
    norms[norms == 0] = 1.0
    sims = mat @ query / norms
    ranked = sorted(zip(others, sims), key=lambda ws: (-ws[1], ws[0]))
    return [w for w, _ in ranked[:k]]
