"""Linear-chain CRF over the five BIO labels.

Dense float64 throughout. A transition structure holds a score for
starting in each label, a K x K move matrix, and a score for ending in
each label. Forbidden moves are applied additively as MASK_PENALTY
(-1e30) instead of literal -inf so all arithmetic stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LABELS, LabelTag, NUM_LABELS, label_ids

K = NUM_LABELS
MASK_PENALTY = -1e30
# Anything below this is treated as "reached through a forbidden move".
_FORBIDDEN_FLOOR = MASK_PENALTY / 2


def _logsumexp(a: np.ndarray, axis: int | None = None) -> np.ndarray | float:
    m = np.max(a, axis=axis, keepdims=axis is not None)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=axis is not None))
    return np.squeeze(out, axis=axis) if axis is not None else float(out)


@dataclass(frozen=True)
class TransitionMask:
    """Boolean allow-grids for start, move, and end transitions."""

    start: np.ndarray  # (K,) True = allowed first label
    trans: np.ndarray  # (K, K) True = allowed move from row to column
    end: np.ndarray    # (K,) True = allowed last label


def build_bio_mask() -> TransitionMask:
    """The BIO constraint grid.

    Forbidden: starting at I-X, O -> I-X, and any move into I-X from a
    label of a different entity type. Every label may end a query.
    """
    start = np.ones(K, dtype=bool)
    trans = np.ones((K, K), dtype=bool)
    end = np.ones(K, dtype=bool)
    for j, to_lab in enumerate(LABELS):
        if not to_lab.is_inside:
            continue
        start[j] = False
        for i, from_lab in enumerate(LABELS):
            if from_lab.entity_type != to_lab.entity_type:
                trans[i, j] = False
    return TransitionMask(start=start, trans=trans, end=end)


def allow_all_mask() -> TransitionMask:
    return TransitionMask(
        start=np.ones(K, dtype=bool),
        trans=np.ones((K, K), dtype=bool),
        end=np.ones(K, dtype=bool),
    )


@dataclass
class TransitionMatrix:
    """Start/move/end scores plus the allow-mask."""

    start: np.ndarray
    trans: np.ndarray
    end: np.ndarray
    mask: TransitionMask

    @classmethod
    def zeros(cls, mask: TransitionMask | None = None) -> "TransitionMatrix":
        return cls(
            start=np.zeros(K),
            trans=np.zeros((K, K)),
            end=np.zeros(K),
            mask=mask if mask is not None else build_bio_mask(),
        )

    def masked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Scores with MASK_PENALTY added on every forbidden entry."""
        sm = np.where(self.mask.start, self.start, self.start + MASK_PENALTY)
        tm = np.where(self.mask.trans, self.trans, self.trans + MASK_PENALTY)
        em = np.where(self.mask.end, self.end, self.end + MASK_PENALTY)
        return sm, tm, em


@dataclass
class TransitionGrads:
    """Gradients with the same start/move/end layout as TransitionMatrix."""

    start: np.ndarray
    trans: np.ndarray
    end: np.ndarray


def sequence_score(emissions: np.ndarray, t: TransitionMatrix, labels) -> float:
    """Unnormalized path score of one label sequence.

    A sequence crossing a forbidden transition comes back around
    MASK_PENALTY, which behaves as -inf everywhere downstream.
    """
    ids = label_ids(labels)
    if len(ids) != emissions.shape[0]:
        raise ValueError(f"{emissions.shape[0]} emission rows but {len(ids)} labels")
    sm, tm, em = t.masked()
    score = sm[ids[0]] + em[ids[-1]] + emissions[np.arange(len(ids)), ids].sum()
    for i in range(len(ids) - 1):
        score += tm[ids[i], ids[i + 1]]
    return float(score)


def log_partition(emissions: np.ndarray, t: TransitionMatrix) -> float:
    """log sum over all mask-valid label sequences of exp(path score)."""
    sm, tm, em = t.masked()
    alpha = sm + emissions[0]
    for i in range(1, emissions.shape[0]):
        alpha = _logsumexp(alpha[:, None] + tm, axis=0) + emissions[i]
    return float(_logsumexp(alpha + em))


def _forward_backward(emissions: np.ndarray, t: TransitionMatrix):
    sm, tm, em = t.masked()
    length = emissions.shape[0]
    alpha = np.empty((length, K))
    alpha[0] = sm + emissions[0]
    for i in range(1, length):
        alpha[i] = _logsumexp(alpha[i - 1][:, None] + tm, axis=0) + emissions[i]
    beta = np.empty((length, K))
    beta[-1] = em
    for i in range(length - 2, -1, -1):
        beta[i] = _logsumexp(tm + (emissions[i + 1] + beta[i + 1])[None, :], axis=1)
    log_z = float(_logsumexp(alpha[-1] + em))
    return alpha, beta, log_z, tm


def crf_nll_grad(
    emissions: np.ndarray, t: TransitionMatrix, gold
) -> tuple[float, np.ndarray, TransitionGrads]:
    """Negative log-likelihood of the gold path and its gradients.

    Gradients are (marginal probability - gold indicator); entries on
    masked-off transitions are exactly zero.
    """
    ids = label_ids(gold)
    length = emissions.shape[0]
    if len(ids) != length:
        raise ValueError(f"{length} emission rows but {len(ids)} labels")
    if not t.mask.start[ids[0]] or not t.mask.end[ids[-1]] or any(
        not t.mask.trans[ids[i], ids[i + 1]] for i in range(length - 1)
    ):
        raise ValueError("gold labels cross a masked transition")

    alpha, beta, log_z, tm = _forward_backward(emissions, t)
    node = np.exp(alpha + beta - log_z)

    d_e = node.copy()
    d_e[np.arange(length), ids] -= 1.0

    d_trans = np.zeros((K, K))
    for i in range(length - 1):
        d_trans += np.exp(
            alpha[i][:, None] + tm + (emissions[i + 1] + beta[i + 1])[None, :] - log_z
        )
        d_trans[ids[i], ids[i + 1]] -= 1.0
    d_start = node[0].copy()
    d_start[ids[0]] -= 1.0
    d_end = node[-1].copy()
    d_end[ids[-1]] -= 1.0

    d_start[~t.mask.start] = 0.0
    d_trans[~t.mask.trans] = 0.0
    d_end[~t.mask.end] = 0.0

    loss = log_z - sequence_score(emissions, t, gold)
    return float(loss), d_e, TransitionGrads(start=d_start, trans=d_trans, end=d_end)


def viterbi_decode(
    emissions: np.ndarray, t: TransitionMatrix
) -> tuple[tuple[LabelTag, ...], float]:
    """Highest-scoring mask-valid label sequence.

    Ties break toward the lower label index (np.argmax picks the first
    maximum), which makes decoding fully deterministic.
    """
    sm, tm, em = t.masked()
    length = emissions.shape[0]
    delta = sm + emissions[0]
    back = np.empty((length, K), dtype=np.int64)
    for i in range(1, length):
        scores = delta[:, None] + tm
        back[i] = np.argmax(scores, axis=0)
        delta = scores[back[i], np.arange(K)] + emissions[i]
    final = delta + em
    last = int(np.argmax(final))
    ids = [last]
    for i in range(length - 1, 0, -1):
        ids.append(int(back[i, ids[-1]]))
    ids.reverse()
    return tuple(LABELS[j] for j in ids), float(final[last])
