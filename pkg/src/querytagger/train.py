"""Epoch loop with dev-F1 early stopping, exact-match F1, prediction."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    Dataset,
    EntityType,
    LabelTag,
    Source,
    TaggedQuery,
    bio_repair,
)
from .crf import viterbi_decode
from .net import ModelParams, model_loss_grads, sgd_step, _encode_cached


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 50
    patience: int = 3          # consecutive non-improving dev epochs before stopping
    batch_size: int = 32
    lr: float = 0.05
    clip: float = 5.0
    shuffle_seed: int = 0
    dropout: float = 0.0

    def __post_init__(self) -> None:
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass(frozen=True)
class TypeReport:
    """Exact-match scores for a single entity type, on a 0-100 scale."""

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalReport:
    """Micro-averaged exact-match scores plus the per-type breakdown."""

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    by_type: dict[EntityType, TypeReport] = field(default_factory=dict)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    # Zero-division convention: a vanishing denominator scores 0.
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def evaluate_f1(
    predictions: Sequence[TaggedQuery], gold: Sequence[TaggedQuery]
) -> EvalReport:
    """Exact-match micro F1: a span counts only if type, start, and end
    all equal a gold span."""
    if len(predictions) != len(gold):
        raise ValueError(
            f"{len(predictions)} predictions vs {len(gold)} gold queries"
        )
    tp: dict[EntityType, int] = {e: 0 for e in EntityType}
    fp: dict[EntityType, int] = {e: 0 for e in EntityType}
    fn: dict[EntityType, int] = {e: 0 for e in EntityType}
    for qi, (pred, ref) in enumerate(zip(predictions, gold)):
        if pred.tokens != ref.tokens:
            raise ValueError(f"query {qi}: prediction tokens differ from gold tokens")
        pred_spans = set(pred.spans())
        gold_spans = set(ref.spans())
        for span in pred_spans & gold_spans:
            tp[span.entity_type] += 1
        for span in pred_spans - gold_spans:
            fp[span.entity_type] += 1
        for span in gold_spans - pred_spans:
            fn[span.entity_type] += 1

    by_type = {}
    for etype in EntityType:
        p, r, f1 = _prf(tp[etype], fp[etype], fn[etype])
        by_type[etype] = TypeReport(p, r, f1, tp[etype], fp[etype], fn[etype])
    tp_all, fp_all, fn_all = sum(tp.values()), sum(fp.values()), sum(fn.values())
    p, r, f1 = _prf(tp_all, fp_all, fn_all)
    return EvalReport(p, r, f1, tp_all, fp_all, fn_all, by_type)


def predict(params: ModelParams, tokens: Sequence[str]) -> TaggedQuery:
    """Tag one tokenized query; output is always a valid BIO sequence."""
    if not tokens:
        raise ValueError("tokens must be non-empty")
    emissions, _ = _encode_cached(tokens, params)
    if params.use_crf:
        labels, _ = viterbi_decode(emissions, params.trans)
    else:
        ids = emissions.argmax(axis=1)
        labels = bio_repair([LabelTag(list(LabelTag)[i]) for i in ids])
    return TaggedQuery(tuple(tokens), tuple(labels), Source.PREDICTED)


def predict_all(params: ModelParams, queries: Sequence[TaggedQuery]) -> list[TaggedQuery]:
    return [predict(params, q.tokens) for q in queries]


def _items(data: Dataset | Sequence[TaggedQuery]) -> list[TaggedQuery]:
    return list(data.items) if isinstance(data, Dataset) else list(data)


def train_model(
    train: Dataset | Sequence[TaggedQuery],
    dev: Dataset | Sequence[TaggedQuery],
    params0: ModelParams,
    cfg: TrainConfig,
) -> tuple[ModelParams, list[EvalReport]]:
    """SGD epochs with early stopping on dev F1.

    Keeps the snapshot with the best dev F1 (earliest on ties) and stops
    after max(1, patience) consecutive non-improving epochs, so
    patience=0 stops at the first epoch that fails to improve.
    """
    train_items = _items(train)
    dev_items = _items(dev)
    if not train_items:
        raise ValueError("training set is empty")
    if not dev_items:
        raise ValueError("dev set is empty")

    order_rng = random.Random(cfg.shuffle_seed)
    drop_rng = np.random.default_rng(cfg.shuffle_seed)
    params = params0
    best_params = params0
    best_f1 = -1.0
    bad_epochs = 0
    stop_after = max(1, cfg.patience)
    history: list[EvalReport] = []

    for _ in range(cfg.max_epochs):
        order = list(range(len(train_items)))
        order_rng.shuffle(order)
        for lo in range(0, len(order), cfg.batch_size):
            batch = [train_items[i] for i in order[lo:lo + cfg.batch_size]]
            _, grads = model_loss_grads(
                batch, params, dropout=cfg.dropout, rng=drop_rng if cfg.dropout else None
            )
            params = sgd_step(params, grads, cfg.lr, cfg.clip)
        report = evaluate_f1(predict_all(params, dev_items), dev_items)
        history.append(report)
        if report.f1 > best_f1:
            best_f1 = report.f1
            best_params = params
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= stop_after:
                break
    return best_params, history
