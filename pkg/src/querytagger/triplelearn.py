"""Iterative training over golden + growing noisy/synthetic samples.

Each round trains from scratch on the cumulative training set, then adds
a stratified slice of the remaining synthetic pool (unfiltered) and of
the remaining noisy pool (kept only where the current model agrees with
the noisy labels). The loop stops at the first score drop, at
max_iterations, or when the pools stop yielding additions, and returns
the best-scoring iteration's model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from .core import Catalog, Dataset, EntityType, GoldenSplit, TaggedQuery
from .datagen import AmbiguousLexicon, balance_ambiguous, stratified_indices
from .net import ModelDims, ModelParams, Vocab, init_params
from .train import EvalReport, TrainConfig, evaluate_f1, predict, predict_all, train_model


@dataclass(frozen=True)
class TripleLearnConfig:
    growth_factor: float = 2.0        # each round roughly doubles the training set
    synthetic_fraction: float = 0.1   # share of additions drawn from the synthetic pool
    max_iterations: int = 9
    train: TrainConfig = field(default_factory=TrainConfig)
    dims: ModelDims = field(default_factory=ModelDims)
    use_char_embedding: bool = True
    use_crf: bool = True
    init_seed: int = 0
    sample_seed: int = 0
    balance_seed: int = 0
    select_on: str = "test"   # stopping/selection metric; "dev" avoids test leakage
    warm_start: bool = False  # reuse the previous round's weights instead of re-initializing

    def __post_init__(self) -> None:
        if self.growth_factor <= 1.0:
            raise ValueError("growth_factor must be > 1")
        if not 0.0 <= self.synthetic_fraction <= 1.0:
            raise ValueError("synthetic_fraction must be in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.select_on not in ("test", "dev"):
            raise ValueError("select_on must be 'test' or 'dev'")


@dataclass(frozen=True)
class IterationReport:
    """One row of the per-iteration progress table."""

    iteration: int
    training_size: int
    unique_brd: int
    unique_prd: int
    dev_f1: float
    test_f1: float


@dataclass
class FitResult:
    model: object
    dev: EvalReport
    test: EvalReport


class TrainerLike(Protocol):
    def fit(
        self,
        train_items: Sequence[TaggedQuery],
        dev: Dataset,
        test: Dataset,
        warm_from: object | None = None,
    ) -> FitResult: ...

    def tag(self, model: object, tokens: Sequence[str]) -> Sequence: ...


class ModelTrainer:
    """Default trainer: fresh seeded init, SGD epochs, dev/test reports."""

    def __init__(
        self,
        cfg: TripleLearnConfig,
        vocab: Vocab,
        pretrained: dict | None = None,
    ):
        self.cfg = cfg
        self.vocab = vocab
        self.pretrained = pretrained

    def fit(self, train_items, dev, test, warm_from=None) -> FitResult:
        params0 = warm_from
        if params0 is None:
            params0 = init_params(
                self.cfg.dims,
                self.vocab,
                pretrained=self.pretrained,
                seed=self.cfg.init_seed,
                use_char_embedding=self.cfg.use_char_embedding,
                use_crf=self.cfg.use_crf,
            )
        best, _ = train_model(train_items, dev, params0, self.cfg.train)
        dev_report = evaluate_f1(predict_all(best, dev.items), dev.items)
        test_report = evaluate_f1(predict_all(best, test.items), test.items)
        return FitResult(best, dev_report, test_report)

    def tag(self, model, tokens):
        return predict(model, tokens).labels


def consensus_filter(
    params: ModelParams | object,
    candidates: Dataset,
    tag_fn: Callable[[Sequence[str]], Sequence] | None = None,
) -> Dataset:
    """Keep candidates whose stored labels exactly match the model's
    prediction, preserving order."""
    if tag_fn is None:
        tag_fn = lambda toks: predict(params, toks).labels  # noqa: E731
    kept = tuple(q for q in candidates.items if tuple(tag_fn(q.tokens)) == q.labels)
    return Dataset(kept, role=candidates.role)


def coverage(
    training: Dataset | Sequence[TaggedQuery], catalog: Catalog
) -> tuple[int, int]:
    """Distinct catalog brands / product types appearing as labeled
    entities in the training set."""
    items = training.items if isinstance(training, Dataset) else training
    seen_brd: set[str] = set()
    seen_prd: set[str] = set()
    for query in items:
        for span in query.spans():
            surface = query.span_surface(span)
            if span.entity_type is EntityType.BRD and surface in catalog.brands:
                seen_brd.add(surface)
            elif span.entity_type is EntityType.PRD and surface in catalog.product_types:
                seen_prd.add(surface)
    return len(seen_brd), len(seen_prd)


def catalog_from_dataset(dataset: Dataset) -> Catalog:
    """Reconstruct a catalog from labeled spans (the synthetic set covers
    every entry by construction, so it round-trips the catalog)."""
    brands: set[str] = set()
    pts: set[str] = set()
    for query in dataset.items:
        for span in query.spans():
            surface = query.span_surface(span)
            (brands if span.entity_type is EntityType.BRD else pts).add(surface)
    return Catalog(brands=frozenset(brands), product_types=frozenset(pts))


def _pop_indices(pool: list, indices: Sequence[int]) -> list:
    taken = [pool[i] for i in indices]
    drop = set(indices)
    pool[:] = [item for i, item in enumerate(pool) if i not in drop]
    return taken


def run_triplelearn(
    golden: GoldenSplit,
    noisy: Dataset,
    synthetic: Dataset,
    lexicon: AmbiguousLexicon,
    cfg: TripleLearnConfig,
    trainer: TrainerLike | None = None,
    catalog: Catalog | None = None,
    on_report: Callable[[IterationReport], None] | None = None,
) -> tuple[object, list[IterationReport]]:
    """Run the iterative loop; returns the best model and all reports.

    Coverage is counted against `catalog`, falling back to the catalog
    reconstructed from the synthetic set.
    """
    if not golden.train.items or not golden.dev.items or not golden.test.items:
        raise ValueError("golden split has an empty part")
    if catalog is None:
        catalog = catalog_from_dataset(synthetic)
    if trainer is None:
        all_items = list(golden.train.items) + list(noisy.items) + list(synthetic.items)
        trainer = ModelTrainer(cfg, Vocab.build(all_items))

    training: list[TaggedQuery] = list(
        balance_ambiguous(golden.train, lexicon, seed=cfg.balance_seed).items
    )
    noisy_pool = list(noisy.items)
    synth_pool = list(synthetic.items)

    reports: list[IterationReport] = []
    models: list[object] = []
    metrics: list[float] = []
    model: object | None = None

    for iteration in range(1, cfg.max_iterations + 1):
        fit = trainer.fit(
            training, golden.dev, golden.test,
            warm_from=model if cfg.warm_start else None,
        )
        model = fit.model
        cov_brd, cov_prd = coverage(training, catalog)
        report = IterationReport(
            iteration=iteration,
            training_size=len(training),
            unique_brd=cov_brd,
            unique_prd=cov_prd,
            dev_f1=fit.dev.f1,
            test_f1=fit.test.f1,
        )
        reports.append(report)
        models.append(model)
        metrics.append(report.test_f1 if cfg.select_on == "test" else report.dev_f1)
        if on_report is not None:
            on_report(report)

        if len(metrics) > 1 and metrics[-1] < metrics[-2]:
            break  # this round got worse; keep the earlier best
        if iteration == cfg.max_iterations:
            break

        target = round((cfg.growth_factor - 1.0) * len(training))
        n_syn = round(target * cfg.synthetic_fraction)
        n_noisy = target - n_syn
        added = 0
        if synth_pool and n_syn > 0:
            idx = stratified_indices(
                synth_pool, n_syn, seed=cfg.sample_seed + 7919 * iteration
            )
            training.extend(_pop_indices(synth_pool, idx))
            added += len(idx)
        if noisy_pool and n_noisy > 0:
            idx = stratified_indices(
                noisy_pool, n_noisy, seed=cfg.sample_seed + 7919 * iteration + 104729
            )
            agreed = [
                i for i in idx
                if tuple(trainer.tag(model, noisy_pool[i].tokens)) == noisy_pool[i].labels
            ]
            # Agreeing queries join the training set; rejected ones stay in
            # the pool so a later, better model can recover them.
            training.extend(_pop_indices(noisy_pool, agreed))
            added += len(agreed)
        if added == 0:
            break  # pools exhausted (or nothing survived): cannot grow

    best = max(range(len(reports)), key=lambda i: (metrics[i], -i))
    return models[best], reports


def one_pass_baseline(
    golden: GoldenSplit,
    noisy: Dataset,
    synthetic: Dataset,
    cfg: TripleLearnConfig,
    trainer: TrainerLike | None = None,
) -> tuple[object, EvalReport]:
    """Train once on everything, unfiltered; the comparison baseline."""
    if trainer is None:
        all_items = list(golden.train.items) + list(noisy.items) + list(synthetic.items)
        trainer = ModelTrainer(cfg, Vocab.build(all_items))
    training = list(golden.train.items) + list(noisy.items) + list(synthetic.items)
    fit = trainer.fit(training, golden.dev, golden.test)
    return fit.model, fit.test
