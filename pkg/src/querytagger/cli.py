"""Operator CLI: data generation, sampling, training, evaluation, tagging,
and the HTTP service. All heavy lifting lives in the library; this module
only parses arguments and wires files to functions.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from pathlib import Path

from .core import Dataset, Source, entity_surfaces, split_golden
from .dataio import (
    catalog_fingerprint,
    read_catalog,
    read_dataset,
    write_catalog,
    write_dataset,
)
from .datagen import (
    AmbiguousLexicon,
    MiniWorldConfig,
    _corrupt,
    distant_label,
    generate_miniworld,
    generate_synthetic,
    stratified_sample,
)
from .model_io import load_embeddings, load_model, nearest_neighbors, save_model, vocab_coverage
from .net import ModelDims, Vocab, init_params
from .preprocess import EmptyQueryError, normalize_query
from .service import DEFAULT_TOKEN_CAP, create_app, tag_raw_query
from .train import TrainConfig, evaluate_f1, train_model
from .triplelearn import TripleLearnConfig, one_pass_baseline, run_triplelearn

_BOOL_TRUE = {"true", "1", "yes", "on"}
_BOOL_FALSE = {"false", "0", "no", "off"}


def _parse_kv_file(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _parse_bool(key: str, value: str) -> bool:
    low = value.lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValueError(f"{key}: expected a boolean, got {value!r}")


def _triplelearn_config(kv: dict[str, str], seed: int) -> TripleLearnConfig:
    ints = {
        "max_iterations", "init_seed", "sample_seed", "balance_seed",
        "max_epochs", "patience", "batch_size", "shuffle_seed",
        "word_emb", "char_emb", "char_hidden", "word_hidden",
    }
    floats = {"growth_factor", "synthetic_fraction", "lr", "clip", "dropout"}
    bools = {"use_char_embedding", "use_crf", "warm_start"}
    values: dict[str, object] = {}
    for key, raw in kv.items():
        if key in ints:
            values[key] = int(raw)
        elif key in floats:
            values[key] = float(raw)
        elif key in bools:
            values[key] = _parse_bool(key, raw)
        elif key == "select_on":
            values[key] = raw
        else:
            raise ValueError(f"unknown config key {key!r}")

    def take(field: str, default):
        return values.pop(field, default)

    train = TrainConfig(
        max_epochs=take("max_epochs", 50),
        patience=take("patience", 3),
        batch_size=take("batch_size", 32),
        lr=take("lr", 0.05),
        clip=take("clip", 5.0),
        shuffle_seed=take("shuffle_seed", seed),
        dropout=take("dropout", 0.0),
    )
    dims = ModelDims(
        word_emb=take("word_emb", 100),
        char_emb=take("char_emb", 25),
        char_hidden=take("char_hidden", 25),
        word_hidden=take("word_hidden", 100),
    )
    return TripleLearnConfig(
        growth_factor=take("growth_factor", 2.0),
        synthetic_fraction=take("synthetic_fraction", 0.1),
        max_iterations=take("max_iterations", 9),
        train=train,
        dims=dims,
        use_char_embedding=take("use_char_embedding", True),
        use_crf=take("use_crf", True),
        init_seed=take("init_seed", seed),
        sample_seed=take("sample_seed", seed),
        balance_seed=take("balance_seed", seed),
        select_on=take("select_on", "test"),
        warm_start=take("warm_start", False),
    )


def _print_report_table(reports) -> None:
    print(f"{'iter':>4}  {'training':>9}  {'unq.BRD':>8}  {'unq.PRD':>8}  {'dev F1':>7}  {'test F1':>7}")
    for rep in reports:
        print(
            f"{rep.iteration:>4}  {rep.training_size:>9}  {rep.unique_brd:>8}  "
            f"{rep.unique_prd:>8}  {rep.dev_f1:>7.2f}  {rep.test_f1:>7.2f}"
        )


def _cmd_gen_miniworld(args) -> None:
    n_synthetic = args.n_synthetic
    if n_synthetic is None:
        n_synthetic = args.n_brands + args.n_product_types
    cfg = MiniWorldConfig(
        n_brands=args.n_brands,
        n_product_types=args.n_product_types,
        n_golden=args.n_golden,
        n_noisy=args.n_noisy,
        n_synthetic=n_synthetic,
        noise_rate=args.noise_rate,
        ambiguity_rate=args.ambiguity_rate,
        seed=args.seed,
    )
    world = generate_miniworld(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_catalog(world.catalog, out / "brands.txt", out / "product_types.txt")
    write_dataset(world.golden, out / "golden.tsv")
    write_dataset(world.noisy, out / "noisy.tsv")
    write_dataset(world.synthetic, out / "synthetic.tsv")
    print(
        f"wrote {len(world.golden)} golden / {len(world.noisy)} noisy / "
        f"{len(world.synthetic)} synthetic queries and the catalog to {out}"
    )


def _cmd_gen_synthetic(args) -> None:
    catalog = read_catalog(args.brands, args.product_types)
    write_dataset(generate_synthetic(catalog), args.out)
    print(f"wrote {len(catalog.brands) + len(catalog.product_types)} synthetic queries to {args.out}")


def _cmd_gen_noisy(args) -> None:
    catalog = read_catalog(args.brands, args.product_types)
    items = []
    skipped = 0
    for i, line in enumerate(Path(args.queries).read_text(encoding="utf-8").splitlines()):
        try:
            tokens = normalize_query(line)
        except EmptyQueryError:
            skipped += 1
            continue
        query = distant_label(tokens, catalog)
        if args.noise_rate > 0:
            rng = random.Random(f"{args.seed}/noisy/{i}")
            if rng.random() < args.noise_rate:
                query = _corrupt(query, rng)
        items.append(query)
    if not items:
        raise ValueError(f"{args.queries}: no usable queries")
    write_dataset(Dataset(tuple(items), role=Source.NOISY), args.out)
    if skipped:
        print(f"skipped {skipped} empty queries", file=sys.stderr)
    print(f"wrote {len(items)} noisy queries to {args.out}")


def _cmd_sample(args) -> None:
    data = read_dataset(args.input, repair=args.repair)
    sample = stratified_sample(data, args.n, args.seed)
    write_dataset(sample, args.out, header_role=data.role or Source.NOISY)
    print(f"wrote {len(sample)} of {len(data)} queries to {args.out}")


def _dims_from_args(args) -> ModelDims:
    return ModelDims(
        word_emb=args.word_emb,
        char_emb=args.char_emb,
        char_hidden=args.char_hidden,
        word_hidden=args.word_hidden,
    )


def _fingerprint_from_args(args) -> str:
    if args.brands and args.product_types:
        return catalog_fingerprint(read_catalog(args.brands, args.product_types))
    return ""


def _cmd_train(args) -> None:
    train_data = read_dataset(args.train, repair=args.repair)
    dev_data = read_dataset(args.dev, repair=args.repair)
    vocab = Vocab.build(train_data.items)
    pretrained = load_embeddings(args.embeddings, args.word_emb) if args.embeddings else None
    params0 = init_params(
        _dims_from_args(args),
        vocab,
        pretrained=pretrained,
        seed=args.seed,
        use_char_embedding=not args.no_char_embedding,
        use_crf=not args.no_crf,
    )
    cfg = TrainConfig(
        max_epochs=args.max_epochs,
        patience=args.patience,
        batch_size=args.batch_size,
        lr=args.lr,
        clip=args.clip,
        shuffle_seed=args.seed,
        dropout=args.dropout,
    )
    best, history = train_model(train_data, dev_data, params0, cfg)
    save_model(best, args.out, fingerprint=_fingerprint_from_args(args))
    best_dev = max(rep.f1 for rep in history)
    print(f"trained {len(history)} epochs, best dev F1 {best_dev:.2f}, model at {args.out}")
    if args.test:
        from .train import predict_all

        test_data = read_dataset(args.test, repair=args.repair)
        report = evaluate_f1(predict_all(best, test_data.items), test_data.items)
        print(f"test F1 {report.f1:.2f} (P {report.precision:.2f} / R {report.recall:.2f})")


def _cmd_triplelearn(args) -> None:
    golden = read_dataset(args.golden, repair=args.repair)
    noisy = read_dataset(args.noisy, repair=args.repair)
    synthetic = read_dataset(args.synthetic, repair=args.repair)
    catalog = read_catalog(args.brands, args.product_types)
    kv = _parse_kv_file(args.config) if args.config else {}
    cfg = _triplelearn_config(kv, args.seed)
    split = split_golden(golden, args.seed)
    lexicon = AmbiguousLexicon.from_catalog(catalog)

    report_path = Path(args.report) if args.report else None
    if report_path is not None:
        report_path.write_text("", encoding="utf-8")

    def on_report(rep) -> None:
        line = json.dumps(dataclasses.asdict(rep))
        if report_path is not None:
            with report_path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        print(line)

    best, reports = run_triplelearn(
        split, noisy, synthetic, lexicon, cfg, catalog=catalog, on_report=on_report
    )
    save_model(best, args.out, fingerprint=catalog_fingerprint(catalog))
    _print_report_table(reports)
    best_rep = max(reports, key=lambda r: (r.test_f1, -r.iteration))
    print(f"best iteration {best_rep.iteration} (test F1 {best_rep.test_f1:.2f}), model at {args.out}")
    if args.baseline:
        _, base_report = one_pass_baseline(split, noisy, synthetic, cfg)
        print(f"one-pass baseline test F1 {base_report.f1:.2f}")


def _cmd_eval(args) -> None:
    pred = read_dataset(args.pred, repair=args.repair)
    gold = read_dataset(args.gold, repair=args.repair)
    report = evaluate_f1(pred.items, gold.items)
    print(f"{'':>10}  {'P':>7}  {'R':>7}  {'F1':>7}  {'TP':>6}  {'FP':>6}  {'FN':>6}")
    print(
        f"{'micro':>10}  {report.precision:>7.2f}  {report.recall:>7.2f}  "
        f"{report.f1:>7.2f}  {report.tp:>6}  {report.fp:>6}  {report.fn:>6}"
    )
    for etype, sub in sorted(report.by_type.items()):
        print(
            f"{etype.value:>10}  {sub.precision:>7.2f}  {sub.recall:>7.2f}  "
            f"{sub.f1:>7.2f}  {sub.tp:>6}  {sub.fp:>6}  {sub.fn:>6}"
        )
    record = {
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
    }
    print("RESULT " + json.dumps(record))


def _cmd_tag(args) -> None:
    artifact = load_model(args.model)
    response = tag_raw_query(artifact.params, args.query, token_cap=args.token_cap)
    print(json.dumps(response))


def _cmd_baseline_tag(args) -> None:
    catalog = read_catalog(args.brands, args.product_types)
    tokens = normalize_query(args.query)
    tagged = distant_label(tokens, catalog, source=Source.PREDICTED)
    brand, product = entity_surfaces(tagged.tokens, tagged.labels)
    print(json.dumps({
        "query": args.query,
        "tokens": list(tagged.tokens),
        "labels": [lab.value for lab in tagged.labels],
        "brand": brand,
        "product": product,
    }))


def _cmd_serve(args) -> None:
    import uvicorn

    app = create_app(args.model, token_cap=args.token_cap)
    uvicorn.run(app, host=args.host, port=args.port)


def _cmd_inspect_emb(args) -> None:
    table = load_embeddings(args.embeddings, args.dims)
    if args.vocab_from:
        data = read_dataset(args.vocab_from, repair=True)
        words = {tok for query in data.items for tok in query.tokens}
        print(f"vocab coverage: {vocab_coverage(table, sorted(words)):.1f}% of {len(words)} words")
    if args.word:
        for neighbor in nearest_neighbors(table, args.word, args.k):
            print(neighbor)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="querytagger",
        description="Brand / product-type tagging for search queries.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for anything random")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-miniworld", parents=[common], help="generate a seeded desk-scale corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-brands", type=int, default=50)
    p.add_argument("--n-product-types", type=int, default=50)
    p.add_argument("--n-golden", type=int, default=500)
    p.add_argument("--n-noisy", type=int, default=5000)
    p.add_argument("--n-synthetic", type=int, default=None,
                   help="defaults to n-brands + n-product-types")
    p.add_argument("--noise-rate", type=float, default=0.15)
    p.add_argument("--ambiguity-rate", type=float, default=0.1)
    p.set_defaults(func=_cmd_gen_miniworld)

    p = sub.add_parser("gen-synthetic", parents=[common], help="one query per catalog entry")
    p.add_argument("--brands", required=True)
    p.add_argument("--product-types", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("gen-noisy", parents=[common], help="greedy-label raw queries against the catalog")
    p.add_argument("--brands", required=True)
    p.add_argument("--product-types", required=True)
    p.add_argument("--queries", required=True, help="text file, one raw query per line")
    p.add_argument("--out", required=True)
    p.add_argument("--noise-rate", type=float, default=0.0)
    p.set_defaults(func=_cmd_gen_noisy)

    p = sub.add_parser("sample", parents=[common], help="pattern-stratified sample of a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--repair", action="store_true", help="repair orphan I- tags on read")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("train", parents=[common], help="train a tagger on one train/dev pair")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--test")
    p.add_argument("--out", required=True)
    p.add_argument("--word-emb", type=int, default=100)
    p.add_argument("--char-emb", type=int, default=25)
    p.add_argument("--char-hidden", type=int, default=25)
    p.add_argument("--word-hidden", type=int, default=100)
    p.add_argument("--no-char-embedding", action="store_true")
    p.add_argument("--no-crf", action="store_true")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--clip", type=float, default=5.0)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int, default=50)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--embeddings", help="pretrained embedding text file")
    p.add_argument("--brands", help="catalog file for the model fingerprint")
    p.add_argument("--product-types")
    p.add_argument("--repair", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("triplelearn", parents=[common], help="iterative training over three datasets")
    p.add_argument("--golden", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--brands", required=True)
    p.add_argument("--product-types", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="append per-iteration JSON lines here")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--baseline", action="store_true", help="also run the one-pass baseline")
    p.add_argument("--repair", action="store_true")
    p.set_defaults(func=_cmd_triplelearn)

    p = sub.add_parser("eval", parents=[common], help="exact-match F1 of predictions vs gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--repair", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("tag", parents=[common], help="tag one raw query with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--token-cap", type=int, default=DEFAULT_TOKEN_CAP)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("baseline-tag", parents=[common], help="tag one query with the greedy matcher")
    p.add_argument("--brands", required=True)
    p.add_argument("--product-types", required=True)
    p.add_argument("--query", required=True)
    p.set_defaults(func=_cmd_baseline_tag)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP tagging service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--token-cap", type=int, default=DEFAULT_TOKEN_CAP)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("inspect-emb", parents=[common], help="embedding neighbors and vocab coverage")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--word")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--vocab-from", help="dataset file whose tokens define the vocabulary")
    p.set_defaults(func=_cmd_inspect_emb)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        args.func(args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
