import json

import pytest

from querytagger.cli import build_parser, main
from querytagger.core import Source
from querytagger.dataio import read_dataset, write_dataset
from querytagger.datagen import MiniWorldConfig, generate_miniworld
from querytagger.model_io import load_model

from test_datagen import _query_with_pattern
from querytagger.core import Dataset


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_every_subcommand_accepts_seed():
    parser = build_parser()
    subparsers = next(
        a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction"
    )
    for name, sub in subparsers.choices.items():
        assert "--seed" in sub.format_help(), name


def test_unknown_flag_exits_nonzero(capsys):
    code, _, _ = run(capsys, "tag", "--definitely-not-a-flag")
    assert code != 0


def test_missing_file_single_line_diagnostic(capsys):
    code, _, err = run(capsys, "tag", "--model", "/nope/missing.qtm", "--query", "x")
    assert code == 1
    assert err.startswith("error: ")
    assert len(err.strip().splitlines()) == 1


def test_gen_miniworld_and_sample_round_trip(tmp_path, capsys):
    out = tmp_path / "world"
    code, _, _ = run(
        capsys, "gen-miniworld", "--out-dir", str(out),
        "--n-brands", "10", "--n-product-types", "10",
        "--n-golden", "30", "--n-noisy", "40", "--seed", "3",
    )
    assert code == 0
    golden = read_dataset(out / "golden.tsv")
    assert len(golden) == 30 and golden.role is Source.GOLDEN
    assert len(read_dataset(out / "synthetic.tsv")) == 20

    code, _, _ = run(
        capsys, "sample", "--input", str(out / "noisy.tsv"),
        "--n", "10", "--out", str(tmp_path / "sampled.tsv"), "--seed", "1",
    )
    assert code == 0
    assert len(read_dataset(tmp_path / "sampled.tsv")) == 10


def test_sample_proportions_on_pattern_fixture(tmp_path, capsys):
    items = [_query_with_pattern("BRD+O+PRD", i) for i in range(80)]
    items += [_query_with_pattern("O+PRD", i) for i in range(20)]
    write_dataset(Dataset(tuple(items), role=Source.NOISY), tmp_path / "data.tsv")
    code, _, _ = run(
        capsys, "sample", "--input", str(tmp_path / "data.tsv"),
        "--n", "10", "--out", str(tmp_path / "s.tsv"), "--seed", "0",
    )
    assert code == 0
    sampled = read_dataset(tmp_path / "s.tsv")
    three_token = sum(1 for q in sampled if len(q.tokens) == 3)
    assert three_token == 8 and len(sampled) - three_token == 2


def test_gen_synthetic_from_catalog_files(tmp_path, capsys):
    (tmp_path / "b.txt").write_text("lg\nge\n")
    (tmp_path / "p.txt").write_text("washer\n")
    code, _, _ = run(
        capsys, "gen-synthetic", "--brands", str(tmp_path / "b.txt"),
        "--product-types", str(tmp_path / "p.txt"),
        "--out", str(tmp_path / "syn.tsv"),
    )
    assert code == 0
    assert len(read_dataset(tmp_path / "syn.tsv")) == 3


def test_gen_noisy_labels_raw_queries(tmp_path, capsys):
    (tmp_path / "b.txt").write_text("lg\n")
    (tmp_path / "p.txt").write_text("washer\n")
    (tmp_path / "raw.txt").write_text("LG washer cheap\n!!!\nwasher\n")
    code, _, err = run(
        capsys, "gen-noisy", "--brands", str(tmp_path / "b.txt"),
        "--product-types", str(tmp_path / "p.txt"),
        "--queries", str(tmp_path / "raw.txt"),
        "--out", str(tmp_path / "noisy.tsv"),
    )
    assert code == 0
    noisy = read_dataset(tmp_path / "noisy.tsv")
    assert len(noisy) == 2
    assert [l.value for l in noisy.items[0].labels] == ["B-BRD", "B-PRD", "O"]
    assert "skipped 1" in err


def test_eval_identical_files_perfect_score(tmp_path, capsys):
    world = generate_miniworld(MiniWorldConfig(
        n_brands=8, n_product_types=8, n_golden=20, n_noisy=20,
        n_synthetic=16, noise_rate=0.0, ambiguity_rate=0.0, seed=1,
    ))
    write_dataset(world.golden, tmp_path / "gold.tsv")
    code, out, _ = run(
        capsys, "eval", "--pred", str(tmp_path / "gold.tsv"),
        "--gold", str(tmp_path / "gold.tsv"),
    )
    assert code == 0
    result_line = next(l for l in out.splitlines() if l.startswith("RESULT "))
    record = json.loads(result_line.removeprefix("RESULT "))
    assert record["f1"] == 100.0
    assert record["fp"] == 0 and record["fn"] == 0


def test_tag_canonical_example(fixture_model, capsys):
    code, out, _ = run(
        capsys, "tag", "--model", str(fixture_model.model_path),
        "--query", "LG washer mini",
    )
    assert code == 0
    body = json.loads(out.strip().splitlines()[-1])
    assert body["tokens"] == ["lg", "washer", "mini"]
    assert body["labels"] == ["B-BRD", "B-PRD", "O"]
    assert body["brand"] == ["lg"]
    assert body["product"] == ["washer"]


def test_baseline_tag_greedy_output(tmp_path, capsys):
    (tmp_path / "b.txt").write_text("cosco\n")
    (tmp_path / "p.txt").write_text("table\n")
    code, out, _ = run(
        capsys, "baseline-tag", "--brands", str(tmp_path / "b.txt"),
        "--product-types", str(tmp_path / "p.txt"),
        "--query", "cosco table and chair set",
    )
    assert code == 0
    body = json.loads(out.strip().splitlines()[-1])
    assert body["labels"] == ["B-BRD", "B-PRD", "O", "O", "O"]
    assert body["brand"] == ["cosco"]
    assert body["product"] == ["table"]


def test_train_writes_loadable_model(tmp_path, capsys):
    world = generate_miniworld(MiniWorldConfig(
        n_brands=8, n_product_types=8, n_golden=30, n_noisy=20,
        n_synthetic=16, noise_rate=0.0, ambiguity_rate=0.0, seed=2,
    ))
    write_dataset(world.golden, tmp_path / "train.tsv")
    write_dataset(world.golden, tmp_path / "dev.tsv")
    model_path = tmp_path / "model.qtm"
    code, out, _ = run(
        capsys, "train", "--train", str(tmp_path / "train.tsv"),
        "--dev", str(tmp_path / "dev.tsv"), "--out", str(model_path),
        "--word-emb", "8", "--char-emb", "4", "--char-hidden", "4",
        "--word-hidden", "8", "--max-epochs", "2", "--lr", "0.2", "--seed", "5",
    )
    assert code == 0
    artifact = load_model(model_path)
    assert artifact.params.dims.word_emb == 8
    assert "best dev F1" in out


def test_train_ablation_flags(tmp_path, capsys):
    world = generate_miniworld(MiniWorldConfig(
        n_brands=8, n_product_types=8, n_golden=25, n_noisy=20,
        n_synthetic=16, noise_rate=0.0, ambiguity_rate=0.0, seed=2,
    ))
    write_dataset(world.golden, tmp_path / "train.tsv")
    model_path = tmp_path / "ablated.qtm"
    code, _, _ = run(
        capsys, "train", "--train", str(tmp_path / "train.tsv"),
        "--dev", str(tmp_path / "train.tsv"), "--out", str(model_path),
        "--word-emb", "8", "--char-emb", "4", "--char-hidden", "4",
        "--word-hidden", "8", "--max-epochs", "1",
        "--no-char-embedding", "--no-crf",
    )
    assert code == 0
    artifact = load_model(model_path)
    assert not artifact.params.use_char_embedding
    assert not artifact.params.use_crf


def test_triplelearn_cli_end_to_end(tmp_path, capsys):
    world = generate_miniworld(MiniWorldConfig(
        n_brands=10, n_product_types=10, n_golden=60, n_noisy=80,
        n_synthetic=20, noise_rate=0.1, ambiguity_rate=0.1, seed=4,
    ))
    out = tmp_path
    write_dataset(world.golden, out / "golden.tsv")
    write_dataset(world.noisy, out / "noisy.tsv")
    write_dataset(world.synthetic, out / "synthetic.tsv")
    from querytagger.dataio import write_catalog

    write_catalog(world.catalog, out / "b.txt", out / "p.txt")
    (out / "cfg.txt").write_text(
        "max_iterations = 2\n"
        "max_epochs = 2\n"
        "word_emb = 8\nchar_emb = 4\nchar_hidden = 4\nword_hidden = 8\n"
        "lr = 0.2\nbatch_size = 8\n"
        "# comment line\n"
    )
    code, stdout, _ = run(
        capsys, "triplelearn",
        "--golden", str(out / "golden.tsv"), "--noisy", str(out / "noisy.tsv"),
        "--synthetic", str(out / "synthetic.tsv"),
        "--brands", str(out / "b.txt"), "--product-types", str(out / "p.txt"),
        "--out", str(out / "best.qtm"), "--report", str(out / "report.jsonl"),
        "--config", str(out / "cfg.txt"), "--seed", "4",
    )
    assert code == 0
    lines = (out / "report.jsonl").read_text().strip().splitlines()
    assert 1 <= len(lines) <= 2
    record = json.loads(lines[0])
    assert record["iteration"] == 1
    assert record["training_size"] > 0
    assert "best iteration" in stdout
    assert load_model(out / "best.qtm").fingerprint


def test_triplelearn_unknown_config_key(tmp_path, capsys):
    for name in ("golden", "noisy", "synthetic"):
        (tmp_path / f"{name}.tsv").write_text("# role: GOLDEN\nlg\tB-BRD\n")
    (tmp_path / "b.txt").write_text("lg\n")
    (tmp_path / "p.txt").write_text("washer\n")
    (tmp_path / "cfg.txt").write_text("definitely_not_a_key = 1\n")
    code, _, err = run(
        capsys, "triplelearn",
        "--golden", str(tmp_path / "golden.tsv"), "--noisy", str(tmp_path / "noisy.tsv"),
        "--synthetic", str(tmp_path / "synthetic.tsv"),
        "--brands", str(tmp_path / "b.txt"), "--product-types", str(tmp_path / "p.txt"),
        "--out", str(tmp_path / "m.qtm"), "--config", str(tmp_path / "cfg.txt"),
    )
    assert code == 1
    assert "definitely_not_a_key" in err


def test_inspect_emb_neighbors_and_coverage(tmp_path, capsys):
    (tmp_path / "emb.txt").write_text(
        "milwaukee 1.0 0.0\ndewalt 0.9 0.1\nchicago 0.0 1.0\nwasher 0.5 0.5\n"
    )
    (tmp_path / "data.tsv").write_text("# role: GOLDEN\nmilwaukee\tB-BRD\nwasher\tB-PRD\nzzz\tO\n")
    code, out, _ = run(
        capsys, "inspect-emb", "--embeddings", str(tmp_path / "emb.txt"),
        "--word", "milwaukee", "--k", "2",
        "--vocab-from", str(tmp_path / "data.tsv"),
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert "vocab coverage: 66.7%" in lines[0]
    assert lines[1:] == ["dewalt", "washer"]


def test_serve_registered():
    parser = build_parser()
    subparsers = next(
        a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction"
    )
    assert "serve" in subparsers.choices
