import pytest

from querytagger.core import split_golden
from querytagger.dataio import catalog_fingerprint
from querytagger.datagen import MiniWorldConfig, generate_miniworld
from querytagger.model_io import save_model
from querytagger.net import ModelDims, Vocab, init_params
from querytagger.train import TrainConfig, predict, train_model


class FixtureModel:
    """A small trained tagger shared by service, CLI, and IO tests."""

    def __init__(self, world, split, params, model_path, fingerprint):
        self.world = world
        self.split = split
        self.params = params
        self.model_path = model_path
        self.fingerprint = fingerprint


@pytest.fixture(scope="session")
def fixture_model(tmp_path_factory) -> FixtureModel:
    world = generate_miniworld(MiniWorldConfig(
        n_brands=20, n_product_types=20, n_golden=240, n_noisy=300,
        n_synthetic=40, noise_rate=0.1, seed=7,
    ))
    split = split_golden(world.golden, 7)
    train_items = list(split.train.items) + list(world.synthetic.items)
    vocab = Vocab.build(train_items + list(world.noisy.items))
    params0 = init_params(
        ModelDims(word_emb=16, char_emb=8, char_hidden=8, word_hidden=16),
        vocab, seed=7,
    )
    cfg = TrainConfig(max_epochs=10, patience=2, batch_size=16, lr=0.3, shuffle_seed=7)
    best, _ = train_model(train_items, split.dev, params0, cfg)
    # The canonical tagging example must resolve or downstream tests are moot.
    assert [l.value for l in predict(best, ["lg", "washer", "mini"]).labels] == [
        "B-BRD", "B-PRD", "O",
    ]
    path = tmp_path_factory.mktemp("model") / "fixture.qtm"
    fingerprint = catalog_fingerprint(world.catalog)
    save_model(best, path, fingerprint=fingerprint)
    return FixtureModel(world, split, best, path, fingerprint)
