"""Encoder checks: hand-executed scalar cell recurrences as oracles,
finite differences over every parameter at tiny dims, and the shape,
determinism, and ablation contracts."""

import math

import numpy as np
import pytest

from querytagger.core import Source, TaggedQuery
from querytagger.net import (
    GruCell,
    LstmCell,
    ModelDims,
    UNK,
    Vocab,
    char_word_repr,
    encode_query,
    init_params,
    model_loss_grads,
    named_arrays,
    param_count,
    sgd_step,
    zero_grads,
)

QUERIES = [
    TaggedQuery(("lg", "washer", "mini"), ("B-BRD", "B-PRD", "O"), Source.GOLDEN),
    TaggedQuery(("weed", "eater", "light"), ("B-BRD", "I-BRD", "B-PRD"), Source.GOLDEN),
]
TINY = ModelDims(word_emb=3, char_emb=2, char_hidden=2, word_hidden=3)


def tiny_params(seed=0, **kwargs):
    return init_params(TINY, Vocab.build(QUERIES), seed=seed, **kwargs)


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestVocab:
    def test_unk_is_id_zero(self):
        vocab = Vocab.build(QUERIES)
        assert vocab.words[0] == UNK
        assert vocab.word_id("definitely-not-here") == 0
        assert vocab.word_id("washer") > 0

    def test_char_ids(self):
        vocab = Vocab.build(QUERIES)
        assert vocab.char_id_list("zz") == [0, 0]  # unseen chars hit UNK
        assert all(i > 0 for i in vocab.char_id_list("washer"))

    def test_build_deterministic(self):
        assert Vocab.build(QUERIES) == Vocab.build(list(reversed(QUERIES)))

    def test_must_start_with_unk(self):
        with pytest.raises(ValueError):
            Vocab(("a", UNK), (UNK,))


class TestCharWordRepr:
    def test_zero_weights_give_zero_vector(self):
        params = tiny_params(seed=1)
        for cell in (params.char_fwd, params.char_bwd):
            cell.w_in[:] = 0.0
            cell.w_rec[:] = 0.0
            cell.bias[:] = 0.0
        assert np.allclose(char_word_repr("washer", params), 0.0)

    def test_deterministic(self):
        params = tiny_params(seed=2)
        a = char_word_repr("washer", params)
        b = char_word_repr("washer", params)
        assert np.array_equal(a, b)

    def test_scalar_lstm_hand_recurrence(self):
        # One character, one hidden unit: compare against the gate
        # equations executed step by step with plain floats.
        dims = ModelDims(word_emb=1, char_emb=1, char_hidden=1, word_hidden=1)
        vocab = Vocab((UNK, "a"), (UNK, "a"))
        params = init_params(dims, vocab, seed=0)
        w_in = np.array([[0.3], [-0.2], [0.5], [0.4]])
        w_rec = np.array([[0.1], [0.2], [-0.3], [0.6]])
        bias = np.array([0.05, -0.1, 0.2, 0.0])
        for cell in (params.char_fwd, params.char_bwd):
            cell.w_in[:] = w_in
            cell.w_rec[:] = w_rec
            cell.bias[:] = bias
        params.char_table[:] = np.array([[0.0], [0.7]])

        x = 0.7
        gate_i = sigmoid(0.3 * x + 0.05)
        gate_f = sigmoid(-0.2 * x - 0.1)
        cand = math.tanh(0.5 * x + 0.2)
        gate_o = sigmoid(0.4 * x + 0.0)
        c = gate_i * cand
        h = gate_o * math.tanh(c)

        vec = char_word_repr("a", params)
        assert vec == pytest.approx([h, h], abs=1e-12)

    def test_two_char_word_uses_recurrence(self):
        # Same cell as above across "aa": second step must feed h and c back.
        dims = ModelDims(word_emb=1, char_emb=1, char_hidden=1, word_hidden=1)
        vocab = Vocab((UNK, "a"), (UNK, "a"))
        params = init_params(dims, vocab, seed=0)
        w_in = np.array([[0.3], [-0.2], [0.5], [0.4]])
        w_rec = np.array([[0.1], [0.2], [-0.3], [0.6]])
        bias = np.array([0.05, -0.1, 0.2, 0.0])
        for cell in (params.char_fwd, params.char_bwd):
            cell.w_in[:] = w_in
            cell.w_rec[:] = w_rec
            cell.bias[:] = bias
        params.char_table[:] = np.array([[0.0], [0.7]])

        h = c = 0.0
        for _ in range(2):
            x = 0.7
            gate_i = sigmoid(0.3 * x + 0.1 * h + 0.05)
            gate_f = sigmoid(-0.2 * x + 0.2 * h - 0.1)
            cand = math.tanh(0.5 * x - 0.3 * h + 0.2)
            gate_o = sigmoid(0.4 * x + 0.6 * h + 0.0)
            c = gate_f * c + gate_i * cand
            h = gate_o * math.tanh(c)

        vec = char_word_repr("aa", params)
        assert vec == pytest.approx([h, h], abs=1e-12)


class TestEncodeQuery:
    def test_shape_contract(self):
        params = tiny_params()
        for tokens in (("lg",), ("lg", "washer"), ("a", "b", "c", "d")):
            assert encode_query(tokens, params).shape == (len(tokens), 5)

    def test_char_off_oov_tokens_indistinguishable(self):
        params = tiny_params(use_char_embedding=False)
        a = encode_query(("lg", "zzzzq"), params)
        b = encode_query(("lg", "qqqqz"), params)
        assert np.array_equal(a, b)

    def test_char_on_oov_tokens_differ(self):
        # OOV at the word level but built from in-vocab characters, so
        # the char path is what tells them apart.
        params = tiny_params(use_char_embedding=True)
        a = encode_query(("lg", "sash"), params)
        b = encode_query(("lg", "hsas"), params)
        assert not np.array_equal(a, b)

    def test_scalar_gru_hand_recurrence(self):
        # L=1, char features off, one hidden unit per direction: the
        # emission row must equal the hand-executed GRU + projection.
        dims = ModelDims(word_emb=2, char_emb=1, char_hidden=1, word_hidden=1)
        vocab = Vocab((UNK, "w"), (UNK, "w"))
        params = init_params(dims, vocab, seed=0, use_char_embedding=False)
        # input width = word_emb + 2*char_hidden = 4; char slice is zeros
        w_in = np.array([
            [0.2, -0.1, 9.0, 9.0],   # r row; 9s hit the zero char slice
            [0.4, 0.3, 9.0, 9.0],    # z row
            [-0.5, 0.6, 9.0, 9.0],   # n row
        ])
        w_rec = np.array([[0.7], [-0.2], [0.3]])
        bias = np.array([0.1, -0.05, 0.2])
        for cell in (params.gru_fwd, params.gru_bwd):
            cell.w_in[:] = w_in
            cell.w_rec[:] = w_rec
            cell.bias[:] = bias
        params.word_table[vocab.word_id("w")] = [0.5, -0.4]
        params.proj_w[:] = 0.0
        params.proj_w[:, 0] = [1.0, 2.0, 3.0, 4.0, 5.0]
        params.proj_w[:, 1] = [-1.0, -2.0, -3.0, -4.0, -5.0]
        params.proj_b[:] = 0.25

        x = (0.5, -0.4)
        pre_r = 0.2 * x[0] - 0.1 * x[1] + 0.1
        pre_z = 0.4 * x[0] + 0.3 * x[1] - 0.05
        pre_n = -0.5 * x[0] + 0.6 * x[1] + 0.2  # h_prev = 0, so no w_rec term
        gate_z = sigmoid(pre_z)
        h = (1.0 - gate_z) * math.tanh(pre_n)  # h = z*h_prev + (1-z)*n

        expected = np.array([1, 2, 3, 4, 5]) * h + np.array([-1, -2, -3, -4, -5]) * h + 0.25
        emissions = encode_query(("w",), params)
        assert emissions[0] == pytest.approx(expected, abs=1e-12)


class TestLossGrads:
    def test_repeated_query_same_mean_loss(self):
        params = tiny_params(seed=4)
        one, _ = model_loss_grads([QUERIES[0]], params)
        two, _ = model_loss_grads([QUERIES[0], QUERIES[0]], params)
        assert one == pytest.approx(two, rel=1e-12)

    def test_cross_entropy_uniform_single_token(self):
        params = tiny_params(seed=5, use_crf=False)
        params.proj_w[:] = 0.0
        params.proj_b[:] = 0.0
        loss, _ = model_loss_grads(
            [TaggedQuery(("lg",), ("B-BRD",), Source.GOLDEN)], params
        )
        assert loss == pytest.approx(math.log(5), abs=1e-12)

    @pytest.mark.parametrize("use_char", [True, False])
    @pytest.mark.parametrize("use_crf", [True, False])
    def test_finite_differences_every_parameter(self, use_char, use_crf):
        params = tiny_params(seed=6, use_char_embedding=use_char, use_crf=use_crf)
        _, grads = model_loss_grads(QUERIES, params)
        step = 1e-5
        worst = 0.0
        for name, arr in named_arrays(params):
            grad = grads[name]
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + step
                up, _ = model_loss_grads(QUERIES, params)
                arr[idx] = orig - step
                down, _ = model_loss_grads(QUERIES, params)
                arr[idx] = orig
                approx = (up - down) / (2 * step)
                denom = max(1e-6, abs(approx), abs(grad[idx]))
                worst = max(worst, abs(approx - grad[idx]) / denom)
        assert worst < 1e-3

    def test_dropout_needs_rng(self):
        with pytest.raises(ValueError):
            model_loss_grads(QUERIES, tiny_params(), dropout=0.5)

    def test_dropout_deterministic_given_rng_seed(self):
        params = tiny_params(seed=7)
        l1, _ = model_loss_grads(QUERIES, params, dropout=0.3, rng=np.random.default_rng(1))
        l2, _ = model_loss_grads(QUERIES, params, dropout=0.3, rng=np.random.default_rng(1))
        assert l1 == l2


class TestSgdStep:
    def test_zero_grads_unchanged(self):
        params = tiny_params(seed=8)
        out = sgd_step(params, zero_grads(params), lr=0.1, clip=5.0)
        for (_, before), (_, after) in zip(named_arrays(params), named_arrays(out)):
            assert np.array_equal(before, after)

    def test_plain_arithmetic(self):
        params = tiny_params(seed=9)
        grads = zero_grads(params)
        grads["proj_b"][0] = 0.5
        out = sgd_step(params, grads, lr=0.1, clip=math.inf)
        assert out.proj_b[0] == pytest.approx(params.proj_b[0] - 0.05, abs=1e-15)

    def test_norm_clipping_scales_globally(self):
        params = tiny_params(seed=10)
        grads = zero_grads(params)
        grads["proj_b"][:] = [6.0, 8.0, 0.0, 0.0, 0.0]  # global norm 10
        out = sgd_step(params, grads, lr=1.0, clip=1.0)
        delta = params.proj_b - out.proj_b
        assert delta == pytest.approx([0.6, 0.8, 0.0, 0.0, 0.0], abs=1e-12)

    def test_input_params_not_mutated(self):
        params = tiny_params(seed=11)
        before = params.proj_w.copy()
        grads = zero_grads(params)
        grads["proj_w"][:] = 1.0
        sgd_step(params, grads, lr=0.1, clip=5.0)
        assert np.array_equal(params.proj_w, before)

    def test_non_finite_gradient_names_block(self):
        params = tiny_params(seed=12)
        grads = zero_grads(params)
        grads["gru_fwd.w_rec"][0, 0] = math.nan
        with pytest.raises(ValueError, match="gru_fwd.w_rec"):
            sgd_step(params, grads, lr=0.1, clip=5.0)


class TestInitParams:
    def test_same_seed_bit_identical(self):
        a = tiny_params(seed=13)
        b = tiny_params(seed=13)
        for (_, x), (_, y) in zip(named_arrays(a), named_arrays(b)):
            assert np.array_equal(x, y)

    def test_different_seed_differs(self):
        a = tiny_params(seed=13)
        b = tiny_params(seed=14)
        assert not np.array_equal(a.proj_w, b.proj_w)

    def test_pretrained_rows_copied_exactly(self):
        vocab = Vocab.build(QUERIES)
        vec = np.array([0.25, -0.5, 0.125])
        params = init_params(TINY, vocab, pretrained={"washer": vec}, seed=0)
        assert np.array_equal(params.word_table[vocab.word_id("washer")], vec)

    def test_pretrained_unknown_words_ignored(self):
        vocab = Vocab.build(QUERIES)
        with_extra = init_params(TINY, vocab, pretrained={"notinvocab": np.ones(3)}, seed=0)
        without = init_params(TINY, vocab, seed=0)
        assert np.array_equal(with_extra.word_table, without.word_table)

    def test_pretrained_wrong_width_rejected(self):
        vocab = Vocab.build(QUERIES)
        with pytest.raises(ValueError, match="width"):
            init_params(TINY, vocab, pretrained={"washer": np.ones(4)}, seed=0)

    def test_transitions_zero_with_bio_mask(self):
        params = tiny_params(seed=15)
        assert np.array_equal(params.trans.trans, np.zeros((5, 5)))
        assert not params.trans.mask.trans[0, 2]  # O -> I-BRD forbidden

    def test_ablation_drops_exactly_char_blocks(self):
        on = tiny_params(seed=16, use_char_embedding=True)
        off = tiny_params(seed=16, use_char_embedding=False)
        char_sizes = on.char_table.size + sum(
            cell.w_in.size + cell.w_rec.size + cell.bias.size
            for cell in (on.char_fwd, on.char_bwd)
        )
        assert param_count(on) - param_count(off) == char_sizes
