import numpy as np
import pytest

from gradcheck import TOLERANCE, jitter_params, numerical_grad, rel_err
from sherlock.errors import ConfigError, DataError
from sherlock.layers import Mode
from sherlock.model import (
    HEAD_NAMES,
    Hyperparams,
    forward,
    init_model,
    loss_and_grads,
    predict,
    vulnerable_scores,
)
from sherlock.tokenizer import EncodedSample, build_vocabulary


def tiny_hp(**overrides):
    base = dict(vocab_size=8, max_len=12, embed_dim=5, conv_filters=4,
                kernel_size=3, dense1=6, dense2=4)
    base.update(overrides)
    return Hyperparams(**base)


def random_sample(hp, rng):
    return EncodedSample(
        ids=rng.integers(0, hp.vocab_size, size=hp.max_len),
        labels=rng.integers(0, 2, size=hp.heads),
    )


class TestShapes:
    def test_parameter_count_default_architecture(self):
        hp = Hyperparams(vocab_size=50)
        model = init_model(hp, seed=0)
        assert model.param_count(include_embedding=False) == 94_458
        assert model.param_count() == 50 * 13 + 94_458

    def test_conv_block_parameter_count(self):
        hp = Hyperparams(vocab_size=50)
        model = init_model(hp, seed=0)
        assert model.conv_w.size + model.conv_b.size == 60_416

    def test_invalid_vocab_size(self):
        with pytest.raises(ConfigError):
            init_model(Hyperparams(vocab_size=1), seed=0)

    def test_max_len_must_cover_kernel(self):
        with pytest.raises(ConfigError):
            init_model(tiny_hp(max_len=2, kernel_size=3), seed=0)


class TestInit:
    def test_same_seed_bit_identical(self):
        a = init_model(tiny_hp(), seed=42)
        b = init_model(tiny_hp(), seed=42)
        for (_, x), (_, y) in zip(a.named_arrays(), b.named_arrays()):
            assert np.array_equal(x, y)

    def test_different_seeds_differ(self):
        a = init_model(tiny_hp(), seed=1)
        b = init_model(tiny_hp(), seed=2)
        assert not np.array_equal(a.conv_w, b.conv_w)

    def test_biases_zero(self):
        model = init_model(tiny_hp(), seed=3)
        for name, arr in model.named_arrays():
            if name.endswith("_b"):
                assert np.count_nonzero(arr) == 0

    def test_dense1_fan_bound(self):
        model = init_model(Hyperparams(vocab_size=50), seed=0)
        bound = np.sqrt(6.0 / (512 + 64))
        assert bound == pytest.approx(0.1021, abs=5e-5)
        assert np.abs(model.dense1_w).max() <= bound
        assert np.abs(model.dense1_w).max() > 0.9 * bound  # actually fills the range


class TestForward:
    def test_heads_are_probability_pairs(self):
        hp = tiny_hp()
        model = init_model(hp, seed=0)
        rng = np.random.default_rng(1)
        probs = forward(model, rng.integers(0, hp.vocab_size, hp.max_len))
        assert len(probs) == 5
        for pair in probs:
            assert pair.shape == (2,)
            assert (pair >= 0).all()
            assert abs(pair.sum() - 1.0) < 1e-9

    def test_all_padding_deterministic(self):
        hp = tiny_hp()
        model = init_model(hp, seed=0)
        ids = np.zeros(hp.max_len, dtype=np.int64)
        first = forward(model, ids)
        second = forward(model, ids.copy())
        for a, b in zip(first, second):
            assert np.array_equal(a, b)

    def test_zeroed_conv_and_heads_give_coin_flips(self):
        hp = tiny_hp()
        model = init_model(hp, seed=0)
        model.conv_w[:] = 0.0
        for w in model.head_w:
            w[:] = 0.0
        probs = forward(model, np.zeros(hp.max_len, dtype=np.int64))
        for pair in probs:
            assert np.allclose(pair, [0.5, 0.5], atol=1e-12)


class TestLoss:
    def test_uniform_heads_loss_is_five_ln_two(self):
        hp = tiny_hp(dropout_rate=0.0)
        model = init_model(hp, seed=0)
        model.conv_w[:] = 0.0
        for w in model.head_w:
            w[:] = 0.0
        rng = np.random.default_rng(0)
        for _ in range(3):
            sample = random_sample(hp, rng)
            loss, _ = loss_and_grads(model, [sample])
            assert loss == pytest.approx(5 * np.log(2), abs=1e-12)

    def test_duplicated_entry_keeps_mean(self):
        hp = tiny_hp(dropout_rate=0.0)
        model = init_model(hp, seed=1)
        sample = random_sample(hp, np.random.default_rng(2))
        single, _ = loss_and_grads(model, [sample])
        doubled, _ = loss_and_grads(model, [sample, sample])
        assert doubled == pytest.approx(single, abs=1e-12)

    def test_batch_order_invariance(self):
        # dropout off so the only ordering effect is the mean reduction
        hp = tiny_hp(dropout_rate=0.0)
        model = init_model(hp, seed=1)
        rng = np.random.default_rng(3)
        batch = [random_sample(hp, rng) for _ in range(6)]
        loss_fwd, _ = loss_and_grads(model, batch)
        loss_rev, _ = loss_and_grads(model, batch[::-1])
        assert loss_rev == pytest.approx(loss_fwd, abs=1e-12)

    def test_empty_batch_rejected(self):
        with pytest.raises(DataError):
            loss_and_grads(init_model(tiny_hp(), seed=0), [])

    def test_uniform_class_weights_match_unweighted(self):
        hp = tiny_hp(dropout_rate=0.0)
        model = init_model(hp, seed=4)
        batch = [random_sample(hp, np.random.default_rng(5)) for _ in range(2)]
        plain, _ = loss_and_grads(model, batch)
        weighted, _ = loss_and_grads(model, batch, head_class_weights=np.ones((5, 2)))
        assert weighted == pytest.approx(plain, abs=1e-12)

    def test_bad_weight_shape_rejected(self):
        hp = tiny_hp()
        model = init_model(hp, seed=0)
        sample = random_sample(hp, np.random.default_rng(0))
        with pytest.raises(ConfigError):
            loss_and_grads(model, [sample], np.random.default_rng(0),
                           head_class_weights=np.ones((5, 3)))

    def test_full_model_gradient_spot_check(self):
        hp = tiny_hp(dropout_rate=0.5)
        model = init_model(hp, seed=6)
        rng = np.random.default_rng(7)
        jitter_params(model, rng)
        batch = [random_sample(hp, rng) for _ in range(2)]

        def loss_only():
            # same dropout masks every call: the generator is re-seeded
            loss, _ = loss_and_grads(model, batch, np.random.default_rng(123))
            return loss

        _, grads = loss_and_grads(model, batch, np.random.default_rng(123))
        for name, arr in model.named_arrays():
            numeric = numerical_grad(loss_only, arr)
            assert rel_err(grads[name], numeric) < TOLERANCE, name


class TestPredict:
    def test_empty_source(self, toy_run):
        result = predict(toy_run.model, "", toy_run.vocab)
        assert result.token_count == 0
        assert set(result.probabilities) == set(HEAD_NAMES)
        for p in result.probabilities.values():
            assert 0.0 <= p <= 1.0

    def test_deterministic(self, toy_run):
        code = "int f(int a) { return a * 2; }"
        first = predict(toy_run.model, code, toy_run.vocab)
        second = predict(toy_run.model, code, toy_run.vocab)
        assert first == second

    def test_strcpy_flags_cwe120(self, toy_run):
        from conftest import STRCPY_FIXTURE
        result = predict(toy_run.model, STRCPY_FIXTURE, toy_run.vocab)
        assert result.probabilities["CWE-120"] > 0.9

    def test_scores_match_forward(self, toy_run):
        sample = toy_run.samples[0]
        probs = forward(toy_run.model, sample.ids, Mode.INFER)
        scores = vulnerable_scores(toy_run.model, sample.ids)
        assert np.allclose(scores, [p[1] for p in probs])
