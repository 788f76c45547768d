import json

import numpy as np
import pytest

from sherlock.dataset import CorpusRecord
from sherlock.errors import ConfigError, DataError
from sherlock.model import Hyperparams, evaluate_loss, init_model, loss_and_grads
from sherlock.optimizer import AdamState, adam_step
from sherlock.tokenizer import EncodedSample, build_vocabulary, lex
from sherlock.training import (
    HOLDOUT,
    KFOLD,
    SplitSpec,
    TrainConfig,
    encode_corpus,
    split,
    train,
)


def labelled(n, rng, heads=5):
    """Minimal objects with a labels attribute, enough for split()."""
    return [
        EncodedSample(ids=np.zeros(4, dtype=np.int64),
                      labels=rng.integers(0, 2, heads))
        for _ in range(n)
    ]


def tiny_hp(vocab_size, **overrides):
    base = dict(vocab_size=vocab_size, max_len=16, embed_dim=4,
                conv_filters=4, kernel_size=3, dense1=5, dense2=4)
    base.update(overrides)
    return Hyperparams(**base)


def tiny_dataset(n=40, seed=0):
    rng = np.random.default_rng(seed)
    records = [
        CorpusRecord(code=f"int f(int a) {{ return a + {i}; }}",
                     labels=tuple(int(v) for v in rng.integers(0, 2, 5)))
        for i in range(n)
    ]
    vocab = build_vocabulary((lex(r.code) for r in records), top_k=32)
    hp = tiny_hp(vocab.size)
    return encode_corpus(records, vocab, hp.max_len), hp


class TestSplitHoldout:
    def test_ten_samples_split_8_1_1(self):
        parts = split(labelled(10, np.random.default_rng(0)), SplitSpec(seed=1))
        assert (len(parts.train), len(parts.val), len(parts.test)) == (8, 1, 1)

    def test_disjoint_and_exhaustive(self):
        rng = np.random.default_rng(1)
        for seed in range(10):
            n = int(rng.integers(3, 120))
            parts = split(labelled(n, rng), SplitSpec(seed=seed))
            union = np.concatenate([parts.train, parts.val, parts.test])
            assert len(union) == n
            assert len(set(union.tolist())) == n

    def test_same_seed_same_partitioning(self):
        samples = labelled(50, np.random.default_rng(2))
        a = split(samples, SplitSpec(seed=9))
        b = split(samples, SplitSpec(seed=9))
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.val, b.val)
        assert np.array_equal(a.test, b.test)

    def test_different_seeds_differ(self):
        samples = labelled(60, np.random.default_rng(3))
        a = split(samples, SplitSpec(seed=0))
        b = split(samples, SplitSpec(seed=1))
        assert not np.array_equal(a.train, b.train)

    def test_stratification_keeps_positive_rates(self):
        # one head positive 30% of the time: each partition must stay
        # within +-20% relative of that rate
        rng = np.random.default_rng(4)
        samples = []
        for i in range(500):
            labels = np.zeros(5, dtype=np.int64)
            labels[0] = 1 if i < 150 else 0
            samples.append(EncodedSample(ids=np.zeros(4, dtype=np.int64), labels=labels))
        rng.shuffle(samples)
        parts = split(samples, SplitSpec(seed=5))
        for idx in (parts.train, parts.val, parts.test):
            rate = np.mean([samples[i].labels[0] for i in idx])
            assert 0.3 * 0.8 <= rate <= 0.3 * 1.2

    def test_too_small_dataset(self):
        with pytest.raises(DataError):
            split(labelled(2, np.random.default_rng(0)), SplitSpec())

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            split(labelled(10, np.random.default_rng(0)),
                  SplitSpec(train_frac=0.5, val_frac=0.1, test_frac=0.1))


class TestSplitKFold:
    def test_five_folds_of_two(self):
        parts = split(labelled(10, np.random.default_rng(0)),
                      SplitSpec(mode=KFOLD, k=5, seed=0))
        assert [len(f) for f in parts.folds] == [2, 2, 2, 2, 2]
        union = np.concatenate(parts.folds)
        assert sorted(union.tolist()) == list(range(10))

    def test_uneven_fold_sizes(self):
        parts = split(labelled(11, np.random.default_rng(0)),
                      SplitSpec(mode=KFOLD, k=5, seed=0))
        assert sorted(len(f) for f in parts.folds) == [2, 2, 2, 2, 3]

    def test_k_below_two_rejected(self):
        with pytest.raises(ConfigError):
            split(labelled(10, np.random.default_rng(0)), SplitSpec(mode=KFOLD, k=1))

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError):
            split(labelled(10, np.random.default_rng(0)), SplitSpec(mode="bootstrap"))


class TestTrain:
    def test_single_step_equivalence(self):
        # one epoch, one batch: train() must equal a manual init + one adam step
        samples, hp = tiny_dataset(n=20)
        config = TrainConfig(hp=hp, epochs=1, batch_size=64, seed=13)
        spec = SplitSpec(seed=21)
        model, history = train(samples, config, spec)

        parts = split(samples, spec)
        train_set = [samples[i] for i in parts.train]
        init_seq, loop_seq = np.random.SeedSequence(config.seed).spawn(2)
        manual = init_model(hp, np.random.default_rng(init_seq))
        state = AdamState(manual.as_dict())
        rng = np.random.default_rng(loop_seq)
        order = np.arange(len(train_set))
        rng.shuffle(order)
        batch = [train_set[i] for i in order]
        loss, grads = loss_and_grads(manual, batch, rng)
        adam_step(manual.as_dict(), grads, state, hp.learning_rate)

        assert history.epochs[0].train_loss == pytest.approx(loss, abs=1e-12)
        for (name, ours), (_, theirs) in zip(model.named_arrays(), manual.named_arrays()):
            assert np.array_equal(ours, theirs), name

    def test_deterministic_replay(self):
        samples, hp = tiny_dataset(n=30, seed=5)
        config = TrainConfig(hp=hp, epochs=2, batch_size=8, seed=3)
        spec = SplitSpec(seed=4)
        model_a, hist_a = train(samples, config, spec)
        model_b, hist_b = train(samples, config, spec)
        for (name, a), (_, b) in zip(model_a.named_arrays(), model_b.named_arrays()):
            assert np.array_equal(a, b), name
        assert [r.val_loss for r in hist_a.epochs] == [r.val_loss for r in hist_b.epochs]

    def test_returned_model_has_best_val_loss(self):
        samples, hp = tiny_dataset(n=30, seed=6)
        config = TrainConfig(hp=hp, epochs=3, batch_size=8, seed=0)
        spec = SplitSpec(seed=1)
        model, history = train(samples, config, spec)
        parts = split(samples, spec)
        val_set = [samples[i] for i in parts.val]
        returned_loss = evaluate_loss(model, val_set)
        best_logged = min(r.val_loss for r in history.epochs)
        assert returned_loss == pytest.approx(best_logged, abs=1e-12)
        assert all(returned_loss <= r.val_loss + 1e-12 for r in history.epochs)

    def test_kfold_histories_and_mean_metrics(self):
        samples, hp = tiny_dataset(n=25, seed=7)
        config = TrainConfig(hp=hp, epochs=1, batch_size=8, seed=2)
        model, history = train(samples, config, SplitSpec(mode=KFOLD, k=3, seed=2))
        assert model is not None
        assert len(history.folds) == 3
        assert history.mean_val_metrics is not None
        assert len(history.mean_val_metrics) == 5
        row = history.mean_val_metrics[0]
        assert set(row) == {"cwe", "accuracy", "precision", "recall", "f1", "auc"}

    def test_history_jsonl_export(self, tmp_path):
        samples, hp = tiny_dataset(n=20, seed=8)
        config = TrainConfig(hp=hp, epochs=2, batch_size=8, seed=0)
        _, history = train(samples, config, SplitSpec(seed=0))
        path = tmp_path / "history.ndjson"
        history.to_jsonl(path)
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(rows) == 2
        assert rows[0]["epoch"] == 1
        assert rows[0]["fold"] == 0
        assert len(rows[0]["heads"]) == 5

    def test_config_validation(self):
        samples, hp = tiny_dataset(n=10)
        with pytest.raises(ConfigError):
            train(samples, TrainConfig(hp=hp, epochs=0), SplitSpec())
        with pytest.raises(ConfigError):
            train(samples, TrainConfig(hp=hp, batch_size=0), SplitSpec())
