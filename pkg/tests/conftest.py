"""Shared fixtures: the scaled-down end-to-end training run used by the
acceptance, prediction and service tests."""

import time
from types import SimpleNamespace

import pytest

from sherlock import (
    Hyperparams,
    SplitSpec,
    TrainConfig,
    build_vocabulary,
    encode_corpus,
    evaluate_model,
    lex,
    split,
    toy_corpus,
    train,
)

TOY_SEED = 7
SPLIT_SEED = 11
TRAIN_SEED = 3

# A strcpy-bearing function the toy model must flag as CWE-120.
STRCPY_FIXTURE = "void copy_name(char *dst, char *src) { strcpy(dst, src); }"


def build_toy_run(n=2000, epochs=8):
    start = time.monotonic()
    corpus = toy_corpus(n=n, seed=TOY_SEED)
    vocab = build_vocabulary((lex(r.code) for r in corpus), top_k=256)
    hp = Hyperparams(vocab_size=vocab.size, max_len=160, conv_filters=32, kernel_size=9)
    samples = encode_corpus(corpus, vocab, hp.max_len)
    spec = SplitSpec(seed=SPLIT_SEED)
    config = TrainConfig(hp=hp, epochs=epochs, batch_size=64, seed=TRAIN_SEED)
    model, history = train(samples, config, spec)
    elapsed = time.monotonic() - start
    parts = split(samples, spec)
    test_set = [samples[i] for i in parts.test]
    return SimpleNamespace(
        corpus=corpus, vocab=vocab, hp=hp, samples=samples, spec=spec,
        config=config, model=model, history=history, parts=parts,
        test_set=test_set, test_report=evaluate_model(model, test_set),
        elapsed_seconds=elapsed,
    )


@pytest.fixture(scope="session")
def toy_run():
    return build_toy_run()
