import math

import numpy as np
import pytest

from crf_oracles import brute_argmax, brute_log_z, fd_gradient, random_instance
from snacstag.bio import is_valid
from snacstag.tagger import _kernels
from snacstag.tagger.crf import (
    CrfConfig,
    CrfError,
    CrfModel,
    FeatureSeq,
    crf_loglik_grad,
    train_crf,
)
from snacstag.evaluation import split_corpus
from synth import make_corpus


def test_zero_weights_single_token():
    for k in (2, 3, 5):
        labels = ["O", "I", "B-X", "B-Y", "B-Z"][:k]
        model = CrfModel.zeros(labels, ["f0"], CrfConfig(l2=0.0))
        fs = FeatureSeq.from_lists([[(0, 1.0)]])
        nll, _ = crf_loglik_grad(model, [(fs, np.array([0]))])
        # I cannot start a sequence, so k-1 labels are reachable
        assert nll == pytest.approx(math.log(k - 1), abs=1e-12)


def test_log_z_against_enumeration():
    rng = np.random.default_rng(0)
    for trial in range(50):
        model, fs, _ = random_instance(rng, int(rng.integers(2, 5)), int(rng.integers(1, 6)))
        trans, start, end = model.effective_transitions()
        log_z, marg, _ = _kernels.forward_backward(model.emissions(fs), trans, start, end)
        assert log_z == pytest.approx(brute_log_z(model, fs), abs=1e-9), trial
        assert np.allclose(marg.sum(axis=1), 1.0)


def test_gradient_against_finite_differences():
    rng = np.random.default_rng(1)
    for trial in range(20):
        model, fs, gold = random_instance(rng, int(rng.integers(2, 5)), int(rng.integers(1, 4)),
                                          n_features=3, l2=float(rng.choice([0.0, 0.1])))
        _, grad = crf_loglik_grad(model, [(fs, gold)])
        ref = fd_gradient(model, fs, gold)
        for got, want in zip((grad.W, grad.trans, grad.start, grad.end), ref):
            denom = np.maximum(np.maximum(np.abs(got), np.abs(want)), 1e-8)
            assert np.max(np.abs(got - want) / denom) <= 1e-4, trial


def test_masked_entries_have_zero_gradient():
    rng = np.random.default_rng(2)
    model, fs, gold = random_instance(rng, 4, 4, l2=0.5)
    _, grad = crf_loglik_grad(model, [(fs, gold)])
    assert np.all(grad.trans[~model.allowed] == 0.0)
    assert np.all(grad.start[~model.start_allowed] == 0.0)


def test_viterbi_against_enumeration():
    rng = np.random.default_rng(3)
    for trial in range(50):
        model, fs, _ = random_instance(rng, int(rng.integers(2, 6)), int(rng.integers(1, 7)))
        path, score = model.decode_ids(fs)
        want, best = brute_argmax(model, fs)
        assert score == pytest.approx(best, abs=1e-9), trial
        assert model.sequence_score(fs, path) == pytest.approx(best, abs=1e-9)


def test_viterbi_always_valid():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        model, fs, _ = random_instance(rng, 5, int(rng.integers(1, 9)), scale=3.0)
        model.trans[:] += rng.normal(0, 5, model.trans.shape)
        tags = model.viterbi_decode(fs).tags
        assert is_valid(tags)


def test_viterbi_invariances():
    rng = np.random.default_rng(5)
    model, fs, _ = random_instance(rng, 5, 6)
    path, _ = model.decode_ids(fs)
    scaled = CrfModel(model.labels, model.features, model.W * 3, model.trans * 3,
                      model.start * 3, model.end * 3)
    assert np.array_equal(scaled.decode_ids(fs)[0], path)
    trans, start, end = model.effective_transitions()
    emit = model.emissions(fs)
    shifted = emit + rng.normal(size=(len(fs), 1))
    assert np.array_equal(_kernels.viterbi(shifted, trans, start, end)[0], path)


def test_feature_outside_alphabet():
    model = CrfModel.zeros(["O", "I", "B-X"], ["f0"])
    with pytest.raises(CrfError, match="outside alphabet"):
        model.emissions(FeatureSeq.from_lists([[(3, 1.0)]]))


@pytest.fixture(scope="module")
def trained():
    corpus = make_corpus(80, seed=2)
    parts = split_corpus(corpus, seed=0).apply(corpus)
    history = []
    config = CrfConfig(epochs=30, learning_rate=0.01)
    model = train_crf(parts["train"], parts["dev"], config, history=history)
    return parts, config, model, history


def test_training_reduces_loss(trained):
    _, _, model, history = trained
    assert history[-1]["train_nll"] < history[0]["train_nll"]
    assert 1 <= model.meta["best_epoch"] <= 30


def test_training_is_deterministic(trained):
    parts, config, model, _ = trained
    again = train_crf(parts["train"], parts["dev"], config)
    assert again.to_bytes() == model.to_bytes()


def test_save_load_roundtrip(trained, tmp_path):
    parts, _, model, _ = trained
    path = tmp_path / "m.crf"
    model.save(path)
    back = CrfModel.load(path)
    assert back.to_bytes() == model.to_bytes()
    for sent in parts["test"]:
        assert back.tag(sent) == model.tag(sent)


def test_corrupt_model_file(tmp_path):
    path = tmp_path / "bad.crf"
    path.write_bytes(b"NOTACRF!" + b"\0" * 16)
    with pytest.raises(CrfError):
        CrfModel.load(path)


def test_default_lr_reduces_loss_on_ten_sentences():
    corpus = make_corpus(10, seed=9)
    history = []
    train_crf(corpus, None, CrfConfig(), history=history)
    assert len(history) == 30
    assert history[-1]["train_nll"] < history[0]["train_nll"]
