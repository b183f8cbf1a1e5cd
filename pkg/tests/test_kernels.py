import numpy as np
import pytest

from crf_oracles import random_instance
from snacstag.tagger import _kernels

numba_only = pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba path disabled")


@pytest.fixture(scope="module")
def fast():
    return dict(zip(("emissions", "forward_backward", "viterbi", "scatter_grad"),
                    _kernels._build_numba()))


@numba_only
def test_parity(fast):
    rng = np.random.default_rng(0)
    for _ in range(100):
        model, fs, _ = random_instance(rng, 5, int(rng.integers(1, 12)), n_features=6)
        args = (model.W, fs.ids, fs.vals, fs.offsets)
        e_np = _kernels.emissions_np(*args)
        np.testing.assert_allclose(fast["emissions"](*args), e_np, atol=1e-12)
        trans, start, end = model.effective_transitions()
        z1, m1, p1 = _kernels.forward_backward_np(e_np, trans, start, end)
        z2, m2, p2 = fast["forward_backward"](e_np, trans, start, end)
        assert z1 == pytest.approx(z2, abs=1e-10)
        np.testing.assert_allclose(m1, m2, atol=1e-10)
        np.testing.assert_allclose(p1, p2, atol=1e-10)
        v1, s1 = _kernels.viterbi_np(e_np, trans, start, end)
        v2, s2 = fast["viterbi"](e_np, trans, start, end)
        assert np.array_equal(v1, v2) and s1 == pytest.approx(s2, abs=1e-10)
        coef = rng.normal(size=e_np.shape)
        g1, g2 = np.zeros_like(model.W), np.zeros_like(model.W)
        _kernels.scatter_grad_np(g1, fs.ids, fs.vals, fs.offsets, coef)
        fast["scatter_grad"](g2, fs.ids, fs.vals, fs.offsets, coef)
        np.testing.assert_allclose(g1, g2, atol=1e-12)


def test_viterbi_ties_take_lowest_index():
    emit = np.zeros((3, 3))
    trans = np.zeros((3, 3))
    path, score = _kernels.viterbi_np(emit, trans, np.zeros(3), np.zeros(3))
    assert list(path) == [0, 0, 0] and score == 0.0


@numba_only
@pytest.mark.parametrize("scale", [40.0, 400.0])
def test_wide_weights(fast, scale):
    # 40 stays on the scaled path, 400 takes the log-space fallback
    rng = np.random.default_rng(1)
    for _ in range(20):
        model, fs, _ = random_instance(rng, 5, 8, scale=scale)
        emit = model.emissions(fs)
        trans, start, end = model.effective_transitions()
        z1, m1, p1 = _kernels.forward_backward_np(emit, trans, start, end)
        z2, m2, p2 = fast["forward_backward"](emit, trans, start, end)
        assert z1 == pytest.approx(z2, rel=1e-12)
        np.testing.assert_allclose(m1, m2, atol=1e-9)
        np.testing.assert_allclose(p1, p2, atol=1e-9)
