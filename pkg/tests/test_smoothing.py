import numpy as np
import pytest

from ctxbias import smoothing
from ctxbias.smoothing import SmoothingParams


def test_triangular_preserves_constants():
    p = SmoothingParams(omega=0.6)
    q = np.full(7, 0.37)
    assert np.allclose(smoothing.triangular_smooth(q, p), q, atol=1e-12)
    assert np.allclose(smoothing.triangular_smooth(np.array([0.5]), p), [0.5])


def test_triangular_omega_one_is_identity():
    q = np.random.default_rng(0).uniform(size=9)
    assert np.allclose(smoothing.triangular_smooth(q, SmoothingParams(omega=1.0)), q)


def test_triangular_hand_value():
    got = smoothing.triangular_smooth([0.0, 1.0, 0.0], SmoothingParams(omega=0.6))
    assert np.allclose(got, [0.2, 0.6, 0.2], atol=1e-12)


def test_triangular_shift_equivariance_interior():
    rng = np.random.default_rng(1)
    q = rng.uniform(size=12)
    p = SmoothingParams(omega=0.6)
    shifted = np.roll(q, 3)
    a = smoothing.triangular_smooth(q, p)
    b = smoothing.triangular_smooth(shifted, p)
    assert np.allclose(np.roll(a, 3)[4:-4], b[4:-4], atol=1e-12)
    assert a.min() >= 0.0 and a.max() <= 1.0


def test_estimate_phrase_length():
    assert smoothing.estimate_phrase_length(np.zeros(6)) == 1
    q = np.zeros(8)
    q[0] = 2.4
    assert smoothing.estimate_phrase_length(q) == 2
    q[0] = 2.5
    assert smoothing.estimate_phrase_length(q) == 3  # half rounds up
    assert smoothing.estimate_phrase_length(np.ones(4) * 5) == 4  # capped at U
    # clean 2-token span through the triangular kernel still estimates 2
    y = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
    q_s = smoothing.triangular_smooth(y, SmoothingParams(omega=0.6))
    assert smoothing.estimate_phrase_length(q_s) == 2


def test_locate_window():
    q = np.array([0.0, 1.0, 1.0, 0.0, 0.0])
    assert smoothing.locate_window(q, 2, 1) == 1
    for u in range(5):
        assert smoothing.locate_window(q, 1, u) == u
    uniform = np.ones(6)
    assert smoothing.locate_window(uniform, 3, 4) == 2  # ties go left
    with pytest.raises(ValueError):
        smoothing.locate_window(q, 6, 0)


def test_guided_smooth_window_one_is_tanh():
    rng = np.random.default_rng(2)
    q_phr = rng.uniform(size=(5, 4))
    q_list = rng.uniform(size=5)
    out = smoothing.guided_phrase_smooth(q_phr, q_list, np.full(5, 0.1))
    assert np.allclose(out, np.tanh(q_phr), atol=1e-12)


def test_guided_smooth_zero_input_stays_zero():
    out = smoothing.guided_phrase_smooth(
        np.zeros((6, 3)), np.zeros(6), np.zeros(6)
    )
    assert np.array_equal(out, np.zeros((6, 3)))


def _oracle_case():
    """Clean single-span instance: span at steps 3..4, gold phrase 1 of 3."""
    u, m = 8, 3
    q_list = np.zeros(u)
    q_list[3:5] = 1.0
    q_phr = np.zeros((u, m))
    q_phr[3:5, 1] = 1.0
    return q_list, q_phr


def test_guided_smooth_keeps_gold_argmax_on_clean_span():
    q_list, q_phr = _oracle_case()
    q_slist = smoothing.triangular_smooth(q_list, SmoothingParams(omega=0.6))
    out = smoothing.guided_phrase_smooth(q_phr, q_list, q_slist)
    assert out.shape == q_phr.shape
    for u in (3, 4):
        assert np.argmax(out[u]) == 1
        assert out[u, 1] >= np.tanh(1.0)
    assert out.min() >= 0.0 and out.max() < 1.0


def test_guided_smooth_sharpens_flat_scores():
    # margin growth regime: scores far from tanh saturation, so pooling a
    # window of L agreeing steps beats any single step
    q_list, q_phr = _oracle_case()
    q_phr = 0.3 * q_phr
    q_phr[:, 2] = 0.05  # faint competitor everywhere
    q_slist = smoothing.triangular_smooth(q_list, SmoothingParams(omega=0.6))
    out = smoothing.guided_phrase_smooth(q_phr, q_list, q_slist)
    for u in (3, 4):
        before = np.sort(q_phr[u])
        after = np.sort(out[u])
        margin_before = before[-1] - before[-2]
        margin_after = after[-1] - after[-2]
        assert margin_after >= margin_before


def test_smoothing_is_deterministic_and_length_preserving():
    rng = np.random.default_rng(3)
    q = rng.uniform(size=10)
    p = SmoothingParams(omega=0.6)
    a = smoothing.triangular_smooth(q, p)
    assert np.array_equal(a, smoothing.triangular_smooth(q, p))
    assert a.shape == q.shape
