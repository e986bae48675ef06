import numpy as np
import pytest

from ctxbias import corpus, jointdecode, simulate
from ctxbias.smoothing import SmoothingParams


def _vocab(n_chars: int = 20, seed: int = 3) -> corpus.Vocabulary:
    return corpus.Vocabulary.build([chr(0x4E00 + i) for i in range(n_chars)], seed=seed)


def _clean_case(spans=((1, 3, 1), (4, 6, 2))):
    v = _vocab()
    bl = corpus.make_biasing_list([(2, 3), (4, 5), (6, 7, 8)], v)
    tokens = [10, 11, 12, 13, 14, 15, 16]
    for start, end, m in spans:
        tokens[start:end] = bl.phrases[m].tokens
    utt = corpus.Utterance("u0", tuple(tokens), 2.0, tuple(corpus.Span(*s) for s in spans))
    labels = simulate.make_labels(utt, bl)
    bundle = simulate.synth_bundle(utt, bl, labels, simulate.NoiseSpec(seed=7), v)
    phi = corpus.build_phi(bl, v)
    return v, bl, utt, bundle, phi


def test_joint_intersection_zero_list_scores_are_uniform():
    v, bl, utt, bundle, phi = _clean_case()
    u, vsize = bundle.q_tok.shape
    out = jointdecode.joint_intersection(
        np.zeros(u), bundle.q_phr, bundle.q_tok, phi
    )
    assert np.allclose(out, 1.0 / vsize, atol=1e-12)
    empty = corpus.PhiMask(matrix=np.zeros_like(phi.matrix))
    out = jointdecode.joint_intersection(np.ones(u), bundle.q_phr, bundle.q_tok, empty)
    assert np.allclose(out, 1.0 / vsize, atol=1e-12)


def test_joint_intersection_points_at_phrase_tokens():
    v, bl, utt, bundle, phi = _clean_case()
    out = jointdecode.joint_intersection(
        np.ones(len(utt.tokens)), bundle.q_phr, bundle.q_tok, phi
    )
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-9)
    for u in (1, 2):
        assert np.argmax(out[u]) in bl.phrases[1].tokens
    with pytest.raises(ValueError):
        jointdecode.joint_intersection(np.ones(3), bundle.q_phr, bundle.q_tok, phi)


def test_interpolate_endpoints_and_rows():
    rng = np.random.default_rng(0)
    p = rng.dirichlet(np.ones(6), size=4)
    q = rng.dirichlet(np.ones(6), size=4)
    assert np.allclose(jointdecode.interpolate(p, q, np.zeros(4)), p)
    assert np.allclose(jointdecode.interpolate(p, q, np.ones(4)), q)
    half = jointdecode.interpolate(
        np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), np.array([0.5])
    )
    assert np.allclose(half, [[0.5, 0.5]])
    w = rng.uniform(size=4)
    mixed = jointdecode.interpolate(p, q, w)
    assert np.allclose(mixed.sum(axis=1), 1.0, atol=1e-12)


def test_greedy_decode():
    one_hot = np.eye(5)[[3, 0, 4]]
    assert jointdecode.greedy_decode(one_hot) == (3, 0, 4)
    assert jointdecode.greedy_decode(np.full((2, 7), 1.0 / 7)) == (0, 0)
    rng = np.random.default_rng(1)
    probs = rng.uniform(size=(5, 7))
    got = jointdecode.greedy_decode(probs)
    for u in range(5):
        assert got[u] == max(range(7), key=lambda t: (probs[u, t], -t))


def test_count_phrases():
    v = _vocab()
    bl = corpus.make_biasing_list([(2, 3), (2, 3, 2)], v)
    assert jointdecode.count_phrases((9, 2, 3, 9), bl) == 1
    assert jointdecode.count_phrases((), bl) == 0
    # longest match consumes first: (2,3,2,3) -> phrase (2,3,2), then lone 3
    assert jointdecode.count_phrases((2, 3, 2, 3), bl) == 1


def test_post_process_requires_strict_improvement():
    v = _vocab()
    bl = corpus.make_biasing_list([(2, 3)], v)
    with_phrase = (2, 3, 9)
    without = (9, 9, 9)
    assert jointdecode.post_process(with_phrase, without, bl) == with_phrase
    assert jointdecode.post_process((2, 3, 8), (2, 3, 9), bl) == (2, 3, 9)
    assert jointdecode.post_process(without, without, bl) == without


def test_decode_zero_noise_recovers_reference():
    v, bl, utt, bundle, phi = _clean_case()
    res = jointdecode.decode_utterance(bundle, bl, phi, SmoothingParams())
    assert res.hyp_bb == utt.tokens
    assert res.hyp_casr == utt.tokens
    assert res.hyp_final == utt.tokens
    assert np.allclose(res.q_bias.sum(axis=1), 1.0, atol=1e-9)
    assert res.wall_seconds >= 0.0


def test_decode_without_real_phrases_falls_back():
    v, bl, utt, bundle, phi = _clean_case(spans=())
    only_nb = bl.sublist([0])
    scorer = simulate.SyntheticScorer(utt, only_nb, v, simulate.NoiseSpec(seed=7))
    nb_bundle = scorer.bundle()
    nb_phi = corpus.build_phi(only_nb, v)
    res = jointdecode.decode_utterance(nb_bundle, only_nb, nb_phi, SmoothingParams())
    assert res.hyp_final == res.hyp_bb
    assert np.allclose(res.q_bias, 1.0 / v.size)


def test_decode_corrects_homophone_confusions():
    # backbone mishears one step of each name; the scorers know better
    v, bl, utt, bundle, phi = _clean_case(spans=((1, 3, 1), (4, 6, 2)))
    p_bb = bundle.p_bb.copy()
    refs = np.asarray(utt.tokens)
    for step in (2, 5):
        partner = v.confusable[refs[step]]
        p_bb[step, refs[step]], p_bb[step, partner] = (
            p_bb[step, partner],
            p_bb[step, refs[step]],
        )
    confused = simulate.CorrelationBundle(
        q_list=bundle.q_list, q_phr=bundle.q_phr, q_tok=bundle.q_tok, p_bb=p_bb
    )
    res = jointdecode.decode_utterance(confused, bl, phi, SmoothingParams())
    assert res.hyp_bb != utt.tokens  # both names are broken
    assert res.hyp_casr == utt.tokens
    assert res.hyp_final == utt.tokens


def test_zero_list_correlation_leaves_backbone_untouched():
    v, bl, utt, _, phi = _clean_case(spans=())
    labels = simulate.make_labels(utt, bl)
    bundle = simulate.synth_bundle(utt, bl, labels, simulate.NoiseSpec(seed=3), v)
    assert bundle.q_list.sum() == 0.0
    res = jointdecode.decode_utterance(bundle, bl, phi, SmoothingParams())
    assert res.hyp_casr == res.hyp_bb


def test_post_process_never_loses_phrases():
    rng = np.random.default_rng(2)
    v = _vocab()
    bl = corpus.make_biasing_list([(2, 3), (4, 5)], v)
    for _ in range(50):
        hyp_a = tuple(rng.integers(2, 10, size=6).tolist())
        hyp_b = tuple(rng.integers(2, 10, size=6).tolist())
        final = jointdecode.post_process(hyp_a, hyp_b, bl)
        assert jointdecode.count_phrases(final, bl) >= jointdecode.count_phrases(hyp_b, bl)


def test_phrase_permutation_leaves_q_bias_identical():
    v, bl, utt, bundle, phi = _clean_case()
    rng = np.random.default_rng(4)
    u = len(utt.tokens)
    q_slist = rng.uniform(size=u)
    perm = rng.permutation(bl.size)
    permuted_phi = corpus.PhiMask(matrix=phi.matrix[perm].copy())
    a = jointdecode.joint_intersection(q_slist, bundle.q_phr, bundle.q_tok, phi)
    b = jointdecode.joint_intersection(
        q_slist, bundle.q_phr[:, perm], bundle.q_tok, permuted_phi
    )
    assert np.array_equal(a, b)


def test_full_bias_follows_q_bias_argmax():
    v, bl, utt, bundle, phi = _clean_case()
    u = len(utt.tokens)
    q_bias = jointdecode.joint_intersection(
        np.ones(u), bundle.q_phr, bundle.q_tok, phi
    )
    casr = jointdecode.interpolate(bundle.p_bb, q_bias, np.ones(u))
    assert jointdecode.greedy_decode(casr) == jointdecode.greedy_decode(q_bias)


def test_attention_stub_decodes_clean_input():
    v, bl, utt, bundle, phi = _clean_case()
    res = jointdecode.attention_decode(bundle, bl, phi)
    assert res.hyp_bb == utt.tokens
    assert res.hyp_final == utt.tokens
    assert np.allclose(res.q_bias.sum(axis=1), 1.0, atol=1e-9)
