"""Joint intersection decoding and collaborative interpolation.

The three correlation levels multiply through the phrase-token containment
mask into a biased token distribution, which is interpolated with the
backbone per step by the (smoothed) list correlation. Greedy hypotheses are
extracted from both the backbone and the biased distributions, and a
phrase-count comparison decides which one to keep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .corpus import BiasingList, PhiMask, scan_occurrences
from .numeric import softmax
from .smoothing import SmoothingParams, guided_phrase_smooth, triangular_smooth


@dataclass(frozen=True, eq=False)
class DecodeResult:
    hyp_bb: tuple[int, ...]
    hyp_casr: tuple[int, ...]
    hyp_final: tuple[int, ...]
    q_bias: np.ndarray
    wall_seconds: float
    extras: dict | None = None


def joint_intersection(
    q_slist: np.ndarray, q_sphr: np.ndarray, q_tok: np.ndarray, phi: PhiMask
) -> np.ndarray:
    """Intersect the three correlation levels into a token distribution.

    Per (step, token): the best phrase containing that token contributes
    q_slist[u] * q_sphr[u, m] * q_tok[u, v]; tokens in no phrase score 0.
    Rows are normalized with a softmax, so an all-zero row comes out
    uniform.
    """
    q_slist = np.asarray(q_slist, dtype=float)
    q_sphr = np.asarray(q_sphr, dtype=float)
    q_tok = np.asarray(q_tok, dtype=float)
    m, v = phi.matrix.shape
    if q_sphr.shape != (q_slist.shape[0], m) or q_tok.shape != (q_slist.shape[0], v):
        raise ValueError("correlation shapes disagree with the mask")
    # correlations are nonnegative, so masking by multiplication and taking
    # the max over phrases equals the max over containing phrases, with
    # tokens in no phrase pinned at 0
    phrase_max = (q_sphr[:, :, None] * phi.dense[None, :, :]).max(axis=1)
    scores = q_slist[:, None] * phrase_max * q_tok
    return softmax(scores, axis=1)


def interpolate(p_bb: np.ndarray, q_bias: np.ndarray, q_slist: np.ndarray) -> np.ndarray:
    """Per-step convex mix of backbone and biased distributions."""
    w = np.asarray(q_slist, dtype=float)[:, None]
    return (1.0 - w) * p_bb + w * q_bias


def greedy_decode(probs: np.ndarray) -> tuple[int, ...]:
    """Row argmax; ties resolve to the smallest token index."""
    return tuple(int(t) for t in np.argmax(probs, axis=1))


def count_phrases(hyp, biasing_list: BiasingList) -> int:
    """Non-overlapping real-phrase occurrences in the hypothesis."""
    return len(scan_occurrences(hyp, biasing_list))


def post_process(hyp_casr, hyp_bb, biasing_list: BiasingList) -> tuple[int, ...]:
    """Keep the biased hypothesis only if it detects strictly more phrases.

    Guards against over-biasing: a biased pass that did not surface any new
    phrase has no business overriding the backbone.
    """
    if count_phrases(hyp_casr, biasing_list) > count_phrases(hyp_bb, biasing_list):
        return tuple(hyp_casr)
    return tuple(hyp_bb)


def decode_utterance(
    bundle,
    biasing_list: BiasingList,
    phi: PhiMask,
    params: SmoothingParams,
    collect_extras: bool = False,
) -> DecodeResult:
    """Full biased decode of one utterance.

    Smooth the list correlation, pool the phrase correlations over the
    located window, intersect, interpolate, decode greedily twice, and
    post-process. When the list holds no real phrase the biased path cannot
    say anything, so the backbone hypothesis is returned directly.
    """
    start = time.perf_counter()
    hyp_bb = greedy_decode(bundle.p_bb)
    if biasing_list.size <= 1:
        v = bundle.p_bb.shape[1]
        q_bias = np.full_like(bundle.p_bb, 1.0 / v)
        return DecodeResult(
            hyp_bb=hyp_bb,
            hyp_casr=hyp_bb,
            hyp_final=hyp_bb,
            q_bias=q_bias,
            wall_seconds=time.perf_counter() - start,
        )
    q_slist = triangular_smooth(bundle.q_list, params)
    q_sphr = guided_phrase_smooth(bundle.q_phr, bundle.q_list, q_slist)
    q_bias = joint_intersection(q_slist, q_sphr, bundle.q_tok, phi)
    q_casr = interpolate(bundle.p_bb, q_bias, q_slist)
    hyp_casr = greedy_decode(q_casr)
    hyp_final = post_process(hyp_casr, hyp_bb, biasing_list)
    extras = None
    if collect_extras:
        extras = {
            "q_list": np.asarray(bundle.q_list, dtype=float),
            "q_slist": q_slist,
            "q_sphr": q_sphr,
            "q_bias": q_bias,
            "q_casr": q_casr,
        }
    return DecodeResult(
        hyp_bb=hyp_bb,
        hyp_casr=hyp_casr,
        hyp_final=hyp_final,
        q_bias=q_bias,
        wall_seconds=time.perf_counter() - start,
        extras=extras,
    )


def attention_decode(bundle, biasing_list: BiasingList, phi: PhiMask) -> DecodeResult:
    """Comparison stub: plain attention-weighted-sum biasing.

    Instead of max-intersecting smoothed correlations, this normalizes the
    raw phrase scores into attention weights, sums the containment rows
    under them, and interpolates with the raw (unsmoothed) list correlation.
    Kept only as a baseline for trend comparisons.
    """
    start = time.perf_counter()
    hyp_bb = greedy_decode(bundle.p_bb)
    if biasing_list.size <= 1:
        v = bundle.p_bb.shape[1]
        q_attn = np.full_like(bundle.p_bb, 1.0 / v)
        return DecodeResult(
            hyp_bb=hyp_bb,
            hyp_casr=hyp_bb,
            hyp_final=hyp_bb,
            q_bias=q_attn,
            wall_seconds=time.perf_counter() - start,
        )
    q_phr = np.asarray(bundle.q_phr, dtype=float)
    totals = np.maximum(q_phr.sum(axis=1, keepdims=True), 1e-12)
    weights = q_phr / totals
    mix = weights @ phi.matrix.astype(float)
    q_attn = softmax(mix * bundle.q_tok, axis=1)
    q_casr = interpolate(bundle.p_bb, q_attn, np.asarray(bundle.q_list, dtype=float))
    hyp_casr = greedy_decode(q_casr)
    hyp_final = post_process(hyp_casr, hyp_bb, biasing_list)
    return DecodeResult(
        hyp_bb=hyp_bb,
        hyp_casr=hyp_casr,
        hyp_final=hyp_final,
        q_bias=q_attn,
        wall_seconds=time.perf_counter() - start,
    )
