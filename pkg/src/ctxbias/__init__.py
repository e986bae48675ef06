"""Contextual-biasing inference pipeline with a synthetic scorer bank.

A biasing list is a set of phrases the recognizer should favor. The
pipeline scores each decoding step against the list at three levels
(list, phrase, token), smooths the list-level scores over time, fuses
the three levels into a biased token distribution, interpolates it with
the backbone, and keeps the biased hypothesis only when it surfaces more
list phrases. Long lists are first shrunk by competitive purification.

Everything runs on deterministic synthetic scores derived from ground
truth plus controllable noise, so the decoding properties can be
measured without a trained model.
"""

from .attention import corr_scores, cross_attention, phrase_corr_from_heads
from .corpus import (
    BiasingList,
    PhiMask,
    Span,
    Utterance,
    Vocabulary,
    build_phi,
    scan_occurrences,
)
from .jointdecode import (
    DecodeResult,
    attention_decode,
    count_phrases,
    decode_utterance,
    greedy_decode,
    interpolate,
    joint_intersection,
    post_process,
)
from .losses import FocalParams, contrastive_loss, focal_loss, token_ce, total_loss
from .metrics import MetricsReport, cer, phrase_prf, retention_rate, rtf
from .purify import PurifyParams, PurifyResult, gcp, ocp, restrict_phi
from .simulate import CorrelationBundle, NoiseSpec, SyntheticScorer, make_labels
from .smoothing import (
    SmoothingParams,
    estimate_phrase_length,
    guided_phrase_smooth,
    locate_window,
    triangular_smooth,
)

__version__ = "0.1.0"

__all__ = [
    "BiasingList",
    "CorrelationBundle",
    "DecodeResult",
    "FocalParams",
    "MetricsReport",
    "NoiseSpec",
    "PhiMask",
    "PurifyParams",
    "PurifyResult",
    "SmoothingParams",
    "Span",
    "SyntheticScorer",
    "Utterance",
    "Vocabulary",
    "attention_decode",
    "build_phi",
    "cer",
    "contrastive_loss",
    "corr_scores",
    "count_phrases",
    "cross_attention",
    "decode_utterance",
    "estimate_phrase_length",
    "focal_loss",
    "gcp",
    "greedy_decode",
    "guided_phrase_smooth",
    "interpolate",
    "joint_intersection",
    "locate_window",
    "make_labels",
    "ocp",
    "phrase_corr_from_heads",
    "phrase_prf",
    "post_process",
    "restrict_phi",
    "retention_rate",
    "rtf",
    "scan_occurrences",
    "token_ce",
    "total_loss",
    "triangular_smooth",
]
