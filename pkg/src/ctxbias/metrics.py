"""Evaluation metrics: character error rate, exact-match phrase precision,
recall and F1, purification retention, and the real-time factor."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass

from .corpus import BiasingList, scan_occurrences


@dataclass(frozen=True)
class MetricsReport:
    cer: float
    precision: float
    recall: float
    f1: float
    retention: float
    rtf: float
    substitutions: int
    insertions: int
    deletions: int
    ref_length: int
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return asdict(self)


def cer(hyp, ref) -> tuple[float, int, int, int]:
    """Edit-distance error rate of a hypothesis against a reference.

    Returns (rate, substitutions, insertions, deletions); insertions are
    hypothesis tokens with no reference counterpart. When multiple optimal
    alignments exist, the backtrace prefers substitution/match, then
    deletion, then insertion.
    """
    hyp = tuple(hyp)
    ref = tuple(ref)
    if not ref:
        raise ValueError("reference must be nonempty")
    h, r = len(hyp), len(ref)
    dist = [[0] * (r + 1) for _ in range(h + 1)]
    for i in range(1, h + 1):
        dist[i][0] = i
    for j in range(1, r + 1):
        dist[0][j] = j
    for i in range(1, h + 1):
        row, prev = dist[i], dist[i - 1]
        hi = hyp[i - 1]
        for j in range(1, r + 1):
            sub = prev[j - 1] + (hi != ref[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)
    s = ins = dele = 0
    i, j = h, r
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (hyp[i - 1] != ref[j - 1]):
            s += hyp[i - 1] != ref[j - 1]
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            dele += 1
            j -= 1
        else:
            ins += 1
            i -= 1
    return (s + ins + dele) / r, s, ins, dele


def _prf_counts(hyp, ref, spans, biasing_list: BiasingList) -> tuple[int, int, int]:
    gold = Counter(s.phrase for s in spans)
    hyp_occ = Counter(m for _, m in scan_occurrences(hyp, biasing_list))
    ref_occ = Counter(m for _, m in scan_occurrences(ref, biasing_list))
    tp = sum(min(hyp_occ[m], c) for m, c in gold.items())
    fn = sum(gold.values()) - tp
    # list phrases surfacing in the hypothesis beyond their reference count
    fp = sum(max(c - ref_occ[m], 0) for m, c in hyp_occ.items())
    return tp, fp, fn


def phrase_prf(
    hyps, refs, spans_per_utt, biasing_list: BiasingList
) -> tuple[float, float, float, int, int, int]:
    """Exact-match phrase precision/recall/F1 over aligned utterance sets.

    A gold phrase counts as recalled when the hypothesis contains at least
    as many exact occurrences of it as there are annotated spans; any list
    phrase occurring more often in the hypothesis than in the reference
    counts as a false positive. Ratios with zero numerator and denominator
    report as 1. Returns (precision, recall, f1, tp, fp, fn).
    """
    if not (len(hyps) == len(refs) == len(spans_per_utt)):
        raise ValueError("hypothesis, reference and span sets are misaligned")
    tp = fp = fn = 0
    for hyp, ref, spans in zip(hyps, refs, spans_per_utt):
        t, p, n = _prf_counts(hyp, ref, spans, biasing_list)
        tp, fp, fn = tp + t, fp + p, fn + n
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1, tp, fp, fn


def retention_rate(kept_per_utt, spans_per_utt) -> float:
    """Mean fraction of an utterance's gold phrases that survived purification.

    Utterances without gold phrases are skipped; with none eligible at all
    there is nothing to lose and the rate reports as 1.
    """
    if len(kept_per_utt) != len(spans_per_utt):
        raise ValueError("kept sets and span sets are misaligned")
    fractions = []
    for kept, spans in zip(kept_per_utt, spans_per_utt):
        golds = {s.phrase for s in spans}
        if not golds:
            continue
        kept_set = set(kept)
        fractions.append(len(golds & kept_set) / len(golds))
    if not fractions:
        return 1.0
    return sum(fractions) / len(fractions)


def rtf(decode_seconds: float, audio_seconds: float) -> float:
    """Real-time factor: decode wall time over (synthetic) audio duration."""
    if audio_seconds <= 0:
        raise ValueError("audio duration must be positive")
    return decode_seconds / audio_seconds
