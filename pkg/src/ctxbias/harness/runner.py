"""Sweep runner: decode the corpus under every (method, list length, seed)
cell and aggregate metrics.

Timing covers the per-utterance decode path only: purification when the
method asks for it, score slicing for the surviving sublist, and decoding.
Producing the correlation scores themselves is the scorer's forward pass,
i.e. model inference, so it stays outside the clock, as do corpus
generation, metric computation, and I/O. With several workers the
utterances are decoded in parallel and reduced in utterance-id order, so
the metrics are identical to a serial run; the recorded decode time is
then the sum of per-utterance walls rather than elapsed wall clock.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..corpus import BiasingList, PhiMask, Utterance, Vocabulary, build_phi
from ..jointdecode import (
    attention_decode,
    count_phrases,
    decode_utterance,
    greedy_decode,
)
from ..metrics import MetricsReport, cer, phrase_prf, retention_rate, rtf
from ..purify import gcp, ocp, restrict_phi
from ..simulate import NoiseSpec, SyntheticScorer, synth_backbone
from .config import ExperimentConfig
from .corpusgen import Corpus, generate_corpus

PURIFY_METHODS = {"joint_ocp", "joint_ocp_pp", "joint_gcp", "joint_gcp_pp"}


@dataclass(frozen=True)
class UttOutcome:
    uid: str
    hyp: tuple[int, ...]
    kept: tuple[int, ...] | None  # purified list indices, None without purify
    wall_seconds: float
    count_bb: int
    count_casr: int
    count_final: int
    cer_bb: float
    cer_casr: float
    cer_final: float


@dataclass(frozen=True, eq=False)
class CellResult:
    method: str
    list_length: int
    seed: int
    report: MetricsReport
    decode_seconds: float
    audio_seconds: float
    n_utterances: int
    m_pur_mean: float | None
    outcomes: tuple[UttOutcome, ...] | None


def decode_one(
    utt: Utterance,
    biasing_list: BiasingList,
    phi: PhiMask,
    vocab: Vocabulary,
    noise: NoiseSpec,
    method: str,
    config: ExperimentConfig,
    sweep_seed: int,
) -> UttOutcome:
    smooth = config.smoothing
    if method == "baseline":
        p_bb = synth_backbone(utt, noise, vocab)
        t0 = time.perf_counter()
        hyp_bb = greedy_decode(p_bb)
        wall = time.perf_counter() - t0
        n_bb = count_phrases(hyp_bb, biasing_list)
        cer_bb = cer(hyp_bb, utt.tokens)[0]
        return UttOutcome(
            uid=utt.uid,
            hyp=hyp_bb,
            kept=None,
            wall_seconds=wall,
            count_bb=n_bb,
            count_casr=n_bb,
            count_final=n_bb,
            cer_bb=cer_bb,
            cer_casr=cer_bb,
            cer_final=cer_bb,
        )

    scorer = SyntheticScorer(utt, biasing_list, vocab, noise, phi)
    kept = None
    t0 = time.perf_counter()
    if method in PURIFY_METHODS:
        params = config.purify_for(sweep_seed)
        pick = gcp if "gcp" in method else ocp
        pres = pick(biasing_list, scorer, params)
        kept = pres.kept
        sub = biasing_list.sublist(kept)
        sub_phi, _ = restrict_phi(phi, kept)
        bundle = scorer.bundle(kept)
        res = decode_utterance(bundle, sub, sub_phi, smooth)
        count_list = biasing_list  # count against the full cell list
    else:
        bundle = scorer.bundle()
        if method.startswith("attn"):
            res = attention_decode(bundle, biasing_list, phi)
        else:
            res = decode_utterance(bundle, biasing_list, phi, smooth)
        count_list = biasing_list
    wall = time.perf_counter() - t0

    hyp = res.hyp_final if method.endswith("_pp") else res.hyp_casr
    return UttOutcome(
        uid=utt.uid,
        hyp=hyp,
        kept=kept,
        wall_seconds=wall,
        count_bb=count_phrases(res.hyp_bb, count_list),
        count_casr=count_phrases(res.hyp_casr, count_list),
        count_final=count_phrases(res.hyp_final, count_list),
        cer_bb=cer(res.hyp_bb, utt.tokens)[0],
        cer_casr=cer(res.hyp_casr, utt.tokens)[0],
        cer_final=cer(res.hyp_final, utt.tokens)[0],
    )


_CELL = {}


def _init_cell(biasing_list, phi, vocab, noise, method, config, sweep_seed):
    _CELL.update(
        biasing_list=biasing_list,
        phi=phi,
        vocab=vocab,
        noise=noise,
        method=method,
        config=config,
        sweep_seed=sweep_seed,
    )


def _cell_worker(utt: Utterance) -> UttOutcome:
    return decode_one(
        utt,
        _CELL["biasing_list"],
        _CELL["phi"],
        _CELL["vocab"],
        _CELL["noise"],
        _CELL["method"],
        _CELL["config"],
        _CELL["sweep_seed"],
    )


def _aggregate(
    outcomes,
    utterances,
    biasing_list: BiasingList,
    method: str,
    list_length: int,
    seed: int,
    keep_outcomes: bool,
) -> CellResult:
    outcomes = sorted(outcomes, key=lambda o: o.uid)
    by_uid = {u.uid: u for u in utterances}
    total_err = np.zeros(3, dtype=int)
    ref_len = 0
    hyps, refs, spans = [], [], []
    kept_lists = []
    decode_seconds = 0.0
    audio_seconds = 0.0
    for out in outcomes:
        utt = by_uid[out.uid]
        _, s, i, d = cer(out.hyp, utt.tokens)
        total_err += (s, i, d)
        ref_len += utt.n_steps
        hyps.append(out.hyp)
        refs.append(utt.tokens)
        spans.append(utt.spans)
        kept_lists.append(
            out.kept if out.kept is not None else tuple(range(biasing_list.size))
        )
        decode_seconds += out.wall_seconds
        audio_seconds += utt.duration_seconds
    p, r, f1, tp, fp, fn = phrase_prf(hyps, refs, spans, biasing_list)
    report = MetricsReport(
        cer=float(total_err.sum()) / ref_len,
        precision=p,
        recall=r,
        f1=f1,
        retention=retention_rate(kept_lists, spans),
        rtf=rtf(decode_seconds, audio_seconds),
        substitutions=int(total_err[0]),
        insertions=int(total_err[1]),
        deletions=int(total_err[2]),
        ref_length=ref_len,
        tp=tp,
        fp=fp,
        fn=fn,
    )
    keeps = [len(k) for k, o in zip(kept_lists, outcomes) if o.kept is not None]
    return CellResult(
        method=method,
        list_length=list_length,
        seed=seed,
        report=report,
        decode_seconds=decode_seconds,
        audio_seconds=audio_seconds,
        n_utterances=len(outcomes),
        m_pur_mean=float(np.mean(keeps)) if keeps else None,
        outcomes=tuple(outcomes) if keep_outcomes else None,
    )


def run_sweep(
    config: ExperimentConfig,
    corpus: Corpus | None = None,
    workers: int = 1,
    keep_outcomes: bool = False,
) -> dict[tuple[str, int, int], CellResult]:
    if corpus is None:
        corpus = generate_corpus(config)
    results: dict[tuple[str, int, int], CellResult] = {}
    for m in config.list_lengths:
        biasing_list = corpus.lists[m]
        phi = build_phi(biasing_list, corpus.vocabulary)
        for sweep_seed in config.sweep_seeds:
            noise = config.noise_for(sweep_seed)
            for method in config.methods:
                if workers > 1:
                    with ProcessPoolExecutor(
                        max_workers=workers,
                        initializer=_init_cell,
                        initargs=(biasing_list, phi, corpus.vocabulary, noise,
                                  method, config, sweep_seed),
                    ) as pool:
                        outcomes = list(
                            pool.map(_cell_worker, corpus.utterances, chunksize=16)
                        )
                else:
                    outcomes = [
                        decode_one(utt, biasing_list, phi, corpus.vocabulary,
                                   noise, method, config, sweep_seed)
                        for utt in corpus.utterances
                    ]
                results[(method, m, sweep_seed)] = _aggregate(
                    outcomes, corpus.utterances, biasing_list,
                    method, m, sweep_seed, keep_outcomes,
                )
    return results
