#!/usr/bin/env python3
"""Shrink a 1196-entry biasing list before decoding.

Group competitive purification (gcp) splits the list into shuffled
groups of 75, keeps each group's top scorers at confident steps, and
repeats on the survivors. The once variant (ocp) runs a single global
round instead. Under heavy score jitter the global tournament lets a
crowd of lucky floor scores push the gold phrase out of the top slots,
while a 75-member group rarely holds enough rivals to do that. The
last section times a full-list decode against a purified one.
"""

import time

import numpy as np

from ctxbias import (
    BiasingList,
    CorrelationBundle,
    NoiseSpec,
    PurifyParams,
    SmoothingParams,
    build_phi,
    decode_utterance,
    gcp,
    make_labels,
    ocp,
    restrict_phi,
)
from ctxbias.harness.config import ExperimentConfig
from ctxbias.harness.corpusgen import generate_corpus
from ctxbias.simulate import SyntheticScorer, synth_bundle


def main() -> None:
    config = ExperimentConfig(seed=4)
    corpus = generate_corpus(config)
    blist = corpus.lists[1196]
    vocab = corpus.vocabulary
    noise = NoiseSpec(seed=19, score_jitter_sigma=0.5)
    params = PurifyParams(group_size=75, n_r=2, thres_list=0.5, n_top=10)

    utt = next(u for u in corpus.utterances if u.spans)
    golds = sorted({s.phrase for s in utt.spans})
    scorer = SyntheticScorer(utt, blist, vocab, noise)
    print(f"{utt.uid}: gold phrase indices {golds} in a list of {blist.size}")

    res = gcp(blist, scorer, params)
    for log in res.rounds:
        survivors = sum(len(w) for w in log.winners)
        print(f"  gcp round {log.round_index}: {len(log.groups)} groups "
              f"-> {survivors} survivors")
    print(f"  gcp kept {res.m_pur} entries; golds kept: "
          f"{[g for g in golds if g in res.kept]}")

    res_o = ocp(blist, scorer, params)
    print(f"  ocp kept {res_o.m_pur} entries; golds kept: "
          f"{[g for g in golds if g in res_o.kept]}")

    # count how often the single global round drops a gold
    dropped = 0
    eligible = 0
    for u in corpus.utterances[:50]:
        if not u.spans:
            continue
        eligible += 1
        sc = SyntheticScorer(u, blist, vocab, noise)
        kept_o = set(ocp(blist, sc, params).kept)
        if any(s.phrase not in kept_o for s in u.spans):
            dropped += 1
    print(f"\nocp dropped a gold from {dropped}/{eligible} spanned utterances "
          f"at sigma={noise.score_jitter_sigma}")

    # what purification buys at decode time
    phi = build_phi(blist, vocab)
    labels = make_labels(utt, blist)
    bundle = synth_bundle(utt, blist, labels, noise, vocab)

    t0 = time.perf_counter()
    full = decode_utterance(bundle, blist, phi, SmoothingParams())
    t_full = time.perf_counter() - t0

    t0 = time.perf_counter()
    pres = gcp(blist, scorer, params)
    kept = np.asarray(pres.kept, dtype=np.intp)
    sub_phi, _ = restrict_phi(phi, kept)
    sub_list = BiasingList(
        phrases=tuple(blist.phrases[i] for i in pres.kept),
        no_bias_token=blist.no_bias_token,
    )
    sub = CorrelationBundle(
        q_list=scorer.q_list_for(pres.kept[1:]),
        q_phr=scorer.q_phr_for(pres.kept),
        q_tok=bundle.q_tok,
        p_bb=bundle.p_bb,
    )
    small = decode_utterance(sub, sub_list, sub_phi, SmoothingParams())
    t_small = time.perf_counter() - t0

    same = full.hyp_final == small.hyp_final
    print(f"\ndecode wall time: full list {t_full * 1e3:.1f} ms, "
          f"purify+decode {t_small * 1e3:.1f} ms, same final hypothesis: {same}")


if __name__ == "__main__":
    main()
