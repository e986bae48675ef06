"""Competitive purification: shrink a biasing list before joint decoding.

Phrases compete in groups: within each group, only the top scorers at steps
where the list correlation is confident survive. Survivors are reshuffled
and compete again for a fixed number of rounds (or until everything fits in
one group). The once-only variant runs a single global competition.

The first round always runs, even when the whole list fits in one group;
otherwise a single global competition would be a no-op and the once-only
variant could never shrink anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .corpus import BiasingList, PhiMask


@dataclass(frozen=True)
class PurifyParams:
    group_size: int = 75
    n_r: int = 2
    thres_list: float = 0.5
    n_top: int = 10
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        if self.group_size < 1 or self.n_r < 1 or self.n_top < 1:
            raise ValueError("group_size, n_r and n_top must be positive")
        if not (0.0 <= self.thres_list <= 1.0):
            raise ValueError("thres_list must lie in [0,1]")


@dataclass(frozen=True)
class RoundLog:
    """Audit record of one round: groups and their winners (original indices)."""

    round_index: int
    groups: tuple[tuple[int, ...], ...]
    winners: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class PurifyResult:
    kept: tuple[int, ...]
    m_pur: int
    rounds: tuple[RoundLog, ...]

    def __post_init__(self) -> None:
        if len(set(self.kept)) != len(self.kept):
            raise ValueError("kept indices must be distinct")
        if not self.kept or self.kept[0] != 0:
            raise ValueError("the no-bias entry must be kept")
        if self.m_pur != len(self.kept):
            raise ValueError("m_pur must count the kept indices")


def group_phrases(m: int, group_size: int, seed: int) -> list[np.ndarray]:
    """Shuffle m indices and slice into ceil(m/group_size) contiguous groups."""
    if m < 1:
        raise ValueError("need at least one index to group")
    perm = np.random.default_rng(seed).permutation(m)
    g = math.ceil(m / group_size)
    return [perm[i * group_size : (i + 1) * group_size] for i in range(g)]


def select_winners(q_list_g, q_phr_g, thres_list: float, n_top: int) -> tuple[int, ...]:
    """Group-local winners: at each step whose list correlation clears the
    threshold, the n_top phrases with the largest (list x phrase) product.

    Zero-scored phrases never win, ties prefer the smaller index, and the
    per-step winner sets are unioned. No confident step means no winners.
    """
    q_list_g = np.asarray(q_list_g, dtype=float)
    q_phr_g = np.asarray(q_phr_g, dtype=float)
    winners: set[int] = set()
    for u in np.flatnonzero(q_list_g > thres_list):
        vals = q_list_g[u] * q_phr_g[u]
        pos = np.flatnonzero(vals > 0)
        if pos.size == 0:
            continue
        order = pos[np.lexsort((pos, -vals[pos]))]
        winners.update(int(i) for i in order[:n_top])
    return tuple(sorted(winners))


def gcp(biasing_list: BiasingList, scorer, params: PurifyParams) -> PurifyResult:
    """Group competitive purification.

    ``scorer`` must expose q_list_for(members) and q_phr_for(members),
    returning scores against the member sublist in member order. Phrase
    scores are only requested for groups with at least one confident step;
    the no-bias entry itself never competes and is always kept.
    """
    survivors = [int(i) for i in biasing_list.real_indices()]
    rounds: list[RoundLog] = []
    i = 1
    while survivors:
        round_seed = rng.stream_key(params.shuffle_seed, "round", i)
        local_groups = group_phrases(len(survivors), params.group_size, round_seed)
        groups = [[survivors[j] for j in g.tolist()] for g in local_groups]
        winners_log = []
        merged: set[int] = set()
        for members in groups:
            q_list_g = scorer.q_list_for(members)
            if np.any(q_list_g > params.thres_list):
                q_phr_g = scorer.q_phr_for(members)
                local = select_winners(q_list_g, q_phr_g, params.thres_list, params.n_top)
                wins = tuple(members[j] for j in local)
            else:
                wins = ()
            winners_log.append(wins)
            merged.update(wins)
        survivors = sorted(merged)
        rounds.append(
            RoundLog(
                round_index=i,
                groups=tuple(tuple(g) for g in groups),
                winners=tuple(winners_log),
            )
        )
        i += 1
        if i > params.n_r or math.ceil(len(survivors) / params.group_size) <= 1:
            break
    kept = (0, *survivors)
    return PurifyResult(kept=kept, m_pur=len(kept), rounds=tuple(rounds))


def ocp(biasing_list: BiasingList, scorer, params: PurifyParams) -> PurifyResult:
    """Once competitive purification: a single round, one global group."""
    n_real = biasing_list.size - 1
    return gcp(biasing_list, scorer, replace(params, group_size=max(1, n_real), n_r=1))


def restrict_phi(phi: PhiMask, kept) -> tuple[PhiMask, np.ndarray]:
    """Containment mask for the kept sublist, plus the active-token columns."""
    kept = np.asarray(list(kept), dtype=np.intp)
    if len(set(kept.tolist())) != kept.size:
        raise ValueError("kept indices must be distinct")
    if kept.size and (kept.min() < 0 or kept.max() >= phi.matrix.shape[0]):
        raise ValueError("kept index outside the mask")
    sub = PhiMask(matrix=phi.matrix[kept].copy())
    return sub, sub.matrix.any(axis=0)
