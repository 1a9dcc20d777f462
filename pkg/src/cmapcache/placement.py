"""Uncoded two-tier placement.

File n is split into subfiles W_{n,S}, |S| = t_a, and access cache a keeps every
W_{n,S} with a in S.  Each subfile is split further into mini-subfiles
W_{n,S,T_1..T_tp}, one per t_p-set of r-subsets T_i of [lam] \\ S, and that
mini-subfile goes to the private caches of users T_1..T_tp.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterator

from .combinat import KSubset, binom, check_subset, from_mask, k_subsets, to_mask
from .indices import MiniSubfileIndex, candidate_masks, iter_demand_masks, r_subset_masks
from .model import SystemParams


def _index(s: int, ts, lam: int) -> MiniSubfileIndex:
    return MiniSubfileIndex(from_mask(s, lam), tuple(from_mask(t, lam) for t in ts))


def index_universe(p: SystemParams) -> Iterator[MiniSubfileIndex]:
    """All F mini-subfile indices of one file, lexicographic."""
    for s in r_subset_masks(p.lam, p.t_a):
        for ts in combinations(candidate_masks(p.lam, p.r, s), p.t_p):
            yield _index(s, ts, p.lam)


class CacheLayout:
    """Cache contents as index sets (the same indices are stored for every file).

    ``access`` is materialised up front; private caches are built per user on
    first request since K * |Z_U^p| grows quickly.
    """

    def __init__(self, p: SystemParams):
        self.params = p
        subfiles = k_subsets(p.lam, p.t_a)
        self.access: dict[int, list[KSubset]] = {
            a: [s for s in subfiles if a in s] for a in range(1, p.lam + 1)
        }
        self._private = lru_cache(maxsize=None)(self._build_private)

    def _build_private(self, user: KSubset) -> tuple[MiniSubfileIndex, ...]:
        p = self.params
        u = to_mask(user, p.lam)
        out = []
        for s in r_subset_masks(p.lam, p.t_a):
            if s & u:
                continue
            others = [m for m in candidate_masks(p.lam, p.r, s) if m != u]
            for rest in combinations(others, p.t_p - 1):
                ts = tuple(sorted(rest + (u,), reverse=True))
                out.append(_index(s, ts, p.lam))
        out.sort()
        return tuple(out)

    def private_cache(self, user) -> tuple[MiniSubfileIndex, ...]:
        return self._private(check_subset(user, self.params.lam, self.params.r))

    @property
    def private(self) -> dict[KSubset, tuple[MiniSubfileIndex, ...]]:
        return {u: self.private_cache(u) for u in k_subsets(self.params.lam, self.params.r)}

    def access_load(self) -> Fraction:
        """Files' worth stored in one access cache."""
        p = self.params
        return Fraction(p.n_files * len(self.access[1]), binom(p.lam, p.t_a))

    def private_load(self, user=None) -> Fraction:
        p = self.params
        user = user or tuple(range(1, p.r + 1))
        return Fraction(p.n_files * len(self.private_cache(user)), p.f)


def build_layout(p: SystemParams) -> CacheLayout:
    return CacheLayout(p)


def demand_set(p: SystemParams, user) -> list[MiniSubfileIndex]:
    """Indices user U still needs: S disjoint from U and U not among the T-sets."""
    user = check_subset(user, p.lam, p.r)
    u = to_mask(user, p.lam)
    return [_index(s, ts, p.lam) for s, ts in iter_demand_masks(p.lam, p.r, p.t_a, p.t_p, u)]


def demand_set_size(p: SystemParams) -> int:
    c = p.n_candidates
    return binom(p.lam - p.r, p.t_a) * (binom(c, p.t_p) - binom(c - 1, p.t_p - 1))


def user_known_set(p: SystemParams, layout: CacheLayout, user) -> set[MiniSubfileIndex]:
    """Indices available to U: subfiles reachable via its access caches plus its private cache."""
    user = check_subset(user, p.lam, p.r)
    u = to_mask(user, p.lam)
    known = set(layout.private_cache(user))
    for s in r_subset_masks(p.lam, p.t_a):
        if s & u:
            for ts in combinations(candidate_masks(p.lam, p.r, s), p.t_p):
                known.add(_index(s, ts, p.lam))
    return known
