"""Delivery: flip / swap_o and the transmission loop.

A transmission is a set of terms (user, index) that are XORed together; each
term stands for W_{d_user, S, T_1..T_tp}.  Everything here is independent of
which files are requested, so the demand vector only labels the output.

``flip``, ``swap_o`` and ``build_transmission`` work on plain tuples and read
like the operator definitions.  ``run_delivery`` uses an equivalent bitmask
engine, which is what makes the lam = 10 systems tractable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .combinat import KSubset, binom, check_subset, k_subsets, lex_rank
from .indices import (
    MaskTerm,
    MiniSubfileIndex,
    Term,
    fmt_term,
    iter_demand_masks,
    masks_to_term,
    parse_term,
    r_subset_masks,
    term_to_masks,
)
from .model import SystemParams, require_class


class SchemeError(RuntimeError):
    """The delivery produced something the scheme forbids (overlap, undemanded term, out-of-class seed)."""


@dataclass(frozen=True)
class DemandVector:
    assignment: Mapping[KSubset, int]

    @classmethod
    def worst_case(cls, p: SystemParams) -> "DemandVector":
        """d_U = lex rank of U, so all K demands are distinct."""
        return cls({u: lex_rank(u, p.lam) for u in k_subsets(p.lam, p.r)})

    def validate(self, p: SystemParams, distinct: bool = False) -> None:
        users = set(k_subsets(p.lam, p.r))
        if set(self.assignment) != users:
            raise ValueError("demand vector must assign a file to each of the K users")
        files = list(self.assignment.values())
        if any(not 1 <= f <= p.n_files for f in files):
            raise ValueError(f"demanded file outside [1, {p.n_files}]")
        if distinct and len(set(files)) != len(files):
            raise ValueError("worst-case demand vector needs distinct files")

    def __getitem__(self, user: KSubset) -> int:
        return self.assignment[user]


@dataclass(frozen=True)
class Transmission:
    terms: tuple[Term, ...]

    @classmethod
    def of(cls, terms: Iterable[Term]) -> "Transmission":
        ts = sorted(set(terms))
        return cls(tuple(ts))

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        return " ^ ".join(fmt_term(t) for t in self.terms)


# ---------- tuple-level operators ----------

def _intersection(term: Term) -> set[int]:
    user, idx = term
    return set(idx.intersection(user))


def _check_demanded(term: Term) -> None:
    user, idx = term
    if set(user) & set(idx.s) or tuple(user) in idx.t_list:
        raise SchemeError(f"{fmt_term(term)} is not demanded by its user")


def flip(seed: Term) -> list[Term]:
    """The seed plus, for each T_j, the term demanded by T_j with U taking T_j's place."""
    _check_demanded(seed)
    user, idx = seed
    out = [seed]
    for j, tj in enumerate(idx.t_list):
        rest = idx.t_list[:j] + idx.t_list[j + 1:]
        out.append((tj, MiniSubfileIndex.make(idx.s, rest + (tuple(user),))))
    return out


def swap_o(seed: Term, k: int) -> list[Term]:
    """Exchange k elements of the intersection set with k elements of S, in every way."""
    _check_demanded(seed)
    user, idx = seed
    inter = _intersection(seed)
    if not inter:
        raise SchemeError(f"{fmt_term(seed)} has an empty intersection set")
    if not 1 <= k <= min(len(idx.s), len(inter)):
        raise ValueError(f"k={k} outside [1, min(t_a, |I|)] = [1, {min(len(idx.s), len(inter))}]")
    out = []
    for u_out in combinations(sorted(inter), k):
        for s_out in combinations(idx.s, k):
            uo, so = set(u_out), set(s_out)
            new_user = tuple(sorted((set(user) | so) - uo))
            new_s = (set(idx.s) | uo) - so
            new_ts = [(set(t) | so) - uo for t in idx.t_list]
            out.append((new_user, MiniSubfileIndex.make(new_s, new_ts)))
    return out


def build_transmission(p: SystemParams, d: Optional[DemandVector], seed: Term) -> Transmission:
    """flip(seed ^ swap_o(seed, 1) ^ ... ^ swap_o(seed, min(|I|, t_a)))."""
    user, idx = seed
    seed = (check_subset(user, p.lam, p.r), MiniSubfileIndex.make(idx.s, idx.t_list))
    if len(seed[1].s) != p.t_a or len(seed[1].t_list) != p.t_p:
        raise ValueError(f"seed {fmt_term(seed)} does not match t_a={p.t_a}, t_p={p.t_p}")
    inter = _intersection(seed)
    if not inter:
        raise SchemeError(f"{fmt_term(seed)} has an empty intersection set; system outside the intersection class")
    base = [seed]
    for k in range(1, min(len(inter), p.t_a) + 1):
        base.extend(swap_o(seed, k))
    terms = [t for b in base for t in flip(b)]
    if len(set(terms)) != len(terms):
        raise SchemeError(f"repeated term in transmission seeded by {fmt_term(seed)}")
    for t in terms:
        _check_demanded(t)
    if d is not None:
        missing = [t for t in terms if t[0] not in d.assignment]
        if missing:
            raise ValueError(f"demand vector has no entry for {missing[0][0]}")
    return Transmission.of(terms)


# ---------- mask engine ----------

@lru_cache(maxsize=None)
def _sub_masks(m: int, k: int) -> tuple[int, ...]:
    bits = [1 << i for i in range(m.bit_length()) if m >> i & 1]
    return tuple(sum(c) for c in combinations(bits, k))


def transmission_masks(u: int, s: int, ts: tuple[int, ...], t_a: int) -> list[MaskTerm]:
    inter = u
    for t in ts:
        inter &= t
    if not inter:
        raise SchemeError("seed has an empty intersection set; system outside the intersection class")
    base = [(u, s, ts)]
    for k in range(1, min(inter.bit_count(), t_a) + 1):
        for du in _sub_masks(inter, k):
            for ds in _sub_masks(s, k):
                keep = ~du
                base.append((
                    (u | ds) & keep,
                    (s | du) & ~ds,
                    tuple(sorted([(t | ds) & keep for t in ts], reverse=True)),
                ))
    out = []
    for bu, bs, bts in base:
        out.append((bu, bs, bts))
        for j, t in enumerate(bts):
            rest = bts[:j] + bts[j + 1:] + (bu,)
            out.append((t, bs, tuple(sorted(rest, reverse=True))))
    return out


def _key(u: int, s: int, ts: tuple[int, ...], lam: int) -> int:
    key = s << lam | u
    shift = 2 * lam
    for t in ts:
        key |= t << shift
        shift += lam
    return key


def _seed_order(p: SystemParams, shuffle_seed: Optional[int]) -> Iterator[tuple[int, int, tuple[int, ...]]]:
    def lex():
        for u in r_subset_masks(p.lam, p.r):
            for s, ts in iter_demand_masks(p.lam, p.r, p.t_a, p.t_p, u):
                yield u, s, ts
    if shuffle_seed is None:
        return lex()
    seeds = list(lex())
    random.Random(shuffle_seed).shuffle(seeds)
    return iter(seeds)


def iter_schedule_masks(p: SystemParams, shuffle_seed: Optional[int] = None) -> Iterator[list[MaskTerm]]:
    """Transmissions in mask form, seeds visited in lex order (or shuffled)."""
    lam = p.lam
    served: set[int] = set()
    for u, s, ts in _seed_order(p, shuffle_seed):
        if _key(u, s, ts, lam) in served:
            continue
        terms = transmission_masks(u, s, ts, p.t_a)
        keys = []
        for bu, bs, bts in terms:
            if bu & bs or bu in bts:
                raise SchemeError(f"undemanded term {masks_to_term((bu, bs, bts), lam)}")
            keys.append(_key(bu, bs, bts, lam))
        fresh = set(keys)
        if len(fresh) != len(keys) or not served.isdisjoint(fresh):
            seed = fmt_term(masks_to_term((u, s, ts), lam))
            raise SchemeError(f"transmission seeded by {seed} re-covers an already served mini-subfile")
        served |= fresh
        yield terms
    if len(served) != p.total_demanded:
        raise SchemeError(f"served {len(served)} of {p.total_demanded} demanded mini-subfiles")


def count_transmissions(p: SystemParams) -> tuple[int, int]:
    """(number of transmissions, total terms) without materialising the schedule."""
    require_class(p)
    n = total = 0
    for terms in iter_schedule_masks(p):
        n += 1
        total += len(terms)
    return n, total


def run_delivery(p: SystemParams, d: Optional[DemandVector] = None,
                 shuffle_seed: Optional[int] = None) -> list[Transmission]:
    require_class(p)
    if d is not None:
        d.validate(p)
    return [Transmission.of(masks_to_term(mt, p.lam) for mt in terms)
            for terms in iter_schedule_masks(p, shuffle_seed)]


def schedule_masks(schedule: Sequence[Transmission], lam: int) -> list[list[MaskTerm]]:
    return [[term_to_masks(t, lam) for t in tx.terms] for tx in schedule]


def dump_schedule(schedule: Sequence[Transmission]) -> str:
    return "".join(f"T{k}: {tx}\n" for k, tx in enumerate(schedule, 1))


def parse_schedule(text: str) -> list[Transmission]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        _, body = line.split(":", 1)
        out.append(Transmission.of(parse_term(t) for t in body.split("^")))
    return out


def transmission_size(p: SystemParams, i: int) -> int:
    """Terms in a transmission whose intersection set has size i."""
    return (p.t_p + 1) * binom(p.t_a + i, p.t_a)
