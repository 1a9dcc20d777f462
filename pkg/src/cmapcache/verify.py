"""Checking a delivery schedule: symbolic peeling, GF(2) elimination, bit-level
simulation, and the index-coding side of the alpha bound.

Messages are identified as (file, s_mask, ts_masks).  User U holds every
message whose subfile index meets U (access caches) or whose T-list contains U
(private cache), for every file.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .combinat import KSubset, check_subset, from_mask, k_subsets, to_mask
from .delivery import DemandVector, Transmission, schedule_masks
from .indices import MiniSubfileIndex, Term, iter_demand_masks, masks_to_term, r_subset_masks
from .model import SystemParams
from .placement import CacheLayout, index_universe

Message = tuple[int, int, tuple[int, ...]]


class DecodeError(RuntimeError):
    def __init__(self, user: KSubset, missing: MiniSubfileIndex, transmission: Optional[Transmission]):
        where = f"; stuck at transmission {transmission}" if transmission is not None else ""
        super().__init__(f"user {user} cannot recover {missing}{where}")
        self.user = user
        self.missing = missing
        self.transmission = transmission


class PayloadMismatch(RuntimeError):
    def __init__(self, user: KSubset, index: MiniSubfileIndex):
        super().__init__(f"user {user}: reconstructed bits differ first at mini-subfile {index}")
        self.user = user
        self.index = index


def _knows(u: int, s: int, ts: tuple[int, ...]) -> bool:
    return bool(s & u) or u in ts


def _knower(p: SystemParams, layout: Optional[CacheLayout], user: KSubset):
    """Side-information test for U: read off the layout when given, else the placement rule."""
    u = to_mask(user, p.lam)
    if layout is None:
        return lambda s, ts: _knows(u, s, ts)
    from .placement import user_known_set
    known = {(to_mask(i.s, p.lam), tuple(sorted((to_mask(t, p.lam) for t in i.t_list), reverse=True)))
             for i in user_known_set(p, layout, user)}
    return lambda s, ts: (s, ts) in known


def _labelled(sched, d: DemandVector, lam: int) -> list[list[Message]]:
    file_of = {to_mask(v, lam): f for v, f in d.assignment.items()}
    return [[(file_of[v], s, ts) for v, s, ts in tx] for tx in sched]


def _peel(knows, txs: Sequence[Sequence[Message]], values: Optional[Sequence[int]] = None,
          known_value=None) -> dict[Message, int]:
    """Peeling fixpoint for one user.

    Returns recovered messages mapped to their value (0 in symbolic mode).
    """
    unknown = []
    waiting: dict[Message, list[int]] = defaultdict(list)
    ready = []
    for k, tx in enumerate(txs):
        unk = {m for m in tx if not knows(m[1], m[2])}
        unknown.append(unk)
        for m in unk:
            waiting[m].append(k)
        if len(unk) == 1:
            ready.append(k)
    got: dict[Message, int] = {}
    while ready:
        k = ready.pop()
        if len(unknown[k]) != 1:
            continue
        (m,) = unknown[k]
        val = 0
        if values is not None:
            val = values[k]
            for other in txs[k]:
                if other != m:
                    val ^= got[other] if other in got else known_value(other)
        got[m] = val
        for j in waiting.pop(m, ()):
            unknown[j].discard(m)
            if len(unknown[j]) == 1:
                ready.append(j)
    return got


def _demanded(p: SystemParams, u: int) -> list[tuple[int, tuple[int, ...]]]:
    return list(iter_demand_masks(p.lam, p.r, p.t_a, p.t_p, u))


def _first_stuck(schedule: Sequence[Transmission], user: KSubset, missing: MiniSubfileIndex):
    for tx in schedule:
        if (user, missing) in tx.terms:
            return tx
    return None


def decode_user(p: SystemParams, layout: Optional[CacheLayout], user, schedule: Sequence[Transmission],
                d: Optional[DemandVector] = None, strict: bool = True,
                _masks=None) -> set[MiniSubfileIndex]:
    """Indices of U's requested file recovered from the schedule by peeling.

    With ``strict`` a DecodeError names the first demanded index left unrecovered.
    """
    user = check_subset(user, p.lam, p.r)
    d = d or DemandVector.worst_case(p)
    txs = _masks if _masks is not None else _labelled(schedule_masks(schedule, p.lam), d, p.lam)
    u = to_mask(user, p.lam)
    mine = d[user]
    got = _peel(_knower(p, layout, user), txs)
    rec = {(s, ts) for f, s, ts in got if f == mine}
    if strict:
        for s, ts in _demanded(p, u):
            if (s, ts) not in rec:
                missing = MiniSubfileIndex(from_mask(s, p.lam), tuple(from_mask(t, p.lam) for t in ts))
                raise DecodeError(user, missing, _first_stuck(schedule, user, missing))
    return {MiniSubfileIndex(from_mask(s, p.lam), tuple(from_mask(t, p.lam) for t in ts)) for s, ts in rec}


def decode_all(p: SystemParams, layout: Optional[CacheLayout], schedule: Sequence[Transmission],
               d: Optional[DemandVector] = None) -> dict[KSubset, set[MiniSubfileIndex]]:
    d = d or DemandVector.worst_case(p)
    txs = _labelled(schedule_masks(schedule, p.lam), d, p.lam)
    return {u: decode_user(p, layout, u, schedule, d, _masks=txs) for u in k_subsets(p.lam, p.r)}


# ---------- GF(2) oracle ----------

def gf2_decodable(p: SystemParams, layout: Optional[CacheLayout], user, schedule: Sequence[Transmission],
                  d: Optional[DemandVector] = None) -> set[MiniSubfileIndex]:
    """Demanded indices of U lying in the row space of the schedule after cancelling side information."""
    user = check_subset(user, p.lam, p.r)
    d = d or DemandVector.worst_case(p)
    u = to_mask(user, p.lam)
    txs = _labelled(schedule_masks(schedule, p.lam), d, p.lam)
    knows = _knower(p, layout, user)
    var: dict[Message, int] = {}
    basis: dict[int, int] = {}   # lowest set bit -> row
    for tx in txs:
        row = 0
        for m in tx:
            if not knows(m[1], m[2]):
                row ^= 1 << var.setdefault(m, len(var))
        _insert(basis, row)
    out = set()
    mine = d[user]
    for s, ts in _demanded(p, u):
        m = (mine, s, ts)
        if m in var and _reduce(basis, 1 << var[m]) == 0:
            out.add(MiniSubfileIndex(from_mask(s, p.lam), tuple(from_mask(t, p.lam) for t in ts)))
    return out


def _reduce(basis: dict[int, int], row: int) -> int:
    while row:
        low = row & -row
        piv = basis.get(low)
        if piv is None:
            return row
        row ^= piv
    return 0


def _insert(basis: dict[int, int], row: int) -> None:
    row = _reduce(basis, row)
    if row:
        basis[row & -row] = row


# ---------- payload simulation ----------

@dataclass(frozen=True)
class PayloadConfig:
    file_bits: int
    seed: int = 0

    def block_bits(self, p: SystemParams) -> int:
        if self.file_bits <= 0 or self.file_bits % p.f:
            raise ValueError(f"file size B={self.file_bits} bits must be a positive multiple of F={p.f}")
        return self.file_bits // p.f


def _ground_truth(p: SystemParams, files: Iterable[int], bits: int, seed: int) -> dict[Message, int]:
    rng = random.Random(seed)
    universe = [(to_mask(i.s, p.lam), tuple(to_mask(t, p.lam) for t in i.t_list)) for i in index_universe(p)]
    return {(f, s, ts): rng.getrandbits(bits) for f in sorted(set(files)) for s, ts in universe}


def decode_payload(p: SystemParams, layout: Optional[CacheLayout], d: Optional[DemandVector],
                   schedule: Sequence[Transmission], cfg: PayloadConfig,
                   corrupt: Optional[tuple[int, int]] = None) -> dict[KSubset, int]:
    """Simulate the delivery on random bits and rebuild every user's file.

    Returns user -> reconstructed file (an int of B bits, mini-subfiles in lex
    order, first index in the most significant block).  ``corrupt=(k, bit)``
    flips one bit of transmission k (0-based) before decoding.
    """
    d = d or DemandVector.worst_case(p)
    bits = cfg.block_bits(p)
    truth = _ground_truth(p, d.assignment.values(), bits, cfg.seed)
    txs = _labelled(schedule_masks(schedule, p.lam), d, p.lam)
    values = []
    for tx in txs:
        v = 0
        for m in tx:
            v ^= truth[m]
        values.append(v)
    if corrupt is not None:
        k, bit = corrupt
        values[k] ^= 1 << bit
    universe = [(idx, to_mask(idx.s, p.lam), tuple(sorted((to_mask(t, p.lam) for t in idx.t_list), reverse=True)))
                for idx in index_universe(p)]
    out = {}
    for user in k_subsets(p.lam, p.r):
        knows = _knower(p, layout, user)
        got = _peel(knows, txs, values, truth.__getitem__)
        f = d[user]
        rebuilt = 0
        for idx, s, ts in universe:
            m = (f, s, ts)
            if knows(s, ts):
                block = truth[m]
            elif m in got:
                block = got[m]
            else:
                raise PayloadMismatch(user, idx)
            if block != truth[m]:
                raise PayloadMismatch(user, idx)
            rebuilt = rebuilt << bits | block
        out[user] = rebuilt
    return out


# ---------- index coding ----------

@dataclass
class IcpInstance:
    """One message per demanded (user, index) pair; receivers keyed by user."""

    messages: list[Term]
    files: list[int]
    wanted: dict[KSubset, frozenset[int]] = field(default_factory=dict)
    side: dict[KSubset, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        self.position = {m: k for k, m in enumerate(self.messages)}

    def ids_of(self, terms: Iterable[Term]) -> list[int]:
        return [self.position[t] for t in terms]

    def owner(self, k: int) -> KSubset:
        return self.messages[k][0]


def build_icp(p: SystemParams, layout: Optional[CacheLayout], d: Optional[DemandVector] = None) -> IcpInstance:
    d = d or DemandVector.worst_case(p)
    d.validate(p, distinct=True)
    lam = p.lam
    raw = []
    for u in r_subset_masks(lam, p.r):
        for s, ts in iter_demand_masks(lam, p.r, p.t_a, p.t_p, u):
            raw.append((u, s, ts))
    msgs = [masks_to_term(m, lam) for m in raw]
    icp = IcpInstance(msgs, [d[m[0]] for m in msgs])
    for user in k_subsets(lam, p.r):
        u = to_mask(user, lam)
        knows = _knower(p, layout, user)
        icp.wanted[user] = frozenset(k for k, m in enumerate(raw) if m[0] == u)
        icp.side[user] = frozenset(k for k, m in enumerate(raw) if m[0] != u and knows(m[1], m[2]))
    return icp


def alpha_witness_parts(p: SystemParams) -> tuple[list[Term], list[Term]]:
    """B_1 and B_2 built from lexicographically ordered users."""
    lam, r, t_a, t_p = p.lam, p.r, p.t_a, p.t_p
    users = k_subsets(lam, r)
    c = p.n_candidates

    def demanding(s: tuple) -> list[KSubset]:
        return [v for v in users if not set(v) & set(s)]

    b1 = []
    for i in range(1, lam - r - t_a + 2):
        u_i = users[i - 1]
        for s in combinations(range(r + i, lam + 1), t_a):
            dem = demanding(s)
            for sel in combinations(range(i + 1, c + 1), t_p):
                b1.append((u_i, MiniSubfileIndex.make(s, [dem[l - 1] for l in sel])))
    s2 = tuple(range(lam + 1 - t_a, lam + 1))
    dem = demanding(s2)
    b2 = []
    for m in range(lam - r - t_a + 2, c + 1):
        for sel in combinations(range(m + 1, c + 1), t_p):
            b2.append((dem[m - 1], MiniSubfileIndex.make(s2, [dem[l - 1] for l in sel])))
    return b1, b2


def alpha_witness_set(p: SystemParams, d: Optional[DemandVector] = None) -> list[Term]:
    b1, b2 = alpha_witness_parts(p)
    seen: dict[Term, None] = dict.fromkeys(b1 + b2)
    return list(seen)


def check_generalized_independent(icp: IcpInstance, candidate: Iterable[int], limit: int = 20) -> bool:
    """Every subset C of the candidate has a member whose receiver holds no other member of C."""
    cand = sorted(set(candidate))
    if len(cand) > limit:
        raise ValueError(f"{len(cand)} candidates exceed the 2^n enumeration guard ({limit})")
    n = len(cand)
    conflict = []
    for a in cand:
        side = icp.side[icp.owner(a)]
        conflict.append(sum(1 << j for j, b in enumerate(cand) if b != a and b in side))
    for sub in range(1, 1 << n):
        rest = sub
        while rest:
            low = rest & -rest
            if not conflict[low.bit_length() - 1] & sub:
                break
            rest ^= low
        else:
            return False
    return True
