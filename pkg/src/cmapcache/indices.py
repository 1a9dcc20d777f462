"""Mini-subfile indices, their canonical text form, and mask-level enumeration."""

from __future__ import annotations

import re
from functools import lru_cache
from itertools import combinations
from typing import Iterator, NamedTuple, Tuple

from .combinat import KSubset, from_mask, to_mask


class MiniSubfileIndex(NamedTuple):
    """Subfile index ``s`` (|s| = t_a) plus the t_p users caching it privately."""

    s: KSubset
    t_list: Tuple[KSubset, ...]

    @classmethod
    def make(cls, s, t_list) -> "MiniSubfileIndex":
        ts = tuple(sorted(tuple(sorted(t)) for t in t_list))
        if len(set(ts)) != len(ts):
            raise ValueError(f"repeated T-set in {ts}")
        s = tuple(sorted(s))
        for t in ts:
            if set(t) & set(s):
                raise ValueError(f"T-set {t} meets subfile index {s}")
        return cls(s, ts)

    def intersection(self, user: KSubset) -> KSubset:
        common = set(user)
        for t in self.t_list:
            common &= set(t)
        return tuple(sorted(common))

    def __str__(self) -> str:
        return f"S={fmt_set(self.s)}|T=" + ",".join(fmt_set(t) for t in self.t_list)


class MiniSubfileId(NamedTuple):
    file: int
    index: MiniSubfileIndex


# A demanded mini-subfile at the level the delivery works on: (demanding user, index).
Term = Tuple[KSubset, MiniSubfileIndex]


def fmt_set(s) -> str:
    return "{" + ",".join(str(x) for x in s) + "}"


def fmt_term(term: Term) -> str:
    user, idx = term
    return f"d[{','.join(str(x) for x in user)}]|{idx}"


_SET = r"\{([0-9,]*)\}"


def _parse_set(body: str) -> KSubset:
    return tuple(int(x) for x in body.split(",") if x)


def parse_index(text: str) -> MiniSubfileIndex:
    m = re.fullmatch(rf"S={_SET}\|T=((?:{_SET},?)*)", text.strip())
    if not m:
        raise ValueError(f"not a mini-subfile index: {text!r}")
    ts = [_parse_set(b) for b in re.findall(_SET, m.group(2))]
    return MiniSubfileIndex.make(_parse_set(m.group(1)), ts)


def parse_term(text: str) -> Term:
    m = re.fullmatch(r"d\[([0-9,]*)\]\|(.*)", text.strip())
    if not m:
        raise ValueError(f"not a term: {text!r}")
    return _parse_set(m.group(1)), parse_index(m.group(2))


# ---------- mask level ----------
# A term in mask form is (u, s, ts) with ts sorted descending, which is the
# lexicographic order of the T-sets (see combinat).

MaskTerm = Tuple[int, int, Tuple[int, ...]]


@lru_cache(maxsize=None)
def r_subset_masks(lam: int, r: int) -> tuple[int, ...]:
    return tuple(to_mask(c, lam) for c in combinations(range(1, lam + 1), r))


@lru_cache(maxsize=None)
def candidate_masks(lam: int, r: int, s_mask: int) -> tuple[int, ...]:
    """r-subsets of [lam] disjoint from s, lex order."""
    return tuple(m for m in r_subset_masks(lam, r) if not m & s_mask)


def iter_demand_masks(lam: int, r: int, t_a: int, t_p: int, u: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Demanded (s, ts) of user mask ``u`` in lexicographic order."""
    for s in r_subset_masks(lam, t_a):
        if s & u:
            continue
        cands = [m for m in candidate_masks(lam, r, s) if m != u]
        for ts in combinations(cands, t_p):
            yield s, ts


def term_to_masks(term: Term, lam: int) -> MaskTerm:
    user, idx = term
    ts = tuple(sorted((to_mask(t, lam) for t in idx.t_list), reverse=True))
    return to_mask(user, lam), to_mask(idx.s, lam), ts


def masks_to_term(mt: MaskTerm, lam: int) -> Term:
    u, s, ts = mt
    return from_mask(u, lam), MiniSubfileIndex(from_mask(s, lam), tuple(from_mask(t, lam) for t in ts))
