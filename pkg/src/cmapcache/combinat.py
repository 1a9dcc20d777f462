"""Exact k-subset combinatorics over 1-based ground sets [n] = {1, ..., n}.

Subsets are plain tuples of strictly increasing ints.  The delivery engine
also works on bitmasks; the mask convention here is big-endian (element ``e``
of ``[n]`` maps to bit ``n - e``) so that, for sets of equal size, ascending
lexicographic order of the sorted element lists is *descending* mask order.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Tuple

KSubset = Tuple[int, ...]


def binom(n: int, k: int) -> int:
    """Binomial coefficient with the convention C(n, k) = 0 when n < 0, k < 0 or n < k."""
    if n < 0 or k < 0 or n < k:
        return 0
    return comb(n, k)


def k_subsets(n: int, k: int) -> list[KSubset]:
    """All k-subsets of [n] in lexicographic order."""
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return list(combinations(range(1, n + 1), k))


def iter_k_subsets(ground: Iterable[int], k: int) -> Iterator[KSubset]:
    """k-subsets of an arbitrary sorted ground set, lexicographic."""
    return combinations(sorted(ground), k)


def check_subset(s: Iterable[int], n: int, k: int | None = None) -> KSubset:
    """Validate and return ``s`` as a KSubset of [n] (optionally of size k)."""
    t = tuple(s)
    if any(b <= a for a, b in zip(t, t[1:])):
        raise ValueError(f"subset {t} is not strictly increasing")
    if t and (t[0] < 1 or t[-1] > n):
        raise ValueError(f"subset {t} not contained in [1, {n}]")
    if k is not None and len(t) != k:
        raise ValueError(f"subset {t} has size {len(t)}, expected {k}")
    return t


def lex_rank(s: Iterable[int], n: int) -> int:
    """1-based position of ``s`` among the |s|-subsets of [n] in lex order."""
    s = check_subset(s, n)
    k = len(s)
    rank = 0
    prev = 0
    for pos, x in enumerate(s):
        # subsets that agree on s[:pos] but take a smaller element here
        for y in range(prev + 1, x):
            rank += binom(n - y, k - pos - 1)
        prev = x
    return rank + 1


def lex_unrank(rank: int, n: int, k: int) -> KSubset:
    """Inverse of :func:`lex_rank`."""
    total = binom(n, k)
    if not 1 <= rank <= total:
        raise ValueError(f"rank {rank} outside [1, {total}] for n={n}, k={k}")
    rest = rank - 1
    out = []
    x = 1
    for pos in range(k):
        while True:
            block = binom(n - x, k - pos - 1)
            if rest < block:
                break
            rest -= block
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


# ---------- bitmask helpers (big-endian, see module docstring) ----------

def to_mask(s: Iterable[int], n: int) -> int:
    m = 0
    for e in s:
        m |= 1 << (n - e)
    return m


@lru_cache(maxsize=1 << 16)
def from_mask(m: int, n: int) -> KSubset:
    return tuple(e for e in range(1, n + 1) if m >> (n - e) & 1)


def mask_subsets(m: int, k: int) -> list[int]:
    """All k-subsets of the bits of ``m`` as masks, lex order of element lists."""
    bits = [1 << i for i in range(m.bit_length() - 1, -1, -1) if m >> i & 1]
    return [sum(c) for c in combinations(bits, k)]
