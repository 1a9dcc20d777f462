"""Closed-form rates and lower bounds, all as exact rationals.

The MAN and CMACC baselines are not derived here; they are the standard rates
of the single-cache scheme of Maddah-Ali and Niesen and of its combinatorial
multi-access extension, memory-shared linearly between integer points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Callable, Optional, Sequence

from .combinat import binom
from .model import SystemParams, require_class, uniform_intersection_level


def _exact_sum(p: SystemParams, i: int) -> int:
    """Collections of t_p+1 distinct r-subsets of [lam]\\S whose intersection is one fixed i-set."""
    d, r, t_p = p.lam - p.t_a, p.r, p.t_p
    return sum((-1) ** j * binom(d - i, j) * binom(binom(d - i - j, r - i - j), t_p + 1)
               for j in range(r - i))


def count_by_intersection(p: SystemParams, i: int) -> int:
    """Demanded mini-subfiles (over all users) whose intersection set has exactly i elements."""
    if not 1 <= i <= p.r - 1:
        raise ValueError(f"intersection size {i} outside [1, {p.r - 1}]")
    return binom(p.lam, p.t_a) * (p.t_p + 1) * binom(p.lam - p.t_a, i) * _exact_sum(p, i)


def theorem2_transmission_count(p: SystemParams) -> int:
    require_class(p)
    total = 0
    for i in range(1, p.r):
        per = (p.t_p + 1) * binom(p.t_a + i, p.t_a)
        q, rem = divmod(count_by_intersection(p, i), per)
        if rem:
            raise ArithmeticError(f"|I|={i}: {count_by_intersection(p, i)} terms not a multiple of {per}")
        total += q
    return total


def theorem2_rate(p: SystemParams) -> Fraction:
    require_class(p)
    denom_base = binom(p.n_candidates, p.t_p)
    return sum((Fraction(binom(p.lam - p.t_a, i) * _exact_sum(p, i), denom_base * binom(p.t_a + i, p.t_a))
                for i in range(1, p.r)), Fraction(0))


def corollary_rate(p: SystemParams) -> Optional[tuple[Fraction, int]]:
    """(rate, coding gain) for the uniform-intersection subclass, else None."""
    i = uniform_intersection_level(p)
    if i is None:
        return None
    g = (p.t_p + 1) * binom(p.t_a + i, p.t_a)
    return Fraction(p.n_candidates - p.t_p, g), g


def alpha_numerator(p: SystemParams) -> tuple[int, int]:
    """(|B_1|, |B_2|) of the generalized independent set behind the alpha bound."""
    lam, r, t_a, t_p, c = p.lam, p.r, p.t_a, p.t_p, p.n_candidates
    b1 = sum(binom(lam - r - i + 1, t_a) * binom(c - i, t_p) for i in range(1, lam - t_a - r + 2))
    b2 = sum(binom(c - m, t_p) for m in range(lam - t_a - r + 2, c + 1))
    return b1, b2


def alpha_bound_rate(p: SystemParams) -> Fraction:
    return Fraction(sum(alpha_numerator(p)), p.f)


@dataclass(frozen=True)
class CutSetEval:
    q: int
    best_s: int
    value: Fraction   # clamped at 0
    raw: Fraction


def cutset_bound(p: SystemParams) -> CutSetEval:
    # q is taken literally as min(lam + r - 1, lam), which is lam for every r >= 1
    q = min(p.lam + p.r - 1, p.lam)
    best_s, best = 1, None
    for s in range(1, p.k_users + 1):
        v = s - (q * p.m_a + s * p.m_p) / (p.n_files // s)
        if best is None or v > best:
            best_s, best = s, v
    return CutSetEval(q, best_s, max(best, Fraction(0)), best)


def _interpolate(t: Fraction, rate_at: Callable[[int], Fraction]) -> Fraction:
    lo = floor(t)
    if t == lo:
        return Fraction(rate_at(lo))
    frac = t - lo
    return (1 - frac) * rate_at(lo) + frac * rate_at(lo + 1)


def man_rate(memory, k: int, n: int) -> Fraction:
    """Single-cache rate (K - t)/(t + 1) at t = K*M/N, memory-shared between integer t."""
    memory = Fraction(memory)
    if not 0 <= memory <= n:
        raise ValueError(f"memory {memory} outside [0, {n}]")
    return _interpolate(k * memory / n, lambda t: Fraction(k - t, t + 1))


def cmacc_rate(memory, lam: int, r: int, n: int) -> Fraction:
    """Combinatorial multi-access rate C(lam, t+r)/C(lam, t) at t = lam*M/N, memory-shared."""
    memory = Fraction(memory)
    if not 0 <= memory <= n:
        raise ValueError(f"memory {memory} outside [0, {n}]")
    return _interpolate(lam * memory / n, lambda t: Fraction(binom(lam, t + r), binom(lam, t)))


def nk_ck_counts(p: SystemParams, k: int) -> tuple[int, int]:
    """(N_k, C_k): mini-subfiles counted once per k-subset of their intersection set, and exactly-k count.

    N_k = sum_m C(m, k) C_m, so C_k is recovered by binomial inversion over N_k..N_{r-1}.
    """
    if not 1 <= k <= p.r - 1:
        raise ValueError(f"k={k} outside [1, {p.r - 1}]")
    d = p.lam - p.t_a

    def n_at(m: int) -> int:
        return binom(p.lam, p.t_a) * binom(d, m) * (p.t_p + 1) * binom(binom(d - m, p.r - m), p.t_p + 1)

    c_k = sum((-1) ** j * binom(k + j, k) * n_at(k + j) for j in range(p.r - k))
    return n_at(k), c_k


class Envelope:
    """Lower convex envelope of (memory, rate) points, evaluated by linear interpolation."""

    def __init__(self, points: Sequence[tuple]):
        pts = sorted((Fraction(m), Fraction(v)) for m, v in points)
        if len(pts) < 2 or len({m for m, _ in pts}) != len(pts):
            raise ValueError("need at least two points with distinct memories")
        hull: list[tuple[Fraction, Fraction]] = []
        for pt in pts:
            while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
                hull.pop()
            hull.append(pt)
        self.vertices = hull

    def __call__(self, memory) -> Fraction:
        m = Fraction(memory)
        lo, hi = self.vertices[0][0], self.vertices[-1][0]
        if not lo <= m <= hi:
            raise ValueError(f"memory {m} outside [{lo}, {hi}]")
        for (m0, v0), (m1, v1) in zip(self.vertices, self.vertices[1:]):
            if m0 <= m <= m1:
                return v0 + (v1 - v0) * (m - m0) / (m1 - m0)
        return self.vertices[0][1]


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def rate_envelope(points: Sequence[tuple]) -> Envelope:
    return Envelope(points)


@dataclass(frozen=True)
class RateReport:
    scheme_rate: Optional[Fraction]
    corollary_rate: Optional[Fraction]
    alpha_bound: Fraction
    cutset: CutSetEval
    man_lower: Fraction
    cmacc_upper: Fraction
    coding_gain: Optional[int]

    @property
    def cutset_bound(self) -> Fraction:
        return self.cutset.value


def rate_report(p: SystemParams) -> RateReport:
    """All rates for one parameter point; scheme columns are None outside the intersection class."""
    in_class = p.lam < p.threshold
    cor = corollary_rate(p) if in_class else None
    return RateReport(
        scheme_rate=theorem2_rate(p) if in_class else None,
        corollary_rate=cor[0] if cor else None,
        alpha_bound=alpha_bound_rate(p),
        cutset=cutset_bound(p),
        man_lower=man_rate(p.r * p.m_a + p.m_p, p.k_users, p.n_files),
        cmacc_upper=cmacc_rate(p.m_a + p.m_p / p.r, p.lam, p.r, p.n_files),
        coding_gain=cor[1] if cor else None,
    )
