"""System parameters and intersection-class membership.

A (lam, r, Ma, Mp, N) system has K = C(lam, r) users, one per r-subset of the
lam access caches.  Access replication t_a = lam*Ma/N and private replication
t_p = K*Mp/N must both be integers.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Union

from .combinat import binom, from_mask
from .indices import MiniSubfileIndex, Term, candidate_masks, iter_demand_masks, r_subset_masks

Rational = Union[int, str, float, Fraction]


class ParamError(ValueError):
    """Invalid system parameters; ``code`` names the violated constraint."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class OutOfClassError(ValueError):
    """Operation defined only inside the intersection class (lam < t_a + r + r/t_p)."""


def require_class(p: "SystemParams") -> None:
    if not p.lam < p.threshold:
        raise OutOfClassError(
            f"{p.label()} is outside the intersection class: lambda={p.lam} >= {p.threshold}")


def as_fraction(x: Rational) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class SystemParams:
    lam: int
    r: int
    m_a: Fraction
    m_p: Fraction
    n_files: int
    t_a: int
    t_p: int
    k_users: int
    subpacketization: int

    @property
    def f(self) -> int:
        return self.subpacketization

    @property
    def n_candidates(self) -> int:
        """Number of users demanding any one subfile, C(lam - t_a, r)."""
        return binom(self.lam - self.t_a, self.r)

    @property
    def threshold(self) -> Fraction:
        return self.t_a + self.r + Fraction(self.r, self.t_p)

    @property
    def total_demanded(self) -> int:
        """Demanded mini-subfiles summed over all users (all-distinct demands)."""
        return self.k_users * binom(self.lam - self.r, self.t_a) * binom(self.n_candidates - 1, self.t_p)

    def label(self) -> str:
        return f"lam={self.lam} r={self.r} Ma={self.m_a} Mp={self.m_p} N={self.n_files}"


def derive_params(lam: int, r: int, m_a: Rational, m_p: Rational, n_files: int) -> SystemParams:
    m_a, m_p = as_fraction(m_a), as_fraction(m_p)
    if not 1 <= r < lam:
        raise ParamError("topology", f"need 1 <= r < lambda, got r={r}, lambda={lam}")
    if n_files < 1 or m_a < 0 or m_p < 0:
        raise ParamError("topology", "N must be positive and cache sizes non-negative")
    k = binom(lam, r)
    if k > n_files:
        raise ParamError("users_exceed_files", f"K={k} users but only N={n_files} files")
    t_a = lam * m_a / n_files
    if t_a.denominator != 1:
        raise ParamError("t_a_not_integer", f"t_a = lambda*Ma/N = {t_a}")
    t_p = k * m_p / n_files
    if t_p.denominator != 1:
        raise ParamError("t_p_not_integer", f"t_p = K*Mp/N = {t_p}")
    t_a, t_p = int(t_a), int(t_p)
    if t_a > lam - r:
        raise ParamError("t_a_out_of_range", f"t_a={t_a} exceeds lambda-r={lam - r}")
    cands = binom(lam - t_a, r)
    if not 1 <= t_p <= cands - 1:
        raise ParamError("t_p_out_of_range", f"t_p={t_p} outside [1, {cands - 1}]")
    if not 0 < r * m_a + m_p < n_files:
        raise ParamError("memory_out_of_range", f"r*Ma+Mp = {r * m_a + m_p} not in (0, {n_files})")
    return SystemParams(lam, r, m_a, m_p, n_files, t_a, t_p, k, binom(lam, t_a) * binom(cands, t_p))


def params_from_factors(lam: int, r: int, t_a: int, t_p: int, n_files: Optional[int] = None) -> SystemParams:
    """Convenience: pick Ma, Mp realising the given replication factors (N defaults to K)."""
    n = binom(lam, r) if n_files is None else n_files
    return derive_params(lam, r, Fraction(t_a * n, lam), Fraction(t_p * n, binom(lam, r)), n)


@dataclass(frozen=True)
class ClassReport:
    in_intersection_class: bool
    threshold: Fraction
    uniform_level: Optional[int] = None
    witness: Optional[Term] = None


def intersection_class_check(p: SystemParams) -> ClassReport:
    threshold = p.threshold
    if p.lam < threshold:
        return ClassReport(True, threshold, uniform_intersection_level(p))
    if p.lam == threshold and p.r % p.t_p == 0:
        return ClassReport(False, threshold, witness=construct_empty_witness(p))
    return ClassReport(False, threshold, witness=find_empty_witness(p))


def construct_empty_witness(p: SystemParams) -> Term:
    """Empty-intersection mini-subfile on the class boundary lam = t_a + r + r/t_p.

    [lam] \\ S is cut into t_p+1 consecutive blocks of size r/t_p; each Q_i is
    [lam] minus S and the i-th block.  Q_1 is the user, the rest the T-sets.
    """
    if p.r % p.t_p or p.lam != p.threshold:
        raise ValueError(f"needs t_p | r and lambda = t_a + r + r/t_p ({p.label()})")
    s = tuple(range(1, p.t_a + 1))
    rest = list(range(p.t_a + 1, p.lam + 1))
    width = p.r // p.t_p
    blocks = [set(rest[i:i + width]) for i in range(0, len(rest), width)]
    qs = [tuple(x for x in rest if x not in b) for b in blocks]
    user, ts = qs[0], qs[1:]
    return user, MiniSubfileIndex.make(s, ts)


def find_empty_witness(p: SystemParams) -> Optional[Term]:
    """First empty-intersection mini-subfile, lexicographic over (S, U, T-list)."""
    for s in r_subset_masks(p.lam, p.t_a):
        cands = candidate_masks(p.lam, p.r, s)
        for u in cands:
            others = [m for m in cands if m != u]
            for ts in combinations(others, p.t_p):
                acc = u
                for t in ts:
                    acc &= t
                if not acc:
                    idx = MiniSubfileIndex(from_mask(s, p.lam), tuple(from_mask(t, p.lam) for t in ts))
                    return from_mask(u, p.lam), idx
    return None


def uniform_intersection_level(p: SystemParams) -> Optional[int]:
    """Intersection size i shared by every demanded mini-subfile, when the sufficient condition holds."""
    d, r, t_p = p.lam - p.t_a, p.r, p.t_p
    for i in range(1, r):
        window = binom(d - i - 1, r - i - 1) < t_p + 1 <= binom(d - i, r - i)
        if not window:
            continue
        if binom(r, i) * binom(binom(d - i, r - i) - 1, t_p) == binom(binom(d, r) - 1, t_p):
            return i
    return None


def brute_force_intersection_profile(p: SystemParams, max_lambda: int = 12) -> dict[int, int]:
    """Tally |I| = |U ∩ T_1 ∩ ... ∩ T_tp| over every demanded mini-subfile."""
    if p.lam > max_lambda:
        raise ValueError(f"lambda={p.lam} exceeds brute-force guard {max_lambda}")
    tally: Counter[int] = Counter()
    for u in r_subset_masks(p.lam, p.r):
        for _, ts in iter_demand_masks(p.lam, p.r, p.t_a, p.t_p, u):
            acc = u
            for t in ts:
                acc &= t
            tally[acc.bit_count()] += 1
    return dict(sorted(tally.items()))


def factor_grid(max_lambda: int, in_class: Optional[bool] = None, min_lambda: int = 2) -> list[SystemParams]:
    """Every admissible (lam, r, t_a, t_p) with N = K, in lex order; optionally filtered by class membership."""
    out = []
    for lam in range(min_lambda, max_lambda + 1):
        for r in range(1, lam):
            for t_a in range(0, lam - r + 1):
                for t_p in range(1, binom(lam - t_a, r)):
                    try:
                        p = params_from_factors(lam, r, t_a, t_p)
                    except ParamError:
                        continue
                    if in_class is None or (lam < p.threshold) == in_class:
                        out.append(p)
    return out
