from collections import Counter
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from cmapcache.combinat import binom
from cmapcache.model import (
    OutOfClassError, ParamError, brute_force_intersection_profile, construct_empty_witness, derive_params,
    factor_grid, find_empty_witness, intersection_class_check, params_from_factors, require_class,
    uniform_intersection_level,
)


def set_profile(p):
    """Set-based oracle for the intersection profile (no bitmasks, no shared enumeration code)."""
    ground = set(range(1, p.lam + 1))
    users = [frozenset(c) for c in combinations(sorted(ground), p.r)]
    tally = Counter()
    for u in users:
        for s in combinations(sorted(ground - u), p.t_a):
            cands = [v for v in users if not v & set(s) and v != u]
            for ts in combinations(cands, p.t_p):
                tally[len(u.intersection(*ts))] += 1
    return dict(tally)


def test_example1_derivation(ex1):
    assert (ex1.t_a, ex1.t_p, ex1.k_users, ex1.f) == (1, 2, 10, 30)


def test_fig2_derivation(fig2):
    assert (fig2.t_a, fig2.t_p, fig2.k_users) == (1, 1, 45)
    assert fig2.m_a == Fraction(9, 2)


@pytest.mark.parametrize("args,code", [
    ((5, 3, 2, "5/2", 10), "t_p_not_integer"),
    ((5, 3, "5/2", 2, 10), "t_a_not_integer"),
    ((5, 3, 2, 2, 9), "users_exceed_files"),
    ((5, 3, 6, 2, 10), "t_a_out_of_range"),
    ((5, 3, 2, 4, 10), "t_p_out_of_range"),
    ((5, 3, 2, 0, 10), "t_p_out_of_range"),
    ((5, 5, 2, 2, 10), "topology"),
    ((5, 0, 2, 2, 10), "topology"),
])
def test_derive_params_error_codes(args, code):
    with pytest.raises(ParamError) as e:
        derive_params(*args)
    assert e.value.code == code


def test_memory_constraint_error():
    # t_a = 2, t_p = 2 are individually admissible but r*Ma + Mp = 2*4 + 2 = N
    with pytest.raises(ParamError) as e:
        derive_params(5, 2, 4, 2, 10)
    assert e.value.code == "memory_out_of_range"


def test_float_and_string_memories_are_exact():
    assert derive_params(10, 8, 4.5, 1, 45) == derive_params(10, 8, "9/2", 1, 45)


def test_zero_access_memory_allowed():
    p = derive_params(5, 3, 0, 1, 10)
    assert p.t_a == 0 and p.f == binom(10, 1)


def test_example1_class_report(ex1):
    rep = intersection_class_check(ex1)
    assert rep.in_intersection_class and rep.threshold == Fraction(11, 2)
    assert rep.uniform_level == 1 and rep.witness is None


def test_out_of_class_witness_lam6():
    p = params_from_factors(6, 3, 1, 2, 30)
    rep = intersection_class_check(p)
    assert not rep.in_intersection_class
    user, idx = rep.witness
    assert idx.intersection(user) == ()
    assert not set(user) & set(idx.s) and user not in idx.t_list and len(idx.t_list) == 2
    assert 0 in set_profile(p)


def test_fig2_class(fig2):
    rep = intersection_class_check(fig2)
    assert rep.in_intersection_class and rep.threshold == 17 and rep.uniform_level == 7


def test_fig3_class(fig3):
    rep = intersection_class_check(fig3)
    assert rep.in_intersection_class and rep.uniform_level is None
    assert len(brute_force_intersection_profile(fig3)) >= 2


def test_boundary_witness_lam7():
    p = params_from_factors(7, 4, 1, 2)
    assert p.lam == p.threshold
    user, idx = construct_empty_witness(p)
    assert idx.s == (1,)
    assert all(len(q) == 4 for q in (user, *idx.t_list))
    assert set(user).intersection(*map(set, idx.t_list)) == set()
    assert intersection_class_check(p).witness == (user, idx)


@pytest.mark.parametrize("factors", [(6, 3, 1, 2), (7, 4, 1, 3)])
def test_construct_witness_precondition(factors):
    p = params_from_factors(*factors)
    with pytest.raises(ValueError):
        construct_empty_witness(p)


def test_boundary_points_all_give_verified_witness():
    hits = 0
    for p in factor_grid(10, in_class=False):
        if p.lam == p.threshold and p.r % p.t_p == 0:
            user, idx = construct_empty_witness(p)
            assert idx.intersection(user) == ()
            assert len(idx.s) == p.t_a and len(idx.t_list) == p.t_p
            hits += 1
    assert hits > 0


def test_profile_example1(ex1):
    assert brute_force_intersection_profile(ex1) == {1: 60}


@pytest.mark.parametrize("factors", [(5, 3, 1, 2), (5, 3, 0, 1), (6, 3, 1, 1), (6, 4, 1, 2), (6, 3, 1, 2),
                                     (7, 3, 2, 1), (5, 2, 1, 1), (6, 4, 0, 1)])
def test_profile_matches_set_oracle(factors):
    p = params_from_factors(*factors)
    assert brute_force_intersection_profile(p) == set_profile(p)


def test_profile_guard(fig2):
    with pytest.raises(ValueError):
        brute_force_intersection_profile(fig2, max_lambda=9)


@pytest.mark.parametrize("p", factor_grid(8), ids=lambda p: f"{p.lam}-{p.r}-{p.t_a}-{p.t_p}")
def test_class_condition_vs_search(p):
    """In class iff the exhaustive search finds no empty-intersection index."""
    in_class = p.lam < p.threshold
    w = find_empty_witness(p)
    assert (w is None) == in_class
    if w is not None:
        assert w[1].intersection(w[0]) == ()


@pytest.mark.parametrize("p", factor_grid(8, in_class=True), ids=lambda p: f"{p.lam}-{p.r}-{p.t_a}-{p.t_p}")
def test_profile_total_and_uniform_level(p):
    prof = brute_force_intersection_profile(p)
    assert sum(prof.values()) == p.total_demanded
    assert 0 not in prof
    i = uniform_intersection_level(p)
    if i is not None:
        assert list(prof) == [i]


def test_uniform_level_is_unique_window():
    for p in factor_grid(10, in_class=True):
        d = p.lam - p.t_a
        hits = [i for i in range(1, p.r) if binom(d - i - 1, p.r - i - 1) < p.t_p + 1 <= binom(d - i, p.r - i)]
        assert len(hits) <= 1


def test_require_class():
    with pytest.raises(OutOfClassError):
        require_class(params_from_factors(6, 3, 1, 2, 30))


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 8).flatmap(lambda lam: st.tuples(st.just(lam), st.integers(1, lam - 1))),
       st.integers(0, 6), st.integers(1, 10))
def test_derive_params_invariants(lr, t_a, t_p):
    lam, r = lr
    try:
        p = params_from_factors(lam, r, t_a, t_p)
    except ParamError:
        return
    assert 0 <= p.t_a <= lam - r and 1 <= p.t_p <= binom(lam - p.t_a, r) - 1
    assert p.k_users == binom(lam, r) <= p.n_files
    assert 0 < r * p.m_a + p.m_p < p.n_files
    assert p.f == binom(lam, p.t_a) * binom(binom(lam - p.t_a, r), p.t_p)
