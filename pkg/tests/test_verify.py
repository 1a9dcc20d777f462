from itertools import combinations

import pytest

from cmapcache.bounds import alpha_numerator
from cmapcache.combinat import k_subsets
from cmapcache.delivery import DemandVector, Transmission, run_delivery
from cmapcache.indices import MiniSubfileIndex
from cmapcache.model import factor_grid, params_from_factors
from cmapcache.placement import build_layout, demand_set, user_known_set
from cmapcache.verify import (
    DecodeError, PayloadConfig, PayloadMismatch, alpha_witness_parts, alpha_witness_set, build_icp,
    check_generalized_independent, decode_all, decode_payload, decode_user, gf2_decodable,
)


def term(u, s, *ts):
    return tuple(u), MiniSubfileIndex.make(s, ts)


def test_walkthrough_user_123_transmission_1(ex1):
    layout = build_layout(ex1)
    tx = run_delivery(ex1)[0]
    known = user_known_set(ex1, layout, (1, 2, 3))
    unknown = [(v, i) for v, i in tx.terms if i not in known or v == (1, 2, 3)]
    assert unknown == [term((1, 2, 3), (4,), (1, 2, 5), (1, 3, 5))]
    via_access = [(v, i) for v, i in tx.terms if set(i.s) & {1, 2, 3}]
    via_private = [(v, i) for v, i in tx.terms if v != (1, 2, 3) and i in layout.private_cache((1, 2, 3))]
    assert len(via_access) == 3 and len(via_private) == 2
    got = decode_user(ex1, layout, (1, 2, 3), [tx], strict=False)
    assert got == {MiniSubfileIndex.make((4,), [(1, 2, 5), (1, 3, 5)])}


def test_example1_every_user_decodes(ex1):
    layout = build_layout(ex1)
    sched = run_delivery(ex1)
    got = decode_all(ex1, layout, sched)
    for u in k_subsets(5, 3):
        assert got[u] == set(demand_set(ex1, u))
        assert gf2_decodable(ex1, layout, u, sched) == got[u]


def test_empty_schedule(ex1):
    assert decode_user(ex1, None, (1, 2, 3), [], strict=False) == set()
    with pytest.raises(DecodeError) as e:
        decode_user(ex1, None, (1, 2, 3), [])
    assert e.value.transmission is None


def test_stuck_transmission_is_reported(ex1):
    sched = run_delivery(ex1)
    merged = Transmission.of(sched[0].terms + sched[1].terms)
    bad = [merged] + sched[2:]
    with pytest.raises(DecodeError) as e:
        decode_user(ex1, None, (1, 2, 3), bad)
    assert e.value.transmission == merged
    assert gf2_decodable(ex1, None, (1, 2, 3), bad) != set(demand_set(ex1, (1, 2, 3)))


def test_gf2_succeeds_where_peeling_stalls(ex1):
    a, b, c = [((1, 2, 3), i) for i in demand_set(ex1, (1, 2, 3))[:3]]
    sched = [Transmission.of([a, b, c]), Transmission.of([a, b]), Transmission.of([b, c])]
    assert decode_user(ex1, None, (1, 2, 3), sched, strict=False) == set()
    assert gf2_decodable(ex1, None, (1, 2, 3), sched) == {a[1], b[1], c[1]}


def test_layout_and_rule_side_information_agree(small):
    sched = run_delivery(small)
    assert decode_all(small, build_layout(small), sched) == decode_all(small, None, sched)


def test_peeling_and_gf2_agree(small):
    sched = run_delivery(small)
    got = decode_all(small, None, sched)
    for u in k_subsets(small.lam, small.r):
        assert got[u] == set(demand_set(small, u)) == gf2_decodable(small, None, u, sched)


@pytest.mark.parametrize("seed", [0, 7])
def test_payload_example1(ex1, seed):
    layout = build_layout(ex1)
    sched = run_delivery(ex1)
    out = decode_payload(ex1, layout, None, sched, PayloadConfig(30, seed))
    assert len(out) == 10 and all(v < 1 << 30 for v in out.values())
    again = decode_payload(ex1, layout, None, sched, PayloadConfig(30, seed))
    assert out == again


def test_payload_reconstructs_ground_truth_bits(ex1):
    # B = 60 -> 2 bits per mini-subfile
    sched = run_delivery(ex1)
    d = DemandVector.worst_case(ex1)
    a = decode_payload(ex1, None, d, sched, PayloadConfig(60, 3))
    # with identical requests every user must rebuild the same 60-bit file
    same = DemandVector({u: 1 for u in k_subsets(5, 3)})
    b = decode_payload(ex1, None, same, sched, PayloadConfig(60, 3))
    assert len(set(b.values())) == 1
    assert b[(1, 2, 3)] == a[(1, 2, 3)]


def test_payload_fault_injection(ex1):
    sched = run_delivery(ex1)
    with pytest.raises(PayloadMismatch):
        decode_payload(ex1, None, None, sched, PayloadConfig(30, 0), corrupt=(4, 0))


def test_payload_config_validation(ex1):
    with pytest.raises(ValueError):
        PayloadConfig(31).block_bits(ex1)
    with pytest.raises(ValueError):
        PayloadConfig(0).block_bits(ex1)


def side_oracle(p, user, message):
    v, idx = message
    return v != user and (bool(set(idx.s) & set(user)) or user in idx.t_list)


def test_icp_example1(ex1):
    icp = build_icp(ex1, build_layout(ex1))
    assert len(icp.messages) == 60 and len(icp.wanted) == 10
    assert all(len(w) == 6 for w in icp.wanted.values())
    k = icp.position[term((2, 3, 4), (1,), (2, 4, 5), (3, 4, 5))]
    assert k in icp.side[(1, 2, 3)]
    for u in k_subsets(5, 3):
        assert not icp.wanted[u] & icp.side[u]
        assert icp.side[u] == {j for j, m in enumerate(icp.messages) if side_oracle(ex1, u, m)}


def test_icp_requires_distinct_demands(ex1):
    with pytest.raises(ValueError):
        build_icp(ex1, None, DemandVector({u: 1 for u in k_subsets(5, 3)}))


def test_alpha_witness_example1(ex1):
    b1, b2 = alpha_witness_parts(ex1)
    assert (len(b1), len(b2)) == (7, 0)
    witness = alpha_witness_set(ex1)
    assert len(witness) == 7
    icp = build_icp(ex1, None)
    assert check_generalized_independent(icp, icp.ids_of(witness))


def test_independence_two_messages_of_one_receiver(ex1):
    icp = build_icp(ex1, None)
    a, b = sorted(icp.wanted[(1, 2, 3)])[:2]
    assert check_generalized_independent(icp, [a, b])


def test_independence_fails_on_mutual_side_information(ex1):
    icp = build_icp(ex1, None)
    pair = next((a, b) for a, b in combinations(range(len(icp.messages)), 2)
                if a in icp.side[icp.owner(b)] and b in icp.side[icp.owner(a)])
    assert not check_generalized_independent(icp, pair)


def test_independence_guard(ex1):
    icp = build_icp(ex1, None)
    with pytest.raises(ValueError):
        check_generalized_independent(icp, range(21))


ALPHA_GRID = [p for p in factor_grid(12) if sum(alpha_numerator(p)) <= 3000]


@pytest.mark.parametrize("p", ALPHA_GRID, ids=lambda p: f"{p.lam}-{p.r}-{p.t_a}-{p.t_p}")
def test_alpha_witness_matches_closed_form(p):
    b1, b2 = alpha_witness_parts(p)
    n1, n2 = alpha_numerator(p)
    assert (len(b1), len(b2)) == (n1, n2)
    union = alpha_witness_set(p)
    assert len(union) == n1 + n2
    for v, idx in union:
        assert not set(v) & set(idx.s) and v not in idx.t_list and len(idx.t_list) == p.t_p


@pytest.mark.parametrize("p", [p for p in factor_grid(8) if sum(alpha_numerator(p)) <= 14 and p.total_demanded <= 5000],
                         ids=lambda p: f"{p.lam}-{p.r}-{p.t_a}-{p.t_p}")
def test_alpha_witness_independent(p):
    icp = build_icp(p, None)
    assert check_generalized_independent(icp, icp.ids_of(alpha_witness_set(p)))


def test_decodability_fig2_tp3():
    p = params_from_factors(10, 8, 1, 3, 45)
    sched = run_delivery(p)
    got = decode_all(p, None, sched)
    users = k_subsets(10, 8)
    assert all(got[u] == set(demand_set(p, u)) for u in users)
    assert all(gf2_decodable(p, None, u, sched) == got[u] for u in users[:5])
