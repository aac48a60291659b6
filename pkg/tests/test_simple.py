from fractions import Fraction

import pytest

from cwemarket import (
    AdditiveValuation,
    Agent,
    Auction,
    InputError,
    brute_force_optimal,
    generate,
    is_cwe,
    replay,
    run_simple,
    social_welfare,
)
from cwemarket.simple import check_epsilon
from cwemarket.trace import Assign, PoolAdd, PriceRaise, Reject, Unassign

from .helpers import seed_welfare

F = Fraction


def one_item(*values):
    items = frozenset({"1"})
    agents = tuple(
        Agent(chr(ord("A") + k), AdditiveValuation(items, {"1": F(v)}))
        for k, v in enumerate(values)
    )
    return Auction(items=items, agents=agents)


class TestEpsilonContract:
    def test_epsilon_must_be_positive(self):
        auction = one_item(1)
        with pytest.raises(InputError, match="positive"):
            check_epsilon(auction, F(0))
        with pytest.raises(InputError, match="positive"):
            check_epsilon(auction, F(-1, 4))

    def test_epsilon_at_most_half_granularity(self):
        auction = one_item(1)  # granularity 1
        check_epsilon(auction, F(1, 2))
        with pytest.raises(InputError, match="exceeds"):
            check_epsilon(auction, F(2, 3))
        with pytest.raises(InputError, match="exceeds"):
            check_epsilon(auction, F(2))

    def test_epsilon_must_divide_half_granularity(self):
        auction = one_item(1)
        check_epsilon(auction, F(1, 4))
        check_epsilon(auction, F(1, 6))
        with pytest.raises(InputError, match="divide"):
            check_epsilon(auction, F(1, 3))
        with pytest.raises(InputError, match="divide"):
            check_epsilon(auction, F(2, 5))

    def test_zero_values_accept_any_positive_epsilon(self):
        auction = one_item(0, 0)
        check_epsilon(auction, F(17, 3))
        check_epsilon(auction, F(1000))

    def test_run_rejects_bad_epsilon(self):
        auction = one_item(1)
        with pytest.raises(InputError):
            run_simple(auction, {"A": frozenset({"1"})}, F(2))


def test_single_agent_buys_at_seed_price():
    auction = one_item(1)
    out, trace = run_simple(auction, {"A": frozenset({"1"})}, F(1, 2))
    assert out.assignment == {"A": frozenset({0})}
    assert out.prices == {0: F(1, 2)}
    assert trace.iterations == 1
    assert trace.demand_queries == 1


def test_symmetric_tie_hands_the_bundle_to_the_claimant():
    # both agents value the item at 1; the price walks up to the exact
    # common indifference point, then the trial step that would push
    # both away is rolled back and the claimant takes over
    auction = one_item(1, 1)
    out, trace = run_simple(auction, {"A": frozenset({"1"})}, F(1, 4))
    assert out.assignment == {"B": frozenset({0})}
    assert out.prices == {0: F(1)}
    assert trace.iterations == 3
    assert trace.demand_queries == 15
    raises = [e for e in trace.events if isinstance(e, PriceRaise)]
    assert [(e.old, e.new) for e in raises] == [(F(1, 2), F(3, 4)), (F(3, 4), F(1))]
    # the incumbent is released, re-pooled, and then leaves empty-handed
    tail = [e for e in trace.events if isinstance(e, (Unassign, PoolAdd, Reject))]
    assert tail[-3:] == [Unassign("A"), PoolAdd("A"), Reject("A")]
    assert is_cwe(auction, out)


def test_asymmetric_conflict_prices_out_the_lower_value():
    # A values the item at 2, B at 1, B seeds it at 1/2; the conflict
    # walks the price past B's indifference point and A keeps the item
    auction = one_item(2, 1)
    out, trace = run_simple(auction, {"B": frozenset({"1"})}, F(1, 8))
    assert out.assignment == {"A": frozenset({0})}
    assert out.prices == {0: F(9, 8)}
    raises = [(e.old, e.new) for e in trace.events if isinstance(e, PriceRaise)]
    assert raises == [
        (F(1, 2), F(5, 8)),
        (F(5, 8), F(3, 4)),
        (F(3, 4), F(7, 8)),
        (F(7, 8), F(1)),
        (F(1), F(9, 8)),
    ]
    assert trace.iterations == 3
    assert is_cwe(auction, out)


def test_three_agent_merge_run_frozen():
    auction, seed = generate("gap3")
    out, trace = run_simple(auction, seed, F(1, 20))
    assert [(bid, sorted(items)) for bid, items in out.catalog.entries] == [
        (4, ["1", "2", "3"])
    ]
    assert out.prices == {4: F(21, 10)}
    assert out.assignment == {"a1": frozenset({4})}
    assert social_welfare(auction, out) == F(21, 10)
    assert trace.iterations == 5
    assert trace.demand_queries == 57
    rebuilt = replay(auction, seed, trace)
    assert rebuilt.prices == out.prices
    assert rebuilt.assignment == out.assignment


def test_exact_tie_lattice_regression():
    # this instance once drove conflict resolution in circles: every
    # maximizer of one agent was an exact tie held by another agent,
    # and each trial raise dropped both sides at once.  The hand-over
    # rule resolves it with full welfare.
    auction, _ = generate("random_explicit", m=3, n=4, seed=25)
    _, alloc = brute_force_optimal(auction)
    seed = {a: s for a, s in alloc.items() if s}
    g = auction.granularity()
    assert g == F(1, 64)
    out, trace = run_simple(auction, seed, g / 2)
    assert is_cwe(auction, out)
    assert social_welfare(auction, out) == F(147, 64)
    assert social_welfare(auction, out) == seed_welfare(auction, seed)
    assert out.prices == {0: F(45, 64), 1: F(39, 64), 2: F(3, 8)}
    assert out.assignment == {
        "r1": frozenset({0}),
        "r2": frozenset({1}),
        "r3": frozenset({2}),
    }
    assert trace.iterations == 17
    rebuilt = replay(auction, seed, trace)
    assert rebuilt.prices == out.prices
    assert rebuilt.assignment == out.assignment


def test_prices_never_decrease_and_merges_only_coarsen():
    auction, seed = generate("gap3")
    _, trace = run_simple(auction, seed, F(1, 20))
    for ev in trace.events:
        if isinstance(ev, PriceRaise):
            assert ev.new > ev.old


def test_seed_welfare_guarantee_on_generated_instances():
    for s in [3, 11, 19, 42]:
        auction, _ = generate("random_explicit", m=3, n=3, seed=s)
        _, alloc = brute_force_optimal(auction)
        seed = {a: x for a, x in alloc.items() if x}
        g = auction.granularity()
        out, _ = run_simple(auction, seed, g / 2)
        assert is_cwe(auction, out)
        assert 2 * social_welfare(auction, out) >= seed_welfare(auction, seed)


def test_rejection_only_at_nonpositive_utility():
    # the rejected agent in the symmetric run has max utility exactly 0
    auction = one_item(1, 1)
    out, trace = run_simple(auction, {"A": frozenset({"1"})}, F(1, 4))
    rejected = [e.agent for e in trace.events if isinstance(e, Reject)]
    assert rejected == ["A"]
    # at final prices the rejected agent cannot gain
    assert out.prices[0] >= F(1)
