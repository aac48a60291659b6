"""Shared fixtures and independent checkers for the test suite.

Everything here recomputes results from raw valuations and explicit
enumeration, deliberately avoiding the library's demand and pricing
helpers, so that agreement between the two is evidence rather than
tautology.
"""
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Tuple

from cwemarket import (
    Auction,
    Catalog,
    RaiseReport,
    brute_force_optimal,
    generate,
)

BundleSet = FrozenSet[int]


def seed_instance(seed: int):
    """Deterministic small random instance plus a welfare-optimal seed.

    Sizes cycle through m in 2..5 and n in 2..5 as the seed grows, so a
    contiguous seed range covers the whole grid.
    """
    m = 2 + seed % 4
    n = 2 + (seed // 4) % 4
    auction, _ = generate("random_explicit", m=m, n=n, seed=seed)
    _, alloc = brute_force_optimal(auction)
    seed_alloc = {a: s for a, s in alloc.items() if s}
    return auction, seed_alloc


def seed_welfare(auction: Auction, allocation) -> Fraction:
    return sum(
        (auction.valuation(a).value(s) for a, s in allocation.items()),
        Fraction(0),
    )


def raw_utility(
    auction: Auction,
    agent: str,
    bundle_set,
    catalog: Catalog,
    prices,
) -> Fraction:
    """Utility computed straight from the valuation and a price sum."""
    items = frozenset()
    total = Fraction(0)
    for bid, bundle_items in catalog.entries:
        if bid in bundle_set:
            items |= bundle_items
            total += prices[bid]
    return auction.valuation(agent).value(items) - total


def best_avoiding(
    auction: Auction,
    agent: str,
    catalog: Catalog,
    prices,
    banned,
) -> Tuple[Fraction, List[BundleSet]]:
    """Exhaustive demand: max utility and all argmax bundle sets over
    bundles outside `banned`.  The empty set always competes, so the
    max is at least zero.
    """
    ids = [bid for bid, _ in catalog.entries if bid not in banned]
    best = Fraction(0)
    table: List[Tuple[BundleSet, Fraction]] = [(frozenset(), Fraction(0))]
    for r in range(1, len(ids) + 1):
        for combo in combinations(ids, r):
            s = frozenset(combo)
            u = raw_utility(auction, agent, s, catalog, prices)
            table.append((s, u))
            if u > best:
                best = u
    members = [s for s, u in table if u == best]
    members.sort(key=lambda s: (len(s), sorted(s)))
    return best, members


def pick_preferred(candidates, agent: str, assignment) -> BundleSet:
    """The deterministic choice among tied demand sets: fewest bundles
    held by other agents, then fewest bundles, then smallest ids.
    """

    def key(s):
        overlap = sum(
            len(s & held)
            for name, held in assignment.items()
            if name != agent
        )
        return (overlap, len(s), sorted(s))

    return min(candidates, key=key)


def sweep_raise_oracle(auction: Auction, report: RaiseReport):
    """Continuous-time reconstruction of one price push.

    All bundles held by still-active agents rise at unit rate, so each
    holder's margin over its best fixed-price option falls at unit rate
    and hits zero at a breakpoint equal to the margin itself.  The
    earliest breakpoint (ties to the lowest agent index) freezes that
    holder: its bundle stops rising, it records its switch-to set, and
    the sweep continues with one fewer riser.  Returns the final
    prices, the recorded switch-to sets, and the freeze order.
    """
    catalog = report.catalog
    prices = dict(report.prices_before)
    assignment = {a: frozenset(s) for a, s in report.assignment.items()}
    active = [a for a in auction.agent_names if a in assignment]
    order: List[str] = []
    fallbacks: Dict[str, BundleSet] = {}
    while active:
        banned = frozenset().union(*(assignment[a] for a in active))
        margins: Dict[str, Fraction] = {}
        choices: Dict[str, BundleSet] = {}
        for a in active:
            own = assignment[a]
            u_own = raw_utility(auction, a, own, catalog, prices)
            best, members = best_avoiding(auction, a, catalog, prices, banned)
            assert u_own >= best, (a, u_own, best)
            margins[a] = u_own - best
            choices[a] = pick_preferred(members, a, assignment)
        leaver = min(
            active, key=lambda a: (margins[a], auction.agent_index(a))
        )
        dt = margins[leaver]
        if dt > 0:
            for a in active:
                (bid,) = tuple(assignment[a])
                prices[bid] = prices[bid] + dt
        fallbacks[leaver] = choices[leaver]
        order.append(leaver)
        active.remove(leaver)
    return prices, fallbacks, tuple(order)


def check_push_matches_oracle(auction: Auction, report: RaiseReport) -> None:
    prices, fallbacks, order = sweep_raise_oracle(auction, report)
    assert prices == report.prices_after, (prices, report.prices_after)
    assert fallbacks == report.fallbacks, (fallbacks, report.fallbacks)
    assert order == report.removal_order, (order, report.removal_order)


def check_push_maximality(auction: Auction, report: RaiseReport) -> None:
    """After a push, every holder's utility equals the best it could do
    with any bundle set avoiding its own bundle (or zero).
    """
    for agent, own in report.assignment.items():
        u_own = raw_utility(auction, agent, own, report.catalog, report.prices_after)
        best, _ = best_avoiding(
            auction, agent, report.catalog, report.prices_after, frozenset(own)
        )
        assert u_own == best, (agent, u_own, best)


def brute_stability_violation(auction: Auction, outcome) -> Optional[str]:
    """Exhaustive stability check from raw valuations: every agent's
    held set must attain its exhaustive maximum utility over bundle
    sets not held by others, with the empty set always available.
    Returns a description of a violation, or None.
    """
    held_by = {}
    for agent, bundles in outcome.assignment.items():
        for bid in bundles:
            held_by[bid] = agent
    for agent in auction.agent_names:
        own = frozenset(outcome.assignment.get(agent, frozenset()))
        banned = frozenset(
            bid for bid, holder in held_by.items() if holder != agent
        )
        u_own = raw_utility(auction, agent, own, outcome.catalog, outcome.prices)
        best, _ = best_avoiding(
            auction, agent, outcome.catalog, outcome.prices, banned
        )
        if u_own < best:
            return f"{agent} gets {u_own} but could get {best}"
    return None
