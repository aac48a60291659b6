"""Randomized and enumerative checks of the structural invariants."""
import itertools
import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from cwemarket import (
    AdditiveValuation,
    Agent,
    Auction,
    Catalog,
    SingleMindedValuation,
    UnitDemandValuation,
    XosValuation,
    demand_correspondence,
    generate,
    induced_value,
    utility,
)
from cwemarket.partitions import set_partitions

F = Fraction

ITEMS = tuple("abcde")
UNIVERSE = frozenset(ITEMS)


def _random_valuation(rng):
    kind = rng.randrange(4)
    weights = {it: F(rng.randint(0, 32), 8) for it in ITEMS}
    if kind == 0:
        return AdditiveValuation(UNIVERSE, weights)
    if kind == 1:
        return UnitDemandValuation(UNIVERSE, weights)
    if kind == 2:
        size = rng.randint(1, len(ITEMS))
        desired = frozenset(rng.sample(ITEMS, size))
        return SingleMindedValuation(UNIVERSE, desired, F(rng.randint(0, 32), 8))
    clauses = []
    for _ in range(rng.randint(1, 3)):
        picked = rng.sample(ITEMS, rng.randint(1, len(ITEMS)))
        clauses.append({it: F(rng.randint(0, 32), 8) for it in picked})
    return XosValuation(UNIVERSE, clauses)


def _random_subset(rng):
    return frozenset(it for it in ITEMS if rng.random() < 0.5)


def test_monotonicity_on_random_parametric_pairs():
    rng = random.Random(42)
    for trial in range(10_000):
        if trial % 50 == 0:
            valuation = _random_valuation(rng)
            assert valuation.validate() is None
        small = _random_subset(rng)
        grow = _random_subset(rng)
        big = small | grow
        assert valuation.value(small) <= valuation.value(big), (
            f"trial {trial}: {sorted(small)} worth more than {sorted(big)}"
        )


def test_monotonicity_exhaustive_on_random_tables():
    for s in range(5):
        auction, _ = generate("random_explicit", m=4, n=1, seed=500 + s)
        v = auction.valuation(auction.agent_names[0])
        subsets = [
            frozenset(c)
            for r in range(5)
            for c in itertools.combinations(sorted(auction.items), r)
        ]
        for small in subsets:
            for big in subsets:
                if small <= big:
                    assert v.value(small) <= v.value(big)


def test_bundle_value_is_value_of_pooled_items():
    items = tuple("wxyz")
    universe = frozenset(items)
    rng = random.Random(9)
    valuations = [
        AdditiveValuation(universe, {it: F(rng.randint(0, 8)) for it in items}),
        UnitDemandValuation(universe, {it: F(rng.randint(0, 8)) for it in items}),
        SingleMindedValuation(universe, frozenset("wx"), F(5)),
    ]
    for blocks in set_partitions(sorted(universe)):
        catalog = Catalog(
            entries=tuple((k, frozenset(b)) for k, b in enumerate(blocks))
        )
        ids = [bid for bid, _ in catalog.entries]
        for r in range(len(ids) + 1):
            for combo in itertools.combinations(ids, r):
                chosen = frozenset(combo)
                pooled = catalog.union_items(chosen)
                for v in valuations:
                    assert induced_value(v, catalog, chosen) == v.value(pooled)


def test_bundle_value_with_withheld_items():
    universe = frozenset("wxyz")
    v = AdditiveValuation(universe, {it: F(1) for it in universe})
    catalog = Catalog(
        entries=((0, frozenset("wx")),), withheld=frozenset("yz")
    )
    assert induced_value(v, catalog, frozenset({0})) == F(2)
    assert induced_value(v, catalog, frozenset()) == F(0)


@given(
    st.tuples(
        st.fractions(max_denominator=97),
        st.fractions(max_denominator=97),
        st.fractions(max_denominator=97),
    )
)
@settings(max_examples=300, deadline=None)
def test_scalar_algebra_is_exact(triple):
    a, b, c = triple
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


def test_demand_members_all_achieve_the_maximum():
    rng = random.Random(11)
    for s in range(30):
        auction, _ = generate("random_explicit", m=4, n=2, seed=600 + s)
        blocks = rng.choice([list(b) for b in set_partitions(sorted(auction.items))])
        catalog = Catalog(
            entries=tuple((k, frozenset(b)) for k, b in enumerate(blocks))
        )
        prices = {bid: F(rng.randint(0, 16), 8) for bid, _ in catalog.entries}
        ids = [bid for bid, _ in catalog.entries]
        for name in auction.agent_names:
            best, members = demand_correspondence(auction, name, catalog, prices)
            exhaustive = max(
                utility(auction, name, frozenset(c), catalog, prices)
                for r in range(len(ids) + 1)
                for c in itertools.combinations(ids, r)
            )
            assert best == max(exhaustive, F(0)) == max(exhaustive, 0)
            assert members, "demand correspondence may not be empty"
            for member in members:
                assert utility(auction, name, member, catalog, prices) == best
