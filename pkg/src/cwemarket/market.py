"""Core market model: auctions, bundle catalogs, prices, outcomes.

A catalog is an ordered collection of disjoint item bundles offered at
linear prices; items not in any bundle are withheld and cannot be
bought.  Demand is quasi-linear: an agent's utility for a set of
bundles is its value for the union of their items minus the summed
prices.  The empty set (utility 0) is always an option, so maximum
utility is never negative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import InputError, ResourceLimitError
from .scalars import common_granularity
from .valuations import Item, ItemSet, Valuation

BundleId = int
BundleSet = FrozenSet[BundleId]

DEMAND_BUNDLE_CAP = 20


@dataclass(frozen=True)
class Agent:
    name: str
    valuation: Valuation


class Auction:
    """Items plus one valuation per agent.

    Construction validates every valuation and requires each valuation's
    universe to cover the auction items.
    """

    def __init__(self, items: Sequence[Item], agents: Sequence[Agent]):
        if len(set(items)) != len(items):
            raise InputError("duplicate item identifiers")
        names = [a.name for a in agents]
        if len(set(names)) != len(names):
            raise InputError("duplicate agent names")
        self.items: Tuple[Item, ...] = tuple(items)
        self.item_set: ItemSet = frozenset(items)
        self.agents: Tuple[Agent, ...] = tuple(agents)
        self._by_name = {a.name: a for a in agents}
        self._index = {a.name: k for k, a in enumerate(agents)}
        for agent in agents:
            if not self.item_set <= agent.valuation.items:
                missing = sorted(self.item_set - agent.valuation.items)
                raise InputError(
                    f"valuation of {agent.name!r} does not cover items {missing!r}"
                )
            defect = agent.valuation.validate()
            if defect is not None:
                raise InputError(
                    f"valuation of {agent.name!r} invalid ({defect.kind}): {defect.detail}"
                )

    @property
    def agent_names(self) -> List[str]:
        return [a.name for a in self.agents]

    def valuation(self, name: str) -> Valuation:
        try:
            return self._by_name[name].valuation
        except KeyError:
            raise InputError(f"unknown agent {name!r}") from None

    def agent_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InputError(f"unknown agent {name!r}") from None

    def granularity(self) -> Optional[Fraction]:
        """Greatest common rational divisor of all valuation parameters."""
        def walk():
            for agent in self.agents:
                yield from agent.valuation.parameter_values()
        return common_granularity(walk())

    def total_value_bound(self) -> Fraction:
        return sum(
            (a.valuation.value(self.item_set) for a in self.agents), Fraction(0)
        )


@dataclass(frozen=True)
class Catalog:
    """Ordered disjoint bundles with stable integer ids, plus withheld items.

    Merging replaces the merged bundles with their union, appended at the
    end under a fresh id; all other ids are untouched.
    """

    entries: Tuple[Tuple[BundleId, ItemSet], ...]
    withheld: ItemSet = frozenset()

    def __post_init__(self):
        seen_ids = set()
        seen_items: set = set()
        for bid, items in self.entries:
            if bid in seen_ids:
                raise InputError(f"duplicate bundle id {bid}")
            seen_ids.add(bid)
            if not items:
                raise InputError("empty bundle in catalog")
            if seen_items & items:
                raise InputError("catalog bundles overlap")
            seen_items |= items
        if seen_items & self.withheld:
            raise InputError("withheld items overlap a catalog bundle")

    @property
    def ids(self) -> Tuple[BundleId, ...]:
        return tuple(bid for bid, _ in self.entries)

    def items_of(self, bid: BundleId) -> ItemSet:
        for b, items in self.entries:
            if b == bid:
                return items
        raise InputError(f"no bundle with id {bid}")

    def as_dict(self) -> Dict[BundleId, ItemSet]:
        return {bid: items for bid, items in self.entries}

    def union_items(self, bundle_ids: Iterable[BundleId]) -> ItemSet:
        table = self.as_dict()
        out: FrozenSet[str] = frozenset()
        for bid in bundle_ids:
            if bid not in table:
                raise InputError(f"no bundle with id {bid}")
            out |= table[bid]
        return out

    def fresh_id(self) -> BundleId:
        return max((bid for bid, _ in self.entries), default=-1) + 1


def merge_bundles(catalog: Catalog, bundle_ids: Iterable[BundleId]) -> Tuple[Catalog, BundleId]:
    """Coarsen the catalog by replacing `bundle_ids` with their union.

    Returns the new catalog and the fresh id of the merged bundle.
    """
    ids = frozenset(bundle_ids)
    if len(ids) < 2:
        raise InputError("merge needs at least two bundles")
    table = catalog.as_dict()
    for bid in ids:
        if bid not in table:
            raise InputError(f"no bundle with id {bid}")
    new_id = catalog.fresh_id()
    union: FrozenSet[str] = frozenset()
    for bid in ids:
        union |= table[bid]
    kept = tuple((b, s) for b, s in catalog.entries if b not in ids)
    return Catalog(entries=kept + ((new_id, union),), withheld=catalog.withheld), new_id


PriceMap = Dict[BundleId, Fraction]


def check_prices(catalog: Catalog, prices: Mapping[BundleId, Fraction]) -> None:
    for bid, _ in catalog.entries:
        if bid not in prices:
            raise InputError(f"bundle {bid} has no price")
        if prices[bid] < 0:
            raise InputError(f"bundle {bid} has negative price {prices[bid]}")


@dataclass(frozen=True)
class Outcome:
    """A snapshot of the market: catalog, prices, who holds which bundles."""

    catalog: Catalog
    prices: Dict[BundleId, Fraction]
    assignment: Dict[str, BundleSet]

    def __post_init__(self):
        check_prices(self.catalog, self.prices)
        ids = frozenset(self.catalog.ids)
        held: set = set()
        for name, bundles in self.assignment.items():
            if not bundles <= ids:
                raise InputError(f"assignment of {name!r} references unknown bundles")
            if held & bundles:
                raise InputError("a bundle is assigned to two agents")
            held |= bundles

    def holder_of(self, bid: BundleId) -> Optional[str]:
        for name, bundles in self.assignment.items():
            if bid in bundles:
                return name
        return None

    def assigned_items(self, name: str) -> ItemSet:
        return self.catalog.union_items(self.assignment.get(name, frozenset()))


def induced_value(
    valuation: Valuation,
    catalog: Catalog,
    bundle_set: Iterable[BundleId],
) -> Fraction:
    """Value of a set of catalog bundles: the value of their pooled items."""
    return valuation.value(catalog.union_items(bundle_set))


def utility(
    auction: Auction,
    agent: str,
    bundle_set: Iterable[BundleId],
    catalog: Catalog,
    prices: Mapping[BundleId, Fraction],
) -> Fraction:
    """Quasi-linear utility of a set of catalog bundles."""
    bundles = frozenset(bundle_set)
    value = induced_value(auction.valuation(agent), catalog, bundles)
    return value - sum((prices[b] for b in bundles), Fraction(0))


def demand_correspondence(
    auction: Auction,
    agent: str,
    catalog: Catalog,
    prices: Mapping[BundleId, Fraction],
    excluded: BundleSet = frozenset(),
    max_bundles: int = DEMAND_BUNDLE_CAP,
) -> Tuple[Fraction, List[BundleSet]]:
    """All utility-maximizing bundle sets over the available catalog.

    Returns (max utility, members).  Available bundles are the catalog
    minus `excluded`; the empty set is always a candidate, so the max
    is at least 0.  Members come back in a canonical order (by size,
    then sorted ids).
    """
    if len(catalog.entries) > max_bundles:
        raise ResourceLimitError(
            f"catalog has {len(catalog.entries)} bundles; demand enumeration "
            f"capped at {max_bundles}"
        )
    avail = [(bid, items) for bid, items in catalog.entries if bid not in excluded]
    k = len(avail)
    val = auction.valuation(agent)
    n_masks = 1 << k
    unions: List[ItemSet] = [frozenset()] * n_masks
    psums: List[Fraction] = [Fraction(0)] * n_masks
    utils: List[Fraction] = [Fraction(0)] * n_masks
    best = Fraction(0)
    for mask in range(1, n_masks):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        unions[mask] = unions[rest] | avail[i][1]
        psums[mask] = psums[rest] + prices[avail[i][0]]
        u = val.value(unions[mask]) - psums[mask]
        utils[mask] = u
        if u > best:
            best = u
    members: List[BundleSet] = []
    for mask in range(n_masks):
        if utils[mask] == best:
            members.append(
                frozenset(avail[i][0] for i in range(k) if mask >> i & 1)
            )
    members.sort(key=lambda s: (len(s), sorted(s)))
    return best, members


def tie_break_key(
    bundle_set: BundleSet,
    agent: str,
    others: Optional[Mapping[str, BundleSet]],
) -> Tuple[int, int, List[BundleId]]:
    """Deterministic preference order among equally good demand sets:
    fewest bundles currently held by other agents, then fewest bundles,
    then lexicographically smallest sorted id tuple.
    """
    overlap = 0
    if others:
        for name, held in others.items():
            if name != agent:
                overlap += len(bundle_set & held)
    return overlap, len(bundle_set), sorted(bundle_set)


def select_demanded(
    candidates: Sequence[BundleSet],
    agent: str,
    others: Optional[Mapping[str, BundleSet]],
) -> BundleSet:
    if not candidates:
        raise InputError("no demand candidates to select from")
    return min(candidates, key=lambda s: tie_break_key(s, agent, others))


def chosen_demand(
    auction: Auction,
    agent: str,
    catalog: Catalog,
    prices: Mapping[BundleId, Fraction],
    excluded: BundleSet = frozenset(),
    others: Optional[Mapping[str, BundleSet]] = None,
    max_bundles: int = DEMAND_BUNDLE_CAP,
) -> BundleSet:
    """One deterministic element of the demand correspondence."""
    _, members = demand_correspondence(
        auction, agent, catalog, prices, excluded, max_bundles
    )
    return select_demanded(members, agent, others)


@dataclass(frozen=True)
class CweViolation:
    agent: str
    held: BundleSet
    better: BundleSet
    held_utility: Fraction
    best_utility: Fraction

    @property
    def gap(self) -> Fraction:
        return self.best_utility - self.held_utility


def find_violation(
    auction: Auction,
    outcome: Outcome,
    max_bundles: int = DEMAND_BUNDLE_CAP,
) -> Optional[CweViolation]:
    """First agent (in auction order) whose held set is not demanded.

    The outcome is a bundle-pricing equilibrium exactly when this
    returns None: every agent's assigned set maximizes its utility over
    the full catalog, withheld items are off the market, and clearance
    is not required.
    """
    for agent in auction.agents:
        held = outcome.assignment.get(agent.name, frozenset())
        cur = utility(auction, agent.name, held, outcome.catalog, outcome.prices)
        best, members = demand_correspondence(
            auction, agent.name, outcome.catalog, outcome.prices,
            max_bundles=max_bundles,
        )
        if cur < best:
            better = select_demanded(members, agent.name, outcome.assignment)
            return CweViolation(
                agent=agent.name,
                held=held,
                better=better,
                held_utility=cur,
                best_utility=best,
            )
    return None


def is_cwe(auction: Auction, outcome: Outcome, max_bundles: int = DEMAND_BUNDLE_CAP) -> bool:
    return find_violation(auction, outcome, max_bundles) is None


def social_welfare(auction: Auction, outcome: Outcome) -> Fraction:
    total = Fraction(0)
    for agent in auction.agents:
        items = outcome.assigned_items(agent.name)
        total += agent.valuation.value(items)
    return total


InitialAllocation = Mapping[str, ItemSet]


def validate_initial_allocation(auction: Auction, allocation: InitialAllocation) -> Dict[str, ItemSet]:
    """Normalize and check a seed allocation: known agents, items within
    the auction, pairwise disjoint.  Empty entries are dropped.
    """
    norm: Dict[str, ItemSet] = {}
    used: set = set()
    for name in allocation:
        if name not in auction.agent_names:
            raise InputError(f"initial allocation names unknown agent {name!r}")
    for name in auction.agent_names:
        items = frozenset(allocation.get(name, frozenset()))
        if not items:
            continue
        if not items <= auction.item_set:
            raise InputError(
                f"initial allocation of {name!r} contains unknown items"
            )
        if used & items:
            raise InputError("initial allocation is not disjoint")
        used |= items
        norm[name] = items
    return norm


def initial_market(
    auction: Auction, allocation: InitialAllocation
) -> Tuple[Catalog, PriceMap, Dict[str, str]]:
    """Seed catalog from an initial allocation.

    Each nonempty allocated set becomes one bundle, in agent order,
    priced at half the owner's value for it.  Unallocated items are
    withheld.  Returns (catalog, prices, bundle id -> seeding agent).
    """
    norm = validate_initial_allocation(auction, allocation)
    entries: List[Tuple[BundleId, ItemSet]] = []
    prices: PriceMap = {}
    seeded_by: Dict[str, str] = {}
    next_id = 0
    covered: FrozenSet[str] = frozenset()
    for name in auction.agent_names:
        items = norm.get(name)
        if not items:
            continue
        entries.append((next_id, items))
        prices[next_id] = auction.valuation(name).value(items) / 2
        seeded_by[str(next_id)] = name
        covered |= items
        next_id += 1
    catalog = Catalog(entries=tuple(entries), withheld=auction.item_set - covered)
    return catalog, prices, seeded_by
