"""Execution traces for the ascending-price solvers.

Every state mutation the solvers perform is recorded as one event.  A
trace can be replayed against the same auction and seed allocation to
rebuild the final outcome bit for bit, and the replay checks the
structural invariants that must hold along any run:

  * prices never decrease, and only catalog bundles are priced;
  * the catalog only coarsens (bundles merge, never split);
  * a bundle sold once stays sold: at every iteration boundary it (or
    the merged bundle that absorbed it) has a holder.

Traces from the query-efficient solver carry FallbackRecord events (the
breakpoint removal order of each price push).  For those, replay
additionally checks that every displacement hands the bundle to an
agent later in the removal order than its victim, that displacement
chains stay within n hops, and that the main loop stays within n*n
iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from .errors import InputError, SolverInvariantError
from .market import (
    Auction,
    BundleId,
    BundleSet,
    Catalog,
    InitialAllocation,
    Outcome,
    initial_market,
)


@dataclass(frozen=True)
class Merge:
    sources: Tuple[BundleId, ...]
    new_id: BundleId


@dataclass(frozen=True)
class PriceRaise:
    bundle: BundleId
    old: Fraction
    new: Fraction


@dataclass(frozen=True)
class PoolAdd:
    agent: str


@dataclass(frozen=True)
class PoolRemove:
    agent: str


@dataclass(frozen=True)
class Reject:
    agent: str


@dataclass(frozen=True)
class Assign:
    agent: str
    bundles: BundleSet


@dataclass(frozen=True)
class Unassign:
    agent: str


@dataclass(frozen=True)
class FallbackRecord:
    """A price push released this agent, recording its switch-to set."""

    agent: str
    bundles: BundleSet


@dataclass(frozen=True)
class IterationEnd:
    index: int


Event = object


@dataclass
class Trace:
    events: List[Event] = field(default_factory=list)
    iterations: int = 0
    demand_queries: int = 0

    def add(self, event: Event) -> None:
        self.events.append(event)


def replay(
    auction: Auction,
    allocation: InitialAllocation,
    trace: Trace,
    check: bool = True,
    poly: Optional[bool] = None,
) -> Outcome:
    """Rebuild the final outcome from a trace, checking invariants.

    `poly` turns the removal-order checks on; by default they activate
    when the trace contains FallbackRecord events.  Raises
    SolverInvariantError on any violation.
    """
    if poly is None:
        poly = any(isinstance(ev, FallbackRecord) for ev in trace.events)
    n = len(auction.agents)

    catalog, start_prices, _ = initial_market(auction, allocation)
    table: Dict[BundleId, FrozenSet[str]] = {
        bid: items for bid, items in catalog.entries
    }
    prices: Dict[BundleId, Fraction] = dict(start_prices)
    assignment: Dict[str, BundleSet] = {}
    pool: List[str] = []
    allocated: set = set()  # bundles sold at least once; must stay sold
    rank: Dict[str, int] = {}
    pending_rank: List[str] = []
    iteration_count = 0
    chain = 0

    def rank_of(name: str):
        return rank.get(name, float("inf"))

    for ev in trace.events:
        if isinstance(ev, Merge):
            ids = frozenset(ev.sources)
            if len(ids) < 2:
                raise SolverInvariantError("merge with fewer than two sources")
            for bid in ids:
                if bid not in table:
                    raise SolverInvariantError(f"merge references unknown bundle {bid}")
            if ev.new_id in table:
                raise SolverInvariantError(f"merge reuses live id {ev.new_id}")
            if check:
                for name, held in assignment.items():
                    if held & ids:
                        raise SolverInvariantError(
                            f"merge consumed bundles still assigned to {name!r}"
                        )
            union: FrozenSet[str] = frozenset()
            price = Fraction(0)
            for bid in sorted(ids):
                union |= table.pop(bid)
                price += prices.pop(bid)
            table[ev.new_id] = union
            prices[ev.new_id] = price
            if allocated & ids:
                allocated -= ids
                allocated.add(ev.new_id)
        elif isinstance(ev, PriceRaise):
            if ev.bundle not in table:
                raise SolverInvariantError(f"price raise on unknown bundle {ev.bundle}")
            if check and prices[ev.bundle] != ev.old:
                raise SolverInvariantError(
                    f"price raise old value mismatch on bundle {ev.bundle}"
                )
            if check and ev.new < ev.old:
                raise SolverInvariantError("price decreased")
            prices[ev.bundle] = ev.new
        elif isinstance(ev, PoolAdd):
            if ev.agent not in pool:
                pool.append(ev.agent)
        elif isinstance(ev, PoolRemove):
            if check and ev.agent not in pool:
                raise SolverInvariantError(f"pool remove of absent agent {ev.agent!r}")
            pool.remove(ev.agent)
        elif isinstance(ev, Reject):
            assignment.pop(ev.agent, None)
        elif isinstance(ev, Assign):
            if check:
                for bid in ev.bundles:
                    if bid not in table:
                        raise SolverInvariantError(
                            f"assignment references unknown bundle {bid}"
                        )
                holders = [
                    b
                    for b, held in assignment.items()
                    if b != ev.agent and held & ev.bundles
                ]
                if poly and holders:
                    chain += 1
                    if chain > n:
                        raise SolverInvariantError(
                            f"displacement chain exceeded {n} hops"
                        )
                    for b in holders:
                        if not rank_of(b) < rank_of(ev.agent):
                            raise SolverInvariantError(
                                f"{ev.agent!r} displaced {b!r} without moving "
                                f"earlier in the removal order"
                            )
            assignment[ev.agent] = ev.bundles
            allocated |= ev.bundles
        elif isinstance(ev, Unassign):
            assignment.pop(ev.agent, None)
        elif isinstance(ev, FallbackRecord):
            pending_rank.append(ev.agent)
        elif isinstance(ev, IterationEnd):
            iteration_count += 1
            chain = 0
            if pending_rank:
                rank = {name: k for k, name in enumerate(pending_rank)}
                pending_rank = []
            if check:
                if poly and iteration_count > n * n:
                    raise SolverInvariantError(
                        f"more than {n * n} iterations in trace"
                    )
                held: set = set()
                for name, bundles in assignment.items():
                    dup = held & bundles
                    if dup:
                        raise SolverInvariantError(
                            f"bundles {sorted(dup)} doubly assigned at "
                            f"iteration {ev.index}"
                        )
                    held |= bundles
                orphaned = allocated - held
                if orphaned:
                    raise SolverInvariantError(
                        f"bundles {sorted(orphaned)} were sold but have no "
                        f"holder at iteration {ev.index}"
                    )
        else:
            raise InputError(f"unknown trace event {ev!r}")

    entries = tuple(sorted(table.items(), key=lambda kv: kv[0]))
    sold: FrozenSet[str] = frozenset()
    for _, items in entries:
        sold |= items
    final_catalog = Catalog(entries=entries, withheld=auction.item_set - sold)
    return Outcome(
        catalog=final_catalog,
        prices=dict(prices),
        assignment=dict(assignment),
    )
