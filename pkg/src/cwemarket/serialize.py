"""JSON encoding of auctions, outcomes, traces, and reports.

Scalars travel as "p/q" strings or bare integers; floats are rejected
at the parser level so no inexact value can slip into the exact
arithmetic.  Field names are part of the tool's contract.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .errors import InputError
from .market import (
    Agent,
    Auction,
    Catalog,
    InitialAllocation,
    Outcome,
    social_welfare,
    validate_initial_allocation,
)
from .scalars import format_scalar, parse_scalar
from .trace import (
    Assign,
    FallbackRecord,
    IterationEnd,
    Merge,
    PoolAdd,
    PoolRemove,
    PriceRaise,
    Reject,
    Trace,
    Unassign,
)
from .valuations import (
    AdditiveValuation,
    ExplicitValuation,
    ItemSet,
    SingleMindedValuation,
    UnitDemandValuation,
    Valuation,
    XosValuation,
    subsets_of,
)


def _reject_float(text: str) -> Fraction:
    raise InputError(
        f"floating point literal {text!r} not accepted; use \"p/q\" strings"
    )


def loads(text: str) -> Any:
    try:
        return json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed instance text: {exc}") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _expect(obj: Any, kind: type, what: str) -> Any:
    if not isinstance(obj, kind) or isinstance(obj, bool) and kind is not bool:
        raise InputError(f"{what} must be {kind.__name__}, got {type(obj).__name__}")
    return obj


def _item_list(obj: Any, what: str) -> List[str]:
    _expect(obj, list, what)
    out = []
    for entry in obj:
        _expect(entry, str, f"{what} entry")
        out.append(entry)
    return out


def _weight_map(obj: Any, what: str) -> Dict[str, Fraction]:
    _expect(obj, dict, what)
    return {
        _expect(k, str, f"{what} key"): parse_scalar(v) for k, v in obj.items()
    }


def valuation_from_json(items: ItemSet, obj: Any) -> Valuation:
    _expect(obj, dict, "valuation")
    kind = obj.get("type")
    if kind == "explicit":
        entries = _expect(obj.get("values"), list, "explicit values")
        table: Dict[ItemSet, Fraction] = {}
        for row in entries:
            _expect(row, dict, "explicit value row")
            subset = frozenset(_item_list(row.get("items"), "value row items"))
            if subset in table:
                raise InputError(
                    f"duplicate explicit entry for {sorted(subset)!r}"
                )
            table[subset] = parse_scalar(row.get("value"))
        return ExplicitValuation.from_entries(items, table)
    if kind == "additive":
        return AdditiveValuation(items, _weight_map(obj.get("weights"), "weights"))
    if kind == "unit_demand":
        return UnitDemandValuation(items, _weight_map(obj.get("weights"), "weights"))
    if kind == "single_minded":
        desired = frozenset(_item_list(obj.get("desired"), "desired"))
        return SingleMindedValuation(items, desired, parse_scalar(obj.get("weight")))
    if kind == "xos":
        clauses_obj = _expect(obj.get("clauses"), list, "clauses")
        clauses = [_weight_map(c, "clause") for c in clauses_obj]
        return XosValuation(items, clauses)
    raise InputError(f"unknown valuation type {kind!r}")


def valuation_to_json(valuation: Valuation) -> Dict[str, Any]:
    if isinstance(valuation, ExplicitValuation):
        return {
            "type": "explicit",
            "values": [
                {"items": sorted(s), "value": format_scalar(valuation.table[s])}
                for s in subsets_of(valuation.items)
            ],
        }
    if isinstance(valuation, (AdditiveValuation, UnitDemandValuation)):
        return {
            "type": valuation.kind,
            "weights": {
                i: format_scalar(w) for i, w in sorted(valuation.weights.items())
            },
        }
    if isinstance(valuation, SingleMindedValuation):
        return {
            "type": "single_minded",
            "desired": sorted(valuation.desired),
            "weight": format_scalar(valuation.weight),
        }
    if isinstance(valuation, XosValuation):
        return {
            "type": "xos",
            "clauses": [
                {i: format_scalar(w) for i, w in sorted(clause.items())}
                for clause in valuation.clauses
            ],
        }
    raise InputError(f"cannot serialize valuation of type {type(valuation).__name__}")


def parse_instance(obj: Any) -> Tuple[Auction, Optional[Dict[str, ItemSet]]]:
    """Build an auction (and its optional seed allocation) from JSON data."""
    _expect(obj, dict, "instance")
    items = tuple(_item_list(obj.get("items"), "items"))
    universe = frozenset(items)
    agents_obj = _expect(obj.get("agents"), list, "agents")
    agents = []
    for row in agents_obj:
        _expect(row, dict, "agent")
        name = _expect(row.get("name"), str, "agent name")
        valuation = valuation_from_json(universe, row.get("valuation"))
        agents.append(Agent(name=name, valuation=valuation))
    auction = Auction(items=items, agents=tuple(agents))
    allocation: Optional[Dict[str, ItemSet]] = None
    if "initial_allocation" in obj:
        rows = _expect(obj["initial_allocation"], list, "initial_allocation")
        raw: Dict[str, ItemSet] = {}
        for row in rows:
            _expect(row, dict, "initial_allocation entry")
            agent = _expect(row.get("agent"), str, "initial_allocation agent")
            if agent in raw:
                raise InputError(f"agent {agent!r} allocated twice in seed")
            raw[agent] = frozenset(_item_list(row.get("bundle"), "seed bundle"))
        allocation = validate_initial_allocation(auction, raw)
    return auction, allocation


def instance_to_json(
    auction: Auction, allocation: Optional[InitialAllocation] = None
) -> Dict[str, Any]:
    obj: Dict[str, Any] = {
        "items": list(auction.items),
        "agents": [
            {"name": agent.name, "valuation": valuation_to_json(agent.valuation)}
            for agent in auction.agents
        ],
    }
    if allocation is not None:
        obj["initial_allocation"] = [
            {"agent": name, "bundle": sorted(allocation[name])}
            for name in auction.agent_names
            if name in allocation and allocation[name]
        ]
    return obj


def load_instance(path: str) -> Tuple[Auction, Optional[Dict[str, ItemSet]]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read instance file {path!r}: {exc}") from None
    return parse_instance(loads(text))


def outcome_to_json(
    auction: Auction,
    outcome: Outcome,
    cwe: Optional[bool],
    iterations: int,
    demand_queries: int,
    revenue: Optional[Fraction] = None,
) -> Dict[str, Any]:
    """The outcome report: positional catalog, parallel prices, and the
    assignment as positions into the catalog list."""
    position = {bid: k for k, (bid, _) in enumerate(outcome.catalog.entries)}
    if revenue is None:
        revenue = Fraction(0)
        for name in auction.agent_names:
            for bid in outcome.assignment.get(name, frozenset()):
                revenue += outcome.prices[bid]
    return {
        "catalog": [sorted(items) for _, items in outcome.catalog.entries],
        "prices": [
            format_scalar(outcome.prices[bid]) for bid, _ in outcome.catalog.entries
        ],
        "assignment": {
            name: sorted(
                position[bid]
                for bid in outcome.assignment.get(name, frozenset())
            )
            for name in auction.agent_names
        },
        "withheld": sorted(outcome.catalog.withheld),
        "sw": format_scalar(social_welfare(auction, outcome)),
        "revenue": format_scalar(revenue),
        "cwe": cwe,
        "iterations": iterations,
        "demand_queries": demand_queries,
    }


def outcome_from_json(auction: Auction, obj: Any) -> Outcome:
    """Rebuild an outcome from its report form for re-verification."""
    _expect(obj, dict, "outcome")
    bundles_obj = _expect(obj.get("catalog"), list, "catalog")
    entries = []
    for k, bundle in enumerate(bundles_obj):
        entries.append((k, frozenset(_item_list(bundle, "catalog bundle"))))
    prices_obj = _expect(obj.get("prices"), list, "prices")
    if len(prices_obj) != len(entries):
        raise InputError("prices list must parallel the catalog list")
    prices = {k: parse_scalar(p) for k, p in enumerate(prices_obj)}
    sold: frozenset = frozenset()
    for _, items in entries:
        sold |= items
    if not sold <= auction.item_set:
        raise InputError("catalog mentions items outside the auction")
    catalog = Catalog(entries=tuple(entries), withheld=auction.item_set - sold)
    if "withheld" in obj:
        stated = frozenset(_item_list(obj["withheld"], "withheld"))
        if stated != catalog.withheld:
            raise InputError(
                "withheld list disagrees with items absent from the catalog"
            )
    assignment_obj = _expect(obj.get("assignment"), dict, "assignment")
    assignment = {}
    for name, indices in assignment_obj.items():
        if name not in auction.agent_names:
            raise InputError(f"assignment names unknown agent {name!r}")
        _expect(indices, list, "assignment bundle list")
        held = set()
        for idx in indices:
            _expect(idx, int, "bundle index")
            if not 0 <= idx < len(entries):
                raise InputError(f"bundle index {idx} out of range")
            held.add(idx)
        assignment[name] = frozenset(held)
    return Outcome(catalog=catalog, prices=prices, assignment=assignment)


def trace_to_json(trace: Trace) -> Dict[str, Any]:
    events: List[Dict[str, Any]] = []
    for ev in trace.events:
        if isinstance(ev, Merge):
            events.append(
                {"type": "merge", "sources": sorted(ev.sources), "new_id": ev.new_id}
            )
        elif isinstance(ev, PriceRaise):
            events.append(
                {
                    "type": "price_raise",
                    "bundle": ev.bundle,
                    "old": format_scalar(ev.old),
                    "new": format_scalar(ev.new),
                }
            )
        elif isinstance(ev, PoolAdd):
            events.append({"type": "pool_add", "agent": ev.agent})
        elif isinstance(ev, PoolRemove):
            events.append({"type": "pool_remove", "agent": ev.agent})
        elif isinstance(ev, Reject):
            events.append({"type": "reject", "agent": ev.agent})
        elif isinstance(ev, Assign):
            events.append(
                {"type": "assign", "agent": ev.agent, "bundles": sorted(ev.bundles)}
            )
        elif isinstance(ev, Unassign):
            events.append({"type": "unassign", "agent": ev.agent})
        elif isinstance(ev, FallbackRecord):
            events.append(
                {"type": "fallback", "agent": ev.agent, "bundles": sorted(ev.bundles)}
            )
        elif isinstance(ev, IterationEnd):
            events.append({"type": "iteration_end", "index": ev.index})
        else:
            raise InputError(f"cannot serialize trace event {ev!r}")
    return {
        "events": events,
        "iterations": trace.iterations,
        "demand_queries": trace.demand_queries,
    }


def ladder_to_json(levels, t_star: int) -> Dict[str, Any]:
    return {
        "t_star": t_star,
        "ladder": [
            {
                "t": level.t,
                "sigma": format_scalar(level.sigma),
                "sw": format_scalar(level.sw),
                "rev": format_scalar(level.rev),
                "survivors": list(level.survivors),
            }
            for level in levels
        ],
    }
