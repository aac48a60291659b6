"""Valuation classes over indivisible items.

Every valuation is monotone with value(empty) == 0, defined over an
explicit finite item universe.  Supported classes:

  explicit       full table over all subsets of the universe
  additive       per-item weights, value = sum
  unit_demand    per-item weights, value = max
  single_minded  a desired set and a weight
  xos            max over additive clauses

`validate()` checks the class constraints and returns the first defect
found (None when the valuation is well formed).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple

from .errors import InputError

Item = str
ItemSet = FrozenSet[str]

EXPLICIT_ITEM_CAP = 12


def _itemset(items: Iterable[Item]) -> ItemSet:
    s = frozenset(items)
    if not all(isinstance(i, str) for i in s):
        raise InputError("item identifiers must be strings")
    return s


def subsets_of(items: ItemSet) -> Iterator[ItemSet]:
    """All subsets, by increasing size then sorted-lexicographic order."""
    order = sorted(items)
    for k in range(len(order) + 1):
        for combo in combinations(order, k):
            yield frozenset(combo)


@dataclass(frozen=True)
class ValuationDefect:
    """First constraint violation found by validate()."""

    kind: str  # "normalization" | "monotonicity" | "negative_weight" | "empty_desired"
    detail: str
    small: Optional[ItemSet] = None
    large: Optional[ItemSet] = None
    value_small: Optional[Fraction] = None
    value_large: Optional[Fraction] = None


class Valuation:
    """Abstract base.  Subclasses set `items` and implement `_value`."""

    items: ItemSet
    kind: str = "abstract"

    def value(self, bundle: Iterable[Item]) -> Fraction:
        s = frozenset(bundle)
        unknown = s - self.items
        if unknown:
            raise InputError(
                f"unknown item identifiers {sorted(unknown)!r} for this valuation"
            )
        return self._value(s)

    def _value(self, s: ItemSet) -> Fraction:
        raise NotImplementedError

    def parameter_values(self) -> Iterator[Fraction]:
        """All scalar parameters, for granularity computation."""
        raise NotImplementedError

    def validate(self) -> Optional[ValuationDefect]:
        raise NotImplementedError


def _check_weights(weights: Mapping[Item, Fraction]) -> Optional[ValuationDefect]:
    for item in sorted(weights):
        if weights[item] < 0:
            return ValuationDefect(
                kind="negative_weight",
                detail=f"weight of item {item!r} is {weights[item]}",
            )
    return None


class ExplicitValuation(Valuation):
    """Valuation given by a full subset table."""

    kind = "explicit"

    def __init__(self, items: Iterable[Item], table: Mapping[ItemSet, Fraction]):
        self.items = _itemset(items)
        if len(self.items) > EXPLICIT_ITEM_CAP:
            raise InputError(
                f"explicit valuation over {len(self.items)} items exceeds the "
                f"cap of {EXPLICIT_ITEM_CAP}"
            )
        tab: Dict[ItemSet, Fraction] = {}
        for s, v in table.items():
            key = frozenset(s)
            if not key <= self.items:
                raise InputError(f"table key {sorted(key)!r} outside item universe")
            tab[key] = Fraction(v)
        missing = [s for s in subsets_of(self.items) if s not in tab]
        if missing:
            raise InputError(
                f"explicit table missing {len(missing)} subsets, "
                f"first {sorted(missing[0])!r}"
            )
        self.table: Dict[ItemSet, Fraction] = tab

    @classmethod
    def from_entries(
        cls,
        items: Iterable[Item],
        entries: Mapping[ItemSet, Fraction],
    ) -> "ExplicitValuation":
        """Build a full table from a partial one.

        Listed subsets keep their stated value.  Every unlisted subset S
        gets the minimal monotone completion max{v(T) : listed T <= S}
        (0 when no listed subset fits).  A listed pair that violates
        monotonicity is preserved as stated and will fail validate().
        """
        universe = _itemset(items)
        listed = {frozenset(s): Fraction(v) for s, v in entries.items()}
        table: Dict[ItemSet, Fraction] = {}
        for s in subsets_of(universe):
            if s in listed:
                table[s] = listed[s]
                continue
            best = Fraction(0)
            for t, v in listed.items():
                if t <= s and v > best:
                    best = v
            table[s] = best
        return cls(universe, table)

    def _value(self, s: ItemSet) -> Fraction:
        return self.table[s]

    def parameter_values(self) -> Iterator[Fraction]:
        return iter(self.table.values())

    def validate(self) -> Optional[ValuationDefect]:
        empty = frozenset()
        if self.table[empty] != 0:
            return ValuationDefect(
                kind="normalization",
                detail=f"value of the empty set is {self.table[empty]}, not 0",
                small=empty,
                value_small=self.table[empty],
            )
        # single-item extension steps imply full monotonicity
        for s in subsets_of(self.items):
            for extra in sorted(self.items - s):
                t = s | {extra}
                if self.table[t] < self.table[s]:
                    return ValuationDefect(
                        kind="monotonicity",
                        detail=f"value drops from {sorted(s)!r} to {sorted(t)!r}",
                        small=s,
                        large=t,
                        value_small=self.table[s],
                        value_large=self.table[t],
                    )
        return None


class AdditiveValuation(Valuation):
    kind = "additive"

    def __init__(self, items: Iterable[Item], weights: Mapping[Item, Fraction]):
        self.items = _itemset(items)
        self.weights = {i: Fraction(w) for i, w in weights.items()}
        if not frozenset(self.weights) <= self.items:
            raise InputError("weight map mentions items outside the universe")

    def _value(self, s: ItemSet) -> Fraction:
        return sum((self.weights.get(i, Fraction(0)) for i in s), Fraction(0))

    def parameter_values(self) -> Iterator[Fraction]:
        return iter(self.weights.values())

    def validate(self) -> Optional[ValuationDefect]:
        return _check_weights(self.weights)


class UnitDemandValuation(Valuation):
    kind = "unit_demand"

    def __init__(self, items: Iterable[Item], weights: Mapping[Item, Fraction]):
        self.items = _itemset(items)
        self.weights = {i: Fraction(w) for i, w in weights.items()}
        if not frozenset(self.weights) <= self.items:
            raise InputError("weight map mentions items outside the universe")

    def _value(self, s: ItemSet) -> Fraction:
        best = Fraction(0)
        for i in s:
            w = self.weights.get(i, Fraction(0))
            if w > best:
                best = w
        return best

    def parameter_values(self) -> Iterator[Fraction]:
        return iter(self.weights.values())

    def validate(self) -> Optional[ValuationDefect]:
        return _check_weights(self.weights)


class SingleMindedValuation(Valuation):
    kind = "single_minded"

    def __init__(self, items: Iterable[Item], desired: Iterable[Item], weight: Fraction):
        self.items = _itemset(items)
        self.desired = _itemset(desired)
        self.weight = Fraction(weight)
        if not self.desired <= self.items:
            raise InputError("desired set outside the item universe")

    def _value(self, s: ItemSet) -> Fraction:
        return self.weight if self.desired <= s else Fraction(0)

    def parameter_values(self) -> Iterator[Fraction]:
        yield self.weight

    def validate(self) -> Optional[ValuationDefect]:
        if self.weight < 0:
            return ValuationDefect(
                kind="negative_weight", detail=f"weight is {self.weight}"
            )
        if not self.desired and self.weight != 0:
            # v(empty) would equal weight, breaking normalization
            return ValuationDefect(
                kind="empty_desired",
                detail="empty desired set with nonzero weight",
            )
        return None


class XosValuation(Valuation):
    """Max over additive clauses; value(S) = max_c sum_{i in S} c[i]."""

    kind = "xos"

    def __init__(
        self,
        items: Iterable[Item],
        clauses: Iterable[Mapping[Item, Fraction]],
    ):
        self.items = _itemset(items)
        self.clauses: Tuple[Dict[Item, Fraction], ...] = tuple(
            {i: Fraction(w) for i, w in clause.items()} for clause in clauses
        )
        for clause in self.clauses:
            if not frozenset(clause) <= self.items:
                raise InputError("clause mentions items outside the universe")

    def _value(self, s: ItemSet) -> Fraction:
        best = Fraction(0)
        for clause in self.clauses:
            total = sum((clause.get(i, Fraction(0)) for i in s), Fraction(0))
            if total > best:
                best = total
        return best

    def parameter_values(self) -> Iterator[Fraction]:
        for clause in self.clauses:
            yield from clause.values()

    def validate(self) -> Optional[ValuationDefect]:
        for clause in self.clauses:
            defect = _check_weights(clause)
            if defect is not None:
                return defect
        return None
