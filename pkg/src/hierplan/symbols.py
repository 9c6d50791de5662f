"""Symbols as named state sets, with exact set algebra over dense bitsets.

A grounding set is the extensional meaning of a symbol: the set of states
(at one hierarchy level) the symbol refers to. Logical operations on
symbols have the semantics of set operations on their grounding sets, so
everything here is plain set algebra, stored as an integer bitmask over
dense state indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import DuplicateSymbol, LevelMismatch, LevelOutOfRange


def _mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if i < 0:
            raise ValueError(f"state index must be >= 0, got {i}")
        mask |= 1 << i
    return mask


@dataclass(frozen=True)
class GroundingSet:
    """A set of state indices at one hierarchy level.

    Immutable; every operation returns a new set. Mixing levels is an
    error because identical indices mean different states at different
    levels.
    """

    level_index: int
    bits: int = 0

    @classmethod
    def of(cls, level_index: int, indices: Iterable[int]) -> GroundingSet:
        return cls(level_index, _mask_of(indices))

    @classmethod
    def single(cls, level_index: int, index: int) -> GroundingSet:
        return cls(level_index, 1 << index)

    @classmethod
    def empty(cls, level_index: int) -> GroundingSet:
        return cls(level_index, 0)

    def _check(self, other: GroundingSet) -> None:
        if self.level_index != other.level_index:
            raise LevelMismatch(
                f"level {self.level_index} vs level {other.level_index}"
            )

    def union(self, other: GroundingSet) -> GroundingSet:
        self._check(other)
        return GroundingSet(self.level_index, self.bits | other.bits)

    def intersection(self, other: GroundingSet) -> GroundingSet:
        self._check(other)
        return GroundingSet(self.level_index, self.bits & other.bits)

    def difference(self, other: GroundingSet) -> GroundingSet:
        self._check(other)
        return GroundingSet(self.level_index, self.bits & ~other.bits)

    def issubset(self, other: GroundingSet) -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def isdisjoint(self, other: GroundingSet) -> bool:
        self._check(other)
        return self.bits & other.bits == 0

    def is_empty(self) -> bool:
        return self.bits == 0

    def add(self, index: int) -> GroundingSet:
        return GroundingSet(self.level_index, self.bits | (1 << index))

    # operator sugar, same level rules as the named methods
    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __le__ = issubset

    def __contains__(self, index: int) -> bool:
        return index >= 0 and (self.bits >> index) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        i = 0
        while bits:
            if bits & 1:
                yield i
            bits >>= 1
            i += 1

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __repr__(self) -> str:
        members = list(self)
        shown = members if len(members) <= 8 else members[:8] + ["..."]
        return f"GroundingSet(level={self.level_index}, {{{', '.join(map(str, shown))}}})"


@dataclass(frozen=True)
class Symbol:
    """A name whose meaning is a grounding set."""

    name: str
    grounding: GroundingSet


@dataclass
class SymbolTable:
    """Per-level registry of symbols; names are unique within a table."""

    level_index: int
    _symbols: dict[str, Symbol] = field(default_factory=dict)

    def define(self, name: str, grounding: GroundingSet) -> Symbol:
        if name in self._symbols:
            raise DuplicateSymbol(name)
        if grounding.level_index != self.level_index:
            raise LevelMismatch(
                f"table at level {self.level_index}, grounding at "
                f"level {grounding.level_index}"
            )
        sym = Symbol(name, grounding)
        self._symbols[name] = sym
        return sym

    def __getitem__(self, name: str) -> Symbol:
        return self._symbols[name]

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self._symbols.values())

    def __len__(self) -> int:
        return len(self._symbols)


def ground(hierarchy, level_index: int, states: GroundingSet | int) -> GroundingSet:
    """Grounding one level down: the lower-level states a state (or a set
    of states, by union) refers to.

    ``states`` may be a single state index or a grounding set at
    ``level_index``.
    """
    n = hierarchy.num_levels
    if not 1 <= level_index <= n:
        raise LevelOutOfRange(f"level {level_index} not in 1..{n}")
    if isinstance(states, int):
        return hierarchy.grounding_of(level_index, states)
    if states.level_index != level_index:
        raise LevelMismatch(
            f"expected level {level_index}, got {states.level_index}"
        )
    out = GroundingSet.empty(level_index - 1)
    for s in states:
        out = out | hierarchy.grounding_of(level_index, s)
    return out


def final_ground(hierarchy, level_index: int, states: GroundingSet) -> GroundingSet:
    """Grounding composed all the way to the base MDP (identity at level 0)."""
    n = hierarchy.num_levels
    if not 0 <= level_index <= n:
        raise LevelOutOfRange(f"level {level_index} not in 0..{n}")
    if states.level_index != level_index:
        raise LevelMismatch(
            f"expected level {level_index}, got {states.level_index}"
        )
    if level_index == 0:
        return states
    out = GroundingSet.empty(0)
    for s in states:
        out = out | hierarchy.final_grounding_of(level_index, s)
    return out
