"""Closed frequent itemset mining over per-script temporal property sets.

The search is Close-by-One: attributes (properties) are numbered, extents
(supporter sets) and rows are bitmasks, and each closed set is produced once
from its canonical generator. Branches whose extent falls below the support
threshold are pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .model import TemporalProperty

MODES = ("AA", "AS")


@dataclass(frozen=True)
class MinerConfig:
    min_support: int | None = None  # None: derive from group size
    min_pattern_size: int = 2
    max_missing: int = 2
    min_confidence: float = 0.9
    top_n: int = 10
    mode: str = "AA"
    adjacent_only: bool = False
    no_self_pairs: bool = False

    def __post_init__(self):
        if self.min_support is not None and (not isinstance(self.min_support, int) or self.min_support < 1):
            raise ValueError(f"min_support must be an integer >= 1 or None, got {self.min_support!r}")
        for name in ("min_pattern_size", "max_missing", "top_n"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError(f"min_confidence must lie in [0, 1], got {self.min_confidence!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    def support_for(self, n_rows: int) -> int:
        if self.min_support is not None:
            return self.min_support
        return default_min_support(n_rows)

    def echo(self) -> dict:
        return {
            "mode": self.mode,
            "min_support": "auto" if self.min_support is None else self.min_support,
            "min_pattern_size": self.min_pattern_size,
            "max_missing": self.max_missing,
            "min_confidence": self.min_confidence,
            "top_n": self.top_n,
            "adjacent_only": self.adjacent_only,
            "no_self_pairs": self.no_self_pairs,
        }


def default_min_support(n_rows: int) -> int:
    return max(3, math.ceil(0.1 * n_rows))


@dataclass
class PropertyDB:
    rows: list[tuple[Hashable, frozenset[TemporalProperty]]]
    universe: frozenset[TemporalProperty] = field(init=False)

    def __post_init__(self):
        ids = [sid for sid, _ in self.rows]
        if len(set(ids)) != len(ids):
            raise ValueError("script ids in a PropertyDB must be unique")
        self.rows = [(sid, frozenset(props)) for sid, props in self.rows]
        self.universe = frozenset().union(*(props for _, props in self.rows))

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Pattern:
    pattern_id: int
    properties: frozenset[TemporalProperty]
    support: int
    supporters: frozenset

    def sorted_properties(self) -> list[TemporalProperty]:
        return sorted(self.properties)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def closed_itemsets(rows: Sequence[frozenset], min_support: int) -> list[tuple[frozenset, int]]:
    """All closed itemsets of ``rows`` with support >= ``min_support``.

    Returns ``(itemset, extent_mask)`` pairs; bit ``i`` of the mask is row ``i``.
    The empty itemset is included when it is closed and frequent.
    """
    items = sorted(frozenset().union(*rows))
    index = {item: i for i, item in enumerate(items)}
    row_masks = [sum(1 << index[p] for p in row) for row in rows]
    item_extents = [0] * len(items)
    for r, row in enumerate(rows):
        for p in row:
            item_extents[index[p]] |= 1 << r
    all_items = (1 << len(items)) - 1

    def closure(extent: int) -> int:
        intent = all_items
        for r in _bits(extent):
            intent &= row_masks[r]
        return intent

    found: list[tuple[int, int]] = []
    top_extent = (1 << len(rows)) - 1
    if len(rows) < min_support:
        return []
    top_intent = closure(top_extent)
    stack = [(top_extent, top_intent, 0)]
    found.append((top_intent, top_extent))
    while stack:
        extent, intent, start = stack.pop()
        for j in range(start, len(items)):
            bit = 1 << j
            if intent & bit:
                continue
            new_extent = extent & item_extents[j]
            if new_extent.bit_count() < min_support:
                continue
            new_intent = closure(new_extent)
            below = bit - 1
            # canonicity: the closure must not add any item preceding j
            if new_intent & below != intent & below:
                continue
            found.append((new_intent, new_extent))
            stack.append((new_extent, new_intent, j + 1))
    return [(frozenset(items[i] for i in _bits(intent)), extent) for intent, extent in found]


def mine_patterns(db: PropertyDB, config: MinerConfig) -> list[Pattern]:
    """Closed property sets shared by at least ``k`` scripts of ``db``.

    ``k`` is ``config.min_support`` or, when unset, the size-scaled default.
    Patterns smaller than ``config.min_pattern_size`` are dropped. Output is
    ordered by support, then size (both descending), then property order, and
    pattern ids follow that order.
    """
    k = config.support_for(len(db))
    ids = [sid for sid, _ in db.rows]
    mined = []
    for itemset, extent in closed_itemsets([props for _, props in db.rows], k):
        if len(itemset) < max(1, config.min_pattern_size):
            continue
        supporters = frozenset(ids[r] for r in _bits(extent))
        mined.append((itemset, supporters))
    mined.sort(key=lambda m: (-len(m[1]), -len(m[0]), sorted(m[0])))
    return [Pattern(i, itemset, len(supporters), supporters) for i, (itemset, supporters) in enumerate(mined)]
