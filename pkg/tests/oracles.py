"""Independent reference computations used to check the optimized code paths."""

from collections import defaultdict
from itertools import combinations

from scratch_anomaly.model import TemporalProperty


def brute_force_closed(rows, k, min_size=1):
    """Closed itemsets by enumerating every subset of the item universe."""
    universe = sorted(frozenset().union(*rows)) if rows else []
    result = set()
    for size in range(max(min_size, 1), len(universe) + 1):
        for combo in combinations(universe, size):
            itemset = frozenset(combo)
            cover = [i for i, row in enumerate(rows) if itemset <= row]
            if len(cover) < k:
                continue
            closure = frozenset.intersection(*(rows[i] for i in cover))
            if closure == itemset:
                result.add((itemset, frozenset(cover)))
    return result


def _out_edges(model):
    out = defaultdict(list)
    for t in sorted(model.transitions, key=lambda t: (t.src, t.dst, str(t.label))):
        out[t.src].append(t)
    return out


def path_pairs(model, max_edge_uses=1):
    """Ordered label pairs seen along walks from the initial location.

    Each transition may be taken at most ``max_edge_uses`` times per walk, so
    ``max_edge_uses=1`` enumerates simple paths of an acyclic model and
    ``max_edge_uses=2`` unrolls each loop twice.
    """
    out = _out_edges(model)
    pairs = set()

    def walk(loc, seen_labels, uses):
        for t in out[loc]:
            if uses.get(t, 0) >= max_edge_uses:
                continue
            uses[t] = uses.get(t, 0) + 1
            if t.label is not None:
                for a in seen_labels:
                    pairs.add(TemporalProperty(a, t.label))
                walk(t.dst, seen_labels + [t.label], uses)
            else:
                walk(t.dst, seen_labels, uses)
            uses[t] -= 1

    walk(model.initial, [], {})
    return frozenset(pairs)
