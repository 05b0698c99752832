"""Generation of all P4-free graphs of size n, and of all graphs (general mode).

P4-free graphs are generated by extending each (n-1)-node graph with a new
node n-1 under every adjacency pattern.  Because induced subgraphs of a
P4-free graph are P4-free, only quartets containing the new node need to be
re-checked, and because the new node's edges occupy the top bits of the
numeric representation, the parent's bits embed unchanged.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .graph import MAX_NODES, RangeError, Web, edge_bits, iota

ALL_GRAPHS_BUDGET = 8


class BudgetError(ValueError):
    """Enumeration would exceed the default size budget."""


def _p4_bad_table() -> np.ndarray:
    # Entry [t*8 + e]: quartet {x<y<z, new} with parent edges t = (xy, xz, yz)
    # and new-node edges e = (x-new, y-new, z-new) induces a P4.
    table = np.zeros(64, dtype=bool)
    for t in range(8):
        for e in range(8):
            deg = [0, 0, 0, 0]
            count = 0
            for k, (a, b) in enumerate(((0, 1), (0, 2), (1, 2))):
                if (t >> k) & 1:
                    deg[a] += 1
                    deg[b] += 1
                    count += 1
            for k in range(3):
                if (e >> k) & 1:
                    deg[k] += 1
                    deg[3] += 1
                    count += 1
            table[t * 8 + e] = count == 3 and max(deg) == 2 and min(deg) == 1
    return table


_P4_BAD = _p4_bad_table()


def _extend_p4free(parents: np.ndarray, n: int, chunk: int = 1 << 16) -> np.ndarray:
    """All P4-free n-node graphs whose first n-1 nodes induce a parent."""
    base = edge_bits(n - 1)
    patterns = np.arange(1 << (n - 1), dtype=np.int64)
    triples = list(itertools.combinations(range(n - 1), 3))
    out = []
    for lo in range(0, len(parents), chunk):
        block = parents[lo : lo + chunk]
        g = np.repeat(block, len(patterns))
        a = np.tile(patterns, len(block))
        ok = np.ones(len(g), dtype=bool)
        for x, y, z in triples:
            t = (
                ((g >> iota(x, y)) & 1)
                | (((g >> iota(x, z)) & 1) << 1)
                | (((g >> iota(y, z)) & 1) << 2)
            )
            e = ((a >> x) & 1) | (((a >> y) & 1) << 1) | (((a >> z) & 1) << 2)
            ok &= ~_P4_BAD[t * 8 + e]
        out.append(g[ok] | (a[ok] << base))
    merged = np.concatenate(out) if out else np.empty(0, dtype=np.int64)
    merged.sort()
    return merged


def p4_free_numerics(n: int) -> np.ndarray:
    """Sorted numeric representations of all P4-free graphs on n labelled nodes."""
    if not 0 <= n <= MAX_NODES:
        raise RangeError(f"node count {n} outside 0..{MAX_NODES}")
    current = np.zeros(1, dtype=np.int64)
    for k in range(1, n + 1):
        if k <= 3:
            # every graph on <= 3 nodes is P4-free
            current = np.arange(1 << edge_bits(k), dtype=np.int64)
        else:
            current = _extend_p4free(current, k)
    return current


def p4_free_graphs(n: int) -> list[Web]:
    """Exactly the P4-free graphs on n labelled nodes, sorted by numeric."""
    return [Web(n, int(v)) for v in p4_free_numerics(n)]


def all_graph_numerics(n: int, allow_large: bool = False) -> np.ndarray:
    if not 0 <= n <= MAX_NODES:
        raise RangeError(f"node count {n} outside 0..{MAX_NODES}")
    if n > ALL_GRAPHS_BUDGET and not allow_large:
        raise BudgetError(f"all_graphs(n={n}) exceeds the default budget (n <= {ALL_GRAPHS_BUDGET})")
    if edge_bits(n) > 62:
        raise RangeError(f"all-graphs enumeration not supported beyond 62 edge bits")
    return np.arange(1 << edge_bits(n), dtype=np.int64)


def all_graphs(n: int, allow_large: bool = False) -> Iterator[Web]:
    """All 2^(n(n-1)/2) graphs in numeric order, streamed."""
    if not 0 <= n <= MAX_NODES:
        raise RangeError(f"node count {n} outside 0..{MAX_NODES}")
    if n > ALL_GRAPHS_BUDGET and not allow_large:
        raise BudgetError(f"all_graphs(n={n}) exceeds the default budget (n <= {ALL_GRAPHS_BUDGET})")
    for value in range(1 << edge_bits(n)):
        yield Web(n, value)


def phase1_records(n: int, mode: str, numerics) -> Iterator[str]:
    """Phase-1 checkpoint lines: header then one numeric per line."""
    yield f"phase1 n={n} mode={mode}"
    for value in numerics:
        yield str(int(value))
