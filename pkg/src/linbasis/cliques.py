"""Maximal cliques and the clique / stable-set semantics of graph inferences.

An inference R -> S between graphs on the same nodes is valid under clique
entailment iff every maximal clique of R contains some maximal clique of S.
Under stable-set entailment the condition is the dual one; the two coincide
exactly on P4-free graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import SizeMismatchError, Web, dual


def maximal_cliques(g: Web) -> tuple[int, ...]:
    """All maximal cliques as NodeSet masks, sorted ascending by bit pattern.

    Plain Bron-Kerbosch without pivoting; with at most 16 nodes the simple
    variant is fast and easy to trust.
    """
    if g.n == 0:
        return (0,)
    neighbors = [g.neighbors(x) for x in range(g.n)]
    out: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if p == 0 and x == 0:
            out.append(r)
            return
        while p:
            v = (p & -p).bit_length() - 1
            bit = 1 << v
            expand(r | bit, p & neighbors[v], x & neighbors[v])
            p &= ~bit
            x |= bit

    expand(0, (1 << g.n) - 1, 0)
    out.sort()
    return tuple(out)


def _contains_clique_of(p: int, cliques: tuple[int, ...]) -> bool:
    return any(q & ~p == 0 for q in cliques)


def implies_cliquewise(r: Web, s: Web) -> bool:
    """Every maximal clique of r contains some maximal clique of s."""
    if r.n != s.n:
        raise SizeMismatchError(f"node counts differ: {r.n} vs {s.n}")
    s_cliques = maximal_cliques(s)
    return all(_contains_clique_of(p, s_cliques) for p in maximal_cliques(r))


def implies_stablewise(r: Web, s: Web) -> bool:
    """Stable-set entailment, computed as clique entailment on the duals."""
    if r.n != s.n:
        raise SizeMismatchError(f"node counts differ: {r.n} vs {s.n}")
    return implies_cliquewise(dual(s), dual(r))


def is_trivial_at(r: Web, s: Web, x: int) -> bool:
    """Every maximal clique P of r has a maximal clique of s inside P minus x."""
    if r.n != s.n:
        raise SizeMismatchError(f"node counts differ: {r.n} vs {s.n}")
    bit = 1 << x
    s_cliques = maximal_cliques(s)
    return all(_contains_clique_of(p & ~bit, s_cliques) for p in maximal_cliques(r))


def is_trivial(r: Web, s: Web) -> bool:
    return any(is_trivial_at(r, s, x) for x in range(r.n))


def find_countermodel(r: Web, s: Web) -> int | None:
    """First maximal clique of r (ascending) containing no maximal clique of s.

    None iff the inference is valid.  Under formula semantics the returned
    NodeSet is a satisfying assignment of the LHS that falsifies the RHS.
    """
    if r.n != s.n:
        raise SizeMismatchError(f"node counts differ: {r.n} vs {s.n}")
    s_cliques = maximal_cliques(s)
    for p in maximal_cliques(r):
        if not _contains_clique_of(p, s_cliques):
            return p
    return None


@dataclass
class CliqueCache:
    """Batch clique lists for a sorted graph family, keyed by numeric value.

    The search pipeline builds one per phase 3 and shares it read-only; the
    flat layout (values + offsets) is what the vectorized phases consume.
    """

    n: int
    numerics: "object"  # int64 ndarray, sorted ascending
    flat: "object"  # int64 ndarray of clique masks
    offsets: "object"  # int64 ndarray, len(numerics) + 1

    @classmethod
    def build(cls, n: int, numerics) -> "CliqueCache":
        import numpy as np

        from ._kernels import batch_maximal_cliques

        arr = np.asarray(numerics, dtype=np.int64)
        flat, offsets = batch_maximal_cliques(arr, n)
        return cls(n=n, numerics=arr, flat=flat, offsets=offsets)

    def cliques_at(self, index: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.flat[self.offsets[index] : self.offsets[index + 1]])

    def get(self, g: Web) -> tuple[int, ...]:
        import numpy as np

        if g.n != self.n:
            raise SizeMismatchError(f"cache holds {self.n}-node graphs, got {g.n}")
        idx = int(np.searchsorted(self.numerics, g.edges))
        if idx >= len(self.numerics) or int(self.numerics[idx]) != g.edges:
            raise KeyError(f"graph {g.edges} not in cache")
        return self.cliques_at(idx)

    def records(self):
        """Phase-3 checkpoint records "N : c1,c2,..."."""
        for i in range(len(self.numerics)):
            cliques = ",".join(str(int(v)) for v in self.flat[self.offsets[i] : self.offsets[i + 1]])
            yield f"{int(self.numerics[i])} : {cliques}"
