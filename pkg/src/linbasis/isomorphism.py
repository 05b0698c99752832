"""Node permutations, least representatives, and inference isomorphism.

The numeric representation induces a strict total order on graphs; a graph is
`least` when it is the smallest member of its isomorphism class.  Phase 2 of
the search resolves every graph to its least form with a witnessing
permutation, chaining each non-least graph through the first smaller isomorph
found in permutation enumeration order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

from .graph import RangeError, SizeMismatchError, Web, dual, edge_bits, iota

if TYPE_CHECKING:
    from .rewrite import GraphInference

Permutation = tuple[int, ...]

FACTORIAL_SCAN_MAX = 10


class LhsNotLeastError(ValueError):
    """is_least_inference requires an already-least LHS."""


class NotSortedError(ValueError):
    """build_least_map requires input sorted ascending by numeric."""


def check_permutation(p: Sequence[int], n: int) -> None:
    if len(p) != n or sorted(p) != list(range(n)):
        raise SizeMismatchError(f"{tuple(p)} is not a permutation of 0..{n - 1}")


def apply_perm(p: Sequence[int], g: Web) -> Web:
    """Graph with edge {p(x), p(y)} for each edge {x, y} of g."""
    check_permutation(p, g.n)
    edges = 0
    value = g.edges
    e = 0
    for y in range(g.n):
        for x in range(y):
            if (value >> e) & 1:
                a, b = p[x], p[y]
                if a > b:
                    a, b = b, a
                edges |= 1 << iota(a, b)
            e += 1
    return Web(g.n, edges)


def identity(n: int) -> Permutation:
    return tuple(range(n))


def invert(p: Sequence[int]) -> Permutation:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def compose(after: Sequence[int], before: Sequence[int]) -> Permutation:
    """(after o before)(x) = after[before[x]]."""
    return tuple(after[b] for b in before)


def encode_perm(p: Sequence[int]) -> int:
    enc = 0
    for i, v in enumerate(p):
        enc |= v << (4 * i)
    return enc


def decode_perm(enc: int, n: int) -> Permutation:
    return tuple((enc >> (4 * i)) & 15 for i in range(n))


@lru_cache(maxsize=4)
def _perm_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(perms, src): perms is (n!, n); image bit e of a graph g under perms[k]
    equals bit src[k, e] of g."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    pinv = np.argsort(perms, axis=1).astype(np.int8)
    bits = edge_bits(n)
    src = np.empty((len(perms), bits), dtype=np.int8)
    e = 0
    for y in range(n):
        for x in range(y):
            a = pinv[:, x].astype(np.int64)
            b = pinv[:, y].astype(np.int64)
            lo = np.minimum(a, b)
            hi = np.maximum(a, b)
            src[:, e] = lo + hi * (hi - 1) // 2
            e += 1
    return perms, src


def perm_images(g: Web, perm_rows: np.ndarray | None = None) -> np.ndarray:
    """Numerics of g's images under all n! permutations (or the given rows)."""
    if g.n > FACTORIAL_SCAN_MAX:
        raise RangeError(f"factorial scan limited to n <= {FACTORIAL_SCAN_MAX}")
    if g.n == 0:
        return np.zeros(1, dtype=np.int64)
    _, src = _perm_tables(g.n)
    rows = src if perm_rows is None else perm_rows
    bits = (np.int64(g.edges) >> np.arange(edge_bits(g.n), dtype=np.int64)) & 1
    weights = np.int64(1) << np.arange(edge_bits(g.n), dtype=np.int64)
    return bits[rows.astype(np.int64)] @ weights


def least_of(g: Web) -> tuple[Web, Permutation]:
    """The numerically smallest isomorph and a first witnessing permutation."""
    if g.n == 0:
        return g, ()
    images = perm_images(g)
    k = int(np.argmin(images))
    perms, _ = _perm_tables(g.n)
    return Web(g.n, int(images[k])), tuple(int(v) for v in perms[k])


def is_least(g: Web) -> bool:
    return least_of(g)[0].edges == g.edges


def automorphisms(g: Web) -> list[Permutation]:
    if g.n == 0:
        return [()]
    images = perm_images(g)
    perms, _ = _perm_tables(g.n)
    return [tuple(int(v) for v in perms[k]) for k in np.nonzero(images == g.edges)[0]]


@dataclass
class LeastMap:
    """numeric -> (numeric of least representative, permutation to it).

    Least entries map to themselves with the identity; every other entry's
    permutation was composed through a previously resolved smaller isomorph.
    """

    n: int
    numerics: np.ndarray  # int64, sorted ascending
    least_index: np.ndarray  # int32 index into numerics
    perm_enc: np.ndarray  # int64, 4-bit fields

    def lookup(self, value: int) -> int:
        idx = int(np.searchsorted(self.numerics, value))
        if idx >= len(self.numerics) or int(self.numerics[idx]) != value:
            raise KeyError(f"graph {value} not in map")
        return idx

    def least_numeric(self, value: int) -> int:
        return int(self.numerics[self.least_index[self.lookup(value)]])

    def perm_to_least(self, value: int) -> Permutation:
        return decode_perm(int(self.perm_enc[self.lookup(value)]), self.n)

    def least_positions(self) -> np.ndarray:
        return np.nonzero(self.least_index == np.arange(len(self.numerics), dtype=self.least_index.dtype))[0]

    @property
    def least_count(self) -> int:
        return int(len(self.least_positions()))

    def records(self) -> Iterator[str]:
        """Phase-2 checkpoint lines "N_g -> N_least : p0 p1 ... p{n-1}"."""
        for i in range(len(self.numerics)):
            perm = decode_perm(int(self.perm_enc[i]), self.n)
            least = int(self.numerics[self.least_index[i]])
            yield f"{int(self.numerics[i])} -> {least} : {' '.join(str(v) for v in perm)}"


def build_least_map(
    numerics: np.ndarray | Iterable[Web],
    n: int | None = None,
    perm_block: int = 512,
    graph_chunk: int = 1 << 15,
) -> LeastMap:
    """Resolve every graph to its least isomorph, as phase 2 describes.

    For each graph the permutations are scanned in enumeration order until one
    yields a smaller image; the map entry then composes through the already
    resolved entry of that image.  Requires the input sorted ascending and
    closed under isomorphism.
    """
    if not isinstance(numerics, np.ndarray):
        webs = list(numerics)
        if n is None:
            n = webs[0].n if webs else 0
        numerics = np.array([g.edges for g in webs], dtype=np.int64)
    if n is None:
        raise ValueError("node count required with a raw numeric array")
    if n > FACTORIAL_SCAN_MAX:
        raise RangeError(f"factorial scan limited to n <= {FACTORIAL_SCAN_MAX}")
    count = len(numerics)
    if count == 0:
        return LeastMap(n, numerics.astype(np.int64), np.empty(0, np.int32), np.empty(0, np.int64))
    if np.any(numerics[1:] <= numerics[:-1]):
        raise NotSortedError("input must be strictly ascending by numeric")
    if n == 0:
        return LeastMap(
            n, numerics.astype(np.int64), np.zeros(1, np.int32), np.zeros(1, np.int64)
        )

    perms, src = _perm_tables(n)
    nperms = len(perms)
    bits = edge_bits(n)

    rho_idx = np.full(count, -1, dtype=np.int64)  # first perm giving a smaller image
    target = np.zeros(count, dtype=np.int64)  # that smaller image

    pending = np.arange(count, dtype=np.int64)
    for b0 in range(0, nperms, perm_block):
        if len(pending) == 0:
            break
        rows = src[b0 : b0 + perm_block].astype(np.int64)
        # weight matrix: image under perm k is the bit vector of g times column
        # k; exact in float64 because numerics stay below 2^45
        wmat = np.zeros((len(rows), bits))
        for e in range(bits):
            wmat[np.arange(len(rows)), rows[:, e]] += float(1 << e)
        wmat = wmat.T
        block_found = []
        for c0 in range(0, len(pending), graph_chunk):
            chunk = pending[c0 : c0 + graph_chunk]
            values = numerics[chunk]
            bitmat = ((values[:, None] >> np.arange(bits, dtype=np.int64)[None, :]) & 1).astype(
                float
            )
            images = bitmat @ wmat  # (chunk, block)
            smaller = images < values[:, None].astype(float)
            hit = smaller.any(axis=1)
            first = np.argmax(smaller, axis=1)
            sel = np.nonzero(hit)[0]
            rho_idx[chunk[sel]] = b0 + first[sel]
            target[chunk[sel]] = images[sel, first[sel]].astype(np.int64)
            block_found.append(chunk[~hit])
        pending = np.concatenate(block_found) if block_found else pending[:0]

    least_index = np.empty(count, dtype=np.int32)
    perm_enc = np.empty(count, dtype=np.int64)
    ident_enc = encode_perm(identity(n))
    targets = np.searchsorted(numerics, target)
    resolved = rho_idx >= 0
    if np.any(
        resolved & ((targets >= count) | (numerics[np.minimum(targets, count - 1)] != target))
    ):
        raise ValueError("input is not closed under isomorphism")
    # a found smaller image is strictly below the current graph, so its entry
    # is already composed when we reach it: one ascending pass suffices
    for i in range(count):
        r = rho_idx[i]
        if r < 0:
            least_index[i] = i
            perm_enc[i] = ident_enc
        else:
            j = int(targets[i])
            after = int(perm_enc[j])
            rho = perms[r]
            enc = 0
            for x in range(n):
                enc |= ((after >> (4 * int(rho[x]))) & 15) << (4 * x)
            least_index[i] = least_index[j]
            perm_enc[i] = enc
    return LeastMap(n, numerics.astype(np.int64), least_index, perm_enc)


def _canonical_pair(lhs: Web, rhs: Web) -> tuple[int, int]:
    """Lexicographically least (numeric lhs, numeric rhs) over all permutations."""
    limg = perm_images(lhs)
    best = limg.min()
    stabilizer = np.nonzero(limg == best)[0]
    _, src = _perm_tables(lhs.n)
    rimg = perm_images(rhs, src[stabilizer])
    return int(best), int(rimg.min())


def is_isomorphic(a: "GraphInference", b: "GraphInference") -> bool:
    """One permutation maps a.lhs to b.lhs and a.rhs to b.rhs simultaneously."""
    if a.n != b.n:
        raise SizeMismatchError(f"node counts differ: {a.n} vs {b.n}")
    return _canonical_pair(a.lhs, a.rhs) == _canonical_pair(b.lhs, b.rhs)


def is_self_dual(inf: "GraphInference") -> bool:
    """The inference is isomorphic to (dual rhs -> dual lhs)."""
    return _canonical_pair(inf.lhs, inf.rhs) == _canonical_pair(dual(inf.rhs), dual(inf.lhs))


def is_least_inference(inf: "GraphInference") -> bool:
    """No automorphism of the (least) LHS strictly lowers the RHS numeric."""
    if not is_least(inf.lhs):
        raise LhsNotLeastError("inference LHS is not a least graph")
    limg = perm_images(inf.lhs)
    auts = np.nonzero(limg == inf.lhs.edges)[0]
    _, src = _perm_tables(inf.n)
    rimg = perm_images(inf.rhs, src[auts])
    return int(rimg.min()) >= inf.rhs.edges


def least_inference_form(inf: "GraphInference") -> "GraphInference":
    """The canonical member of the inference's isomorphism class."""
    from .rewrite import GraphInference

    lhs_num, rhs_num = _canonical_pair(inf.lhs, inf.rhs)
    return GraphInference(Web(inf.n, lhs_num), Web(inf.n, rhs_num))


def dedup_inferences(inferences: Sequence["GraphInference"]) -> list["GraphInference"]:
    """One representative per isomorphism class: the member with the
    lexicographically least (numeric lhs, numeric rhs).  Output is ordered by
    canonical key, so the result is independent of input order."""
    groups: dict[tuple[int, int], tuple[int, int]] = {}
    for inf in inferences:
        key = _canonical_pair(inf.lhs, inf.rhs)
        pair = (inf.lhs.edges, inf.rhs.edges)
        if key not in groups or pair < groups[key]:
            groups[key] = pair
    from .rewrite import GraphInference

    out = []
    for key in sorted(groups):
        lhs_num, rhs_num = groups[key]
        n = inferences[0].n
        out.append(GraphInference(Web(n, lhs_num), Web(n, rhs_num)))
    return out
