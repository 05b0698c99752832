"""Bit-packed undirected graphs on nodes 0..n-1 and relation webs.

Edges live in a single unsigned integer: bit iota(x, y) is set iff {x, y} is
an edge (x < y), where iota(x, y) = x + y(y-1)/2.  This keeps graphs hashable,
orderable by their numeric value, and cheap to copy; with n <= 16 the field is
at most 120 bits wide.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .formula import (
    And,
    LinearFormula,
    NegVar,
    Or,
    Top,
    Bot,
    Var,
    print_formula,
)

MAX_NODES = 16


class OrderError(ValueError):
    """iota requires x < y."""


class RangeError(ValueError):
    """Node count or numeric representation out of range."""


class SizeMismatchError(ValueError):
    """Two graphs that should share a node count do not."""


class NotCographError(ValueError):
    """from_web needs a P4-free input."""


class UnsupportedLeafError(ValueError):
    """to_web needs a constant-free negation-free formula."""


def iota(x: int, y: int) -> int:
    """Triangular pair index; bijective onto 0..n(n-1)/2-1 for nodes below n."""
    if x >= y:
        raise OrderError(f"iota needs x < y, got ({x}, {y})")
    return x + y * (y - 1) // 2


def edge_bits(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class Web:
    """Simple undirected graph; `edges` is the packed numeric representation."""

    n: int
    edges: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.n <= MAX_NODES:
            raise RangeError(f"node count {self.n} outside 0..{MAX_NODES}")
        if not 0 <= self.edges < (1 << edge_bits(self.n)):
            raise RangeError(f"edge field {self.edges} too wide for n={self.n}")

    def has_edge(self, x: int, y: int) -> bool:
        if x == y:
            return False
        if x > y:
            x, y = y, x
        return (self.edges >> iota(x, y)) & 1 == 1

    def neighbors(self, x: int) -> int:
        """NodeSet of nodes adjacent to x."""
        mask = 0
        for y in range(self.n):
            if y != x and self.has_edge(x, y):
                mask |= 1 << y
        return mask

    def edge_count(self) -> int:
        return bin(self.edges).count("1")


def numeric(g: Web) -> int:
    return g.edges


def from_numeric(n: int, value: int) -> Web:
    if not 0 <= n <= MAX_NODES:
        raise RangeError(f"node count {n} outside 0..{MAX_NODES}")
    if not 0 <= value < (1 << edge_bits(n)):
        raise RangeError(f"{value} is not a numeric representation for n={n}")
    return Web(n, value)


def web_from_edges(n: int, pairs) -> Web:
    edges = 0
    for x, y in pairs:
        if x > y:
            x, y = y, x
        edges |= 1 << iota(x, y)
    return Web(n, edges)


def edge_pairs(g: Web) -> list[tuple[int, int]]:
    return [(x, y) for y in range(g.n) for x in range(y) if g.has_edge(x, y)]


# Local pair order inside a quartet {a<b<c<d}: (a,b),(a,c),(b,c),(a,d),(b,d),(c,d).
# A 4-node graph is a P4 iff it has 3 edges, no degree-3 node and no isolated node.
@lru_cache(maxsize=1)
def _p4_table() -> tuple[bool, ...]:
    table = []
    local_pairs = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]
    for mask in range(64):
        deg = [0, 0, 0, 0]
        count = 0
        for k, (a, b) in enumerate(local_pairs):
            if (mask >> k) & 1:
                deg[a] += 1
                deg[b] += 1
                count += 1
        table.append(count == 3 and max(deg) == 2 and min(deg) == 1)
    return tuple(table)


def _quartet_mask(g: Web, a: int, b: int, c: int, d: int) -> int:
    mask = 0
    for k, (x, y) in enumerate(((a, b), (a, c), (b, c), (a, d), (b, d), (c, d))):
        if (g.edges >> iota(x, y)) & 1:
            mask |= 1 << k
    return mask


def is_p4_free(g: Web) -> bool:
    """True iff no 4-node induced subgraph is a path P4 (i.e. g is a cograph)."""
    table = _p4_table()
    for quad in itertools.combinations(range(g.n), 4):
        if table[_quartet_mask(g, *quad)]:
            return False
    return True


def induced(g: Web, nodes: int) -> Web:
    """Induced subgraph on the NodeSet `nodes`, renumbered to 0..|s|-1 in order."""
    members = [x for x in range(g.n) if (nodes >> x) & 1]
    edges = 0
    for j, y in enumerate(members):
        for i in range(j):
            if g.has_edge(members[i], y):
                edges |= 1 << iota(i, j)
    return Web(len(members), edges)


def dual(g: Web) -> Web:
    """Complement graph; involutive."""
    full = (1 << edge_bits(g.n)) - 1
    return Web(g.n, g.edges ^ full)


def is_module(g: Web, members: int) -> bool:
    """True iff all members see an identical neighbourhood outside `members`."""
    for z in range(g.n):
        if (members >> z) & 1:
            continue
        pattern = g.neighbors(z) & members
        if pattern != 0 and pattern != members:
            return False
    return True


def nodeset(members) -> int:
    mask = 0
    for x in members:
        mask |= 1 << x
    return mask


def nodeset_members(mask: int) -> tuple[int, ...]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return tuple(out)


def to_web(f: LinearFormula) -> tuple[Web, tuple[str, ...]]:
    """Relation web of a constant-free negation-free formula.

    Nodes are assigned in first-occurrence order; the mapping is returned.
    An edge joins two variables iff their least common connective is an And.
    """
    order: list[str] = []
    _first_occurrence(f, order)
    if not order:
        raise UnsupportedLeafError("formula has no variables")
    return to_web_with_order(f, order), tuple(order)


def to_web_with_order(f: LinearFormula, order) -> Web:
    index = {name: i for i, name in enumerate(order)}
    n = len(index)
    edges = 0

    def walk(node: LinearFormula) -> list[int]:
        if isinstance(node, Var):
            return [index[node.name]]
        if isinstance(node, (Top, Bot, NegVar)):
            raise UnsupportedLeafError(
                f"to_web needs constant-free negation-free input, got {print_formula(node)}"
            )
        left = walk(node.left)
        right = walk(node.right)
        if isinstance(node, And):
            nonlocal edges
            for x in left:
                for y in right:
                    edges |= 1 << (iota(x, y) if x < y else iota(y, x))
        return left + right

    walk(f)
    return Web(n, edges)


def _first_occurrence(f: LinearFormula, order: list[str]) -> None:
    if isinstance(f, Var):
        order.append(f.name)
    elif isinstance(f, (And, Or)):
        _first_occurrence(f.left, order)
        _first_occurrence(f.right, order)
    elif isinstance(f, NegVar):
        raise UnsupportedLeafError("to_web needs negation-free input")
    else:
        raise UnsupportedLeafError("to_web needs constant-free input")


def _components(g: Web, members: list[int]) -> list[list[int]]:
    remaining = set(members)
    comps = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        frontier = [seed]
        while frontier:
            x = frontier.pop()
            for y in list(remaining - comp):
                if g.has_edge(x, y):
                    comp.add(y)
                    frontier.append(y)
        comps.append(sorted(comp))
        remaining -= comp
    return sorted(comps, key=min)


def from_web(g: Web, names: tuple[str, ...] | None = None) -> LinearFormula:
    """A cograph decomposition of g; leaves named x0..x{n-1} unless given.

    Deterministic: parts are ordered by least contained node and folded left.
    Raises NotCographError when g is not P4-free.
    """
    if g.n == 0:
        raise NotCographError("the empty web has no formula decomposition")
    if not is_p4_free(g):
        raise NotCographError("web contains an induced P4")
    if names is None:
        names = tuple(f"x{i}" for i in range(g.n))
    gd = dual(g)

    def build(members: list[int]) -> LinearFormula:
        if len(members) == 1:
            return Var(names[members[0]])
        comps = _components(g, members)
        if len(comps) > 1:
            parts = [build(c) for c in comps]
            out = parts[0]
            for part in parts[1:]:
                out = Or(out, part)
            return out
        comps = _components(gd, members)
        if len(comps) > 1:
            parts = [build(c) for c in comps]
            out = parts[0]
            for part in parts[1:]:
                out = And(out, part)
            return out
        raise NotCographError("web is connected and co-connected")

    return build(list(range(g.n)))


def format_graph(g: Web) -> str:
    """External text form "n N"."""
    return f"{g.n} {g.edges}"


def parse_graph(text: str) -> Web:
    parts = text.split()
    if len(parts) != 2:
        raise ValueError(f"graph text must be 'n N', got {text!r}")
    return from_numeric(int(parts[0]), int(parts[1]))
