"""Small-graph algorithms used by packing classes.

Graphs are stored as one Python ``int`` bitset per vertex; ``adj[v] >> u & 1``
is the edge test.  Vertex counts in this package are tiny (tens at most), so
the algorithms favour clarity over asymptotics.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Sequence


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class SimpleGraph:
    """Undirected graph without self-loops on vertices ``0..n-1``."""

    __slots__ = ("n", "adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        self.n = n
        self.adj = [0] * n
        for u, v in edges:
            self.add_edge(u, v)

    @classmethod
    def from_rows(cls, rows: Sequence[int]) -> "SimpleGraph":
        g = cls(len(rows))
        g.adj = list(rows)
        full = (1 << g.n) - 1
        for v in range(g.n):
            if g.adj[v] >> v & 1 or g.adj[v] & ~full:
                raise ValueError(f"row {v} has a self-loop or out-of-range bit")
        for u in range(g.n):
            for v in iter_bits(g.adj[u]):
                if not g.adj[v] >> u & 1:
                    raise ValueError(f"adjacency not symmetric at ({u}, {v})")
        return g

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.adj[u] |= 1 << v
        self.adj[v] |= 1 << u

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.adj[u] >> (u + 1) << (u + 1))]

    def complement(self) -> "SimpleGraph":
        full = (1 << self.n) - 1
        g = SimpleGraph(self.n)
        g.adj = [full & ~self.adj[v] & ~(1 << v) for v in range(self.n)]
        return g

    def relabel(self, perm: Sequence[int]) -> "SimpleGraph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        return SimpleGraph(self.n, ((perm[u], perm[v]) for u, v in self.edges()))

    def __eq__(self, other):
        return isinstance(other, SimpleGraph) and self.adj == other.adj

    def __repr__(self):
        return f"SimpleGraph({self.n}, {self.edges()})"


class Orientation:
    """Directed version of a graph: ``succ[u]`` is the bitset of heads of arcs ``u -> v``."""

    __slots__ = ("n", "succ")

    def __init__(self, succ: Sequence[int]):
        self.n = len(succ)
        self.succ = tuple(succ)

    def arcs(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.succ[u])]

    def predecessors(self) -> list[int]:
        pred = [0] * self.n
        for u in range(self.n):
            for v in iter_bits(self.succ[u]):
                pred[v] |= 1 << u
        return pred

    def is_transitive(self) -> bool:
        return all(self.succ[v] & ~self.succ[u] == 0 for u in range(self.n) for v in iter_bits(self.succ[u]))

    def orients(self, g: SimpleGraph) -> bool:
        """True when every edge of ``g`` is directed exactly once and nothing else is."""
        if self.n != g.n:
            return False
        pred = self.predecessors()
        if any(self.succ[u] & pred[u] for u in range(self.n)):
            return False
        return all(self.succ[u] | pred[u] == g.adj[u] for u in range(self.n))

    def topological_order(self) -> list[int]:
        pred = self.predecessors()
        order, placed = [], 0
        remaining = set(range(self.n))
        while remaining:
            ready = [v for v in sorted(remaining) if pred[v] & ~placed == 0]
            if not ready:
                raise ValueError("orientation has a cycle")
            for v in ready:
                order.append(v)
                placed |= 1 << v
                remaining.discard(v)
        return order


def find_induced_c4(g: SimpleGraph) -> tuple[int, int, int, int] | None:
    """Vertices ``a, b, c, d`` with cycle a-b-c-d-a and chords ac, bd absent."""
    for a in range(g.n):
        for c in range(a + 1, g.n):
            if g.adj[a] >> c & 1:
                continue
            common = g.adj[a] & g.adj[c]
            for b in iter_bits(common):
                rest = common & ~g.adj[b] & ~(1 << b)
                if rest:
                    d = (rest & -rest).bit_length() - 1
                    return a, b, c, d
    return None


def _implication_class(rows: list[int], a: int, b: int) -> set[tuple[int, int]]:
    # Forcing: (x, y) forces (x, y') when xy' is an edge and yy' is not; same for heads.
    found = {(a, b)}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        for y2 in iter_bits(rows[x] & ~rows[y] & ~(1 << y)):
            if (x, y2) not in found:
                found.add((x, y2))
                stack.append((x, y2))
        for x2 in iter_bits(rows[y] & ~rows[x] & ~(1 << x)):
            if (x2, y) not in found:
                found.add((x2, y))
                stack.append((x2, y))
    return found


def find_transitive_orientation(g: SimpleGraph) -> Orientation | None:
    """Transitive orientation of ``g``, or ``None`` if ``g`` is not a comparability graph.

    Implication classes are peeled off one at a time from the shrinking edge
    set; the graph is a comparability graph exactly when no class contains an
    arc together with its reverse, and the union of the chosen classes is then
    transitive.
    """
    rows = list(g.adj)
    succ = [0] * g.n
    for a in range(g.n):
        while rows[a]:
            b = (rows[a] & -rows[a]).bit_length() - 1
            cls = _implication_class(rows, a, b)
            for x, y in cls:
                if (y, x) in cls:
                    return None
            for x, y in cls:
                succ[x] |= 1 << y
                rows[x] &= ~(1 << y)
                rows[y] &= ~(1 << x)
    orientation = Orientation(succ)
    if not orientation.is_transitive():
        return None
    return orientation


def interval_realization(g: SimpleGraph) -> list[tuple[int, int]] | None:
    """Half-open integer intervals whose intersection graph is ``g``, or ``None``.

    The complement is oriented transitively ("u lies entirely left of v").  In
    an interval graph the predecessor sets of that order form a chain; each
    vertex starts at the rank of its own predecessor set and ends at the rank
    of the first predecessor set that contains it.
    """
    if find_induced_c4(g) is not None:
        return None
    order = find_transitive_orientation(g.complement())
    if order is None:
        return None
    pred = order.predecessors()
    chain = sorted(set(pred), key=lambda m: bin(m).count("1"))
    for small, big in zip(chain, chain[1:]):
        if small & ~big:
            return None
    rank = {m: i for i, m in enumerate(chain)}
    intervals = []
    for v in range(g.n):
        left = rank[pred[v]]
        right = next((j for j, m in enumerate(chain) if m >> v & 1), len(chain))
        intervals.append((left, right))
    return intervals


def is_interval_graph(g: SimpleGraph) -> bool:
    """No induced C4 and a transitively orientable complement."""
    if find_induced_c4(g) is not None:
        return False
    return find_transitive_orientation(g.complement()) is not None


def intersection_graph(intervals: Sequence[tuple[int, int]]) -> SimpleGraph:
    g = SimpleGraph(len(intervals))
    for u, (a0, a1) in enumerate(intervals):
        for v in range(u + 1, len(intervals)):
            b0, b1 = intervals[v]
            if max(a0, b0) < min(a1, b1):
                g.add_edge(u, v)
    return g


def max_weight_clique(rows: Sequence[int], weights: Sequence[int], candidates: int) -> tuple[int, int]:
    """Exact maximum-weight clique among ``candidates``; returns ``(value, vertex mask)``."""
    best = [0, 0]

    def expand(value: int, chosen: int, cand: int) -> None:
        if not cand:
            if value > best[0]:
                best[0], best[1] = value, chosen
            return
        bound = value
        pick, pick_w = -1, -1
        for v in iter_bits(cand):
            bound += weights[v]
            if weights[v] > pick_w:
                pick, pick_w = v, weights[v]
        if bound <= best[0]:
            return
        bit = 1 << pick
        expand(value + pick_w, chosen | bit, cand & rows[pick])
        expand(value, chosen, cand & ~bit)

    expand(0, 0, candidates)
    return best[0], best[1]


def max_weight_stable_set(g: SimpleGraph, weights: Sequence[int]) -> tuple[int, frozenset[int]]:
    """Exact maximum-weight independent set by branch and bound."""
    if len(weights) != g.n:
        raise ValueError("one weight per vertex required")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    comp = g.complement()
    value, mask = max_weight_clique(comp.adj, weights, (1 << g.n) - 1)
    return value, frozenset(iter_bits(mask))
