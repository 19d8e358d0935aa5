"""Packing classes: pairs of component graphs describing relative box positions.

For every pair of boxes and every dimension the state records whether their
projections onto that axis intersect (``IN``), are disjoint (``OUT``) or are
still undecided (``FREE``).  A complete state is a packing class when

* each dimension's In-graph is an interval graph,
* every stable set of a dimension's In-graph fits in the container extent,
* no pair is In in both dimensions.

Those three conditions hold for the projections of any feasible packing, and
conversely :func:`extract_layout` turns any complete state satisfying them into
concrete coordinates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .geometry import Container, Layout, LayoutError, ModuleSpec, check_layout
from .graphs import (
    SimpleGraph,
    find_transitive_orientation,
    is_interval_graph,
    iter_bits,
    max_weight_clique,
    max_weight_stable_set,
)

DIMS = 2


class EdgeState(enum.Enum):
    IN = "1"
    OUT = "0"
    FREE = "?"


IN = EdgeState.IN
OUT = EdgeState.OUT
FREE = EdgeState.FREE


class Fix(NamedTuple):
    dim: int
    u: int
    v: int
    state: EdgeState


@dataclass(frozen=True)
class Conflict:
    reason: str


class Conditions(NamedTuple):
    c1: bool
    c2: bool
    c3: bool

    @property
    def ok(self) -> bool:
        return self.c1 and self.c2 and self.c3


class PackingClassState:
    """Per-dimension In/Out bitsets over ``n`` boxes.

    ``inn[d][u]`` and ``out[d][u]`` are bitsets of the partners ``v`` whose pair
    with ``u`` is fixed In/Out in dimension ``d``; anything in neither is Free.
    """

    __slots__ = ("ids", "extents", "caps", "inn", "out", "n", "_full")

    def __init__(self, ids: Sequence[str], extents: Sequence[Sequence[int]], caps: Sequence[int]):
        self.ids = tuple(ids)
        self.n = len(self.ids)
        self.extents = tuple(tuple(e) for e in extents)
        self.caps = tuple(caps)
        if len(self.extents) != DIMS or len(self.caps) != DIMS:
            raise ValueError("two dimensions expected")
        if any(len(e) != self.n for e in self.extents):
            raise ValueError("one extent per box and dimension required")
        self.inn = [[0] * self.n for _ in range(DIMS)]
        self.out = [[0] * self.n for _ in range(DIMS)]
        self._full = (1 << self.n) - 1

    @classmethod
    def for_modules(cls, modules: Sequence[ModuleSpec], container: Container) -> "PackingClassState":
        return cls(
            [m.id for m in modules],
            [[m.width for m in modules], [m.height for m in modules]],
            [container.width, container.height],
        )

    def copy(self) -> "PackingClassState":
        new = PackingClassState.__new__(PackingClassState)
        new.ids, new.n, new.extents, new.caps, new._full = self.ids, self.n, self.extents, self.caps, self._full
        new.inn = [row[:] for row in self.inn]
        new.out = [row[:] for row in self.out]
        return new

    def get(self, dim: int, u: int, v: int) -> EdgeState:
        if self.inn[dim][u] >> v & 1:
            return IN
        if self.out[dim][u] >> v & 1:
            return OUT
        return FREE

    def free_mask(self, dim: int, u: int) -> int:
        return self._full & ~(self.inn[dim][u] | self.out[dim][u] | (1 << u))

    def set(self, dim: int, u: int, v: int, state: EdgeState) -> None:
        """Unchecked assignment; used to build states directly."""
        if u == v:
            raise ValueError("diagonal is unused")
        bu, bv = 1 << u, 1 << v
        for rows in (self.inn[dim], self.out[dim]):
            rows[u] &= ~bv
            rows[v] &= ~bu
        if state is IN:
            self.inn[dim][u] |= bv
            self.inn[dim][v] |= bu
        elif state is OUT:
            self.out[dim][u] |= bv
            self.out[dim][v] |= bu

    def is_complete(self) -> bool:
        return all(self.free_mask(d, u) == 0 for d in range(DIMS) for u in range(self.n))

    def free_count(self) -> int:
        return sum(bin(self.free_mask(d, u)).count("1") for d in range(DIMS) for u in range(self.n)) // 2

    def in_graph(self, dim: int) -> SimpleGraph:
        return SimpleGraph.from_rows(self.inn[dim])

    def out_graph(self, dim: int) -> SimpleGraph:
        return SimpleGraph.from_rows(self.out[dim])

    def dump(self) -> str:
        """Adjacency matrix per dimension: ``1`` In, ``0`` Out, ``?`` Free, ``-`` diagonal."""
        lines = []
        for d in range(DIMS):
            lines.append(f"dim {d} cap {self.caps[d]} extents {' '.join(map(str, self.extents[d]))}")
            for u in range(self.n):
                lines.append("".join("-" if u == v else self.get(d, u, v).value for v in range(self.n)))
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        return (
            isinstance(other, PackingClassState)
            and self.extents == other.extents
            and self.caps == other.caps
            and self.inn == other.inn
            and self.out == other.out
        )

    def __repr__(self):
        return f"PackingClassState(n={self.n}, free={self.free_count()})"


def from_layout(layout: Layout) -> PackingClassState:
    """Component graphs of a valid layout: In iff the projected intervals intersect."""
    check_layout(layout)
    placed = layout.placed()
    state = PackingClassState.for_modules([m for m, _ in placed], layout.container)
    for u in range(state.n):
        mu, pu = placed[u]
        lo_u = (pu.x, pu.y)
        for v in range(u + 1, state.n):
            mv, pv = placed[v]
            lo_v = (pv.x, pv.y)
            for d in range(DIMS):
                a0, a1 = lo_u[d], lo_u[d] + mu.extent(d)
                b0, b1 = lo_v[d], lo_v[d] + mv.extent(d)
                state.set(d, u, v, IN if max(a0, b0) < min(a1, b1) else OUT)
    return state


def check_conditions(state: PackingClassState) -> Conditions:
    if not state.is_complete():
        raise ValueError("check_conditions needs a complete state (no Free pairs)")
    c1 = all(is_interval_graph(state.in_graph(d)) for d in range(DIMS))
    c2 = all(
        max_weight_stable_set(state.in_graph(d), state.extents[d])[0] <= state.caps[d]
        and all(e <= state.caps[d] for e in state.extents[d])
        for d in range(DIMS)
    )
    c3 = all(state.inn[0][u] & state.inn[1][u] == 0 for u in range(state.n))
    return Conditions(c1, c2, c3)


def _weight(mask: int, ext: Sequence[int]) -> int:
    return sum(ext[v] for v in iter_bits(mask))


class _Propagator:
    """Fixpoint of the pruning rules after one or more assignments."""

    def __init__(self, state: PackingClassState, orientations: bool = True):
        self.s = state
        self.orientations = orientations
        self.queue: list[Fix] = []
        self.forced: list[Fix] = []
        self.conflict: Conflict | None = None

    def assign(self, dim: int, u: int, v: int, val: EdgeState, forced: bool = True) -> bool:
        s = self.s
        bv = 1 << v
        if s.inn[dim][u] & bv:
            if val is IN:
                return True
            self.conflict = Conflict(f"dim {dim} pair ({u},{v}) is In, Out demanded")
            return False
        if s.out[dim][u] & bv:
            if val is OUT:
                return True
            self.conflict = Conflict(f"dim {dim} pair ({u},{v}) is Out, In demanded")
            return False
        rows = s.inn[dim] if val is IN else s.out[dim]
        rows[u] |= bv
        rows[v] |= 1 << u
        fix = Fix(dim, u, v, val)
        self.queue.append(fix)
        if forced:
            self.forced.append(fix)
        return True

    def run(self) -> bool:
        dirty = [True] * DIMS
        while True:
            while self.queue:
                dim, u, v, val = self.queue.pop()
                dirty[dim] = True
                if val is IN:
                    ok = self.assign(1 - dim, u, v, OUT) and self._c4_as_cycle_edge(dim, u, v)
                else:
                    ok = self._c4_as_chord(dim, u, v) and self._stable_sets(dim, u, v)
                if not ok:
                    return False
            if not self.orientations or not any(dirty):
                return True
            for dim in range(DIMS):
                if not dirty[dim]:
                    continue
                dirty[dim] = False
                needed = orientation_requirements(self.s, dim)
                if needed == -1:
                    self.conflict = Conflict(f"dim {dim}: Out-pairs cannot be oriented transitively")
                    return False
                for x, y in needed:
                    if not self.assign(dim, x, y, OUT):
                        return False

    def _flip(self, dim: int, a: int, b: int, want: EdgeState) -> bool:
        # the one undecided pair of a forbidden configuration takes the other state
        return self.assign(dim, a, b, OUT if want is IN else IN)

    def _c4_as_cycle_edge(self, dim: int, u: int, v: int) -> bool:
        # cycle u-v-c-d-u of In-pairs with chords uc, vd Out is forbidden
        s = self.s
        inn, out = s.inn[dim], s.out[dim]
        fu, fv = s.free_mask(dim, u), s.free_mask(dim, v)
        skip = (1 << u) | (1 << v)
        for c in iter_bits((inn[v] | fv) & (out[u] | fu) & ~skip):
            fc = s.free_mask(dim, c)
            bc = 1 << c
            open_c = bool(fv & bc) + bool(fu & bc)
            if open_c > 1:
                continue
            if open_c == 1:
                for d in iter_bits(inn[c] & inn[u] & out[v] & ~skip & ~bc):
                    ok = self._flip(dim, v, c, IN) if fv & bc else self._flip(dim, u, c, OUT)
                    if not ok:
                        return False
                continue
            ic, iu, ov = inn[c] & ~skip & ~bc, inn[u] & ~skip & ~bc, out[v] & ~skip & ~bc
            if ic & iu & ov:
                self.conflict = Conflict(f"dim {dim}: induced C4 among In-edges")
                return False
            for d in iter_bits(fc & iu & ov):
                if not self._flip(dim, c, d, IN):
                    return False
            for d in iter_bits(ic & fu & ov):
                if not self._flip(dim, d, u, IN):
                    return False
            for d in iter_bits(ic & iu & fv):
                if not self._flip(dim, v, d, OUT):
                    return False
        return True

    def _c4_as_chord(self, dim: int, u: int, v: int) -> bool:
        # cycle u-b-v-d-u of In-pairs with chords uv (just fixed Out) and bd Out
        s = self.s
        inn, out = s.inn[dim], s.out[dim]
        fu, fv = s.free_mask(dim, u), s.free_mask(dim, v)
        cand = (inn[u] | fu) & (inn[v] | fv) & ~((1 << u) | (1 << v))
        for b in iter_bits(cand):
            bb = 1 << b
            later = cand >> (b + 1) << (b + 1)
            open_b = bool(fu & bb) + bool(fv & bb)
            if open_b > 1:
                continue
            if open_b == 1:
                for d in iter_bits(later & inn[u] & inn[v] & out[b]):
                    ok = self._flip(dim, u, b, IN) if fu & bb else self._flip(dim, v, b, IN)
                    if not ok:
                        return False
                continue
            fb = s.free_mask(dim, b)
            iu, iv, ob = inn[u] & later, inn[v] & later, out[b] & later
            if iu & iv & ob:
                self.conflict = Conflict(f"dim {dim}: induced C4 among In-edges")
                return False
            for d in iter_bits(fu & iv & ob):
                if not self._flip(dim, u, d, IN):
                    return False
            for d in iter_bits(iu & fv & ob):
                if not self._flip(dim, v, d, IN):
                    return False
            for d in iter_bits(iu & iv & fb):
                if not self._flip(dim, b, d, OUT):
                    return False
        return True

    def _stable_sets(self, dim: int, u: int, v: int) -> bool:
        # Sets pairwise Out in `dim` (a clique of the Out-graph) must fit the
        # container; with exactly one Free pair left, that pair is forced In.
        s = self.s
        cap, ext, out = s.caps[dim], s.extents[dim], s.out[dim]
        base = ext[u] + ext[v]
        common = out[u] & out[v]

        def exceeds(total: int, cand: int) -> bool:
            if total + _weight(cand, ext) <= cap:
                return False
            return total + max_weight_clique(out, ext, cand)[0] > cap

        if exceeds(base, common):
            self.conflict = Conflict(f"dim {dim}: pairwise-Out set wider than {cap}")
            return False
        for x, y in ((u, v), (v, u)):
            for b in iter_bits(s.free_mask(dim, x) & out[y]):
                if exceeds(base + ext[b], common & out[b]):
                    if not self.assign(dim, x, b, IN):
                        return False
        for a in iter_bits(common):
            for b in iter_bits(common & s.free_mask(dim, a) >> (a + 1) << (a + 1)):
                if exceeds(base + ext[a] + ext[b], common & out[a] & out[b]):
                    if not self.assign(dim, a, b, IN):
                        return False
        return True


def propagate(state: PackingClassState, just_fixed: Fix, orientations: bool = True) -> list[Fix] | Conflict:
    """Apply ``just_fixed`` to ``state`` in place and close under the pruning rules.

    Rules: a pair In in one dimension is Out in the other; an induced C4 of
    In-pairs missing one decision gets the chord or cycle pair flipped; a
    pairwise-Out set wider than the container with one Free pair left forces
    that pair In.  With ``orientations`` the Out-pairs of each dimension must
    also stay transitively orientable (see :func:`orientation_requirements`).

    Returns the extra fixes that were forced, or a :class:`Conflict` when some
    rule demands the opposite of an already fixed pair.  On conflict the state
    is left partially updated and should be discarded.
    """
    dim, u, v, val = just_fixed
    if val is FREE or u == v:
        raise ValueError("fix must be In or Out on an off-diagonal pair")
    p = _Propagator(state, orientations)
    if not p.assign(dim, u, v, val, forced=False) or not p.run():
        return p.conflict
    return p.forced


def implication_classes(state: PackingClassState, dim: int) -> list[list[int]]:
    """Forcing classes of the Out-pairs of ``dim``, as per-class successor bitsets.

    Arc ``x -> y`` forces ``x -> y2`` when ``x y2`` is Out and ``y y2`` is In
    (and symmetrically at the head).  Only fixed pairs take part, so every
    forcing found here persists in any completion of the state.
    """
    n, out, inn = state.n, state.out[dim], state.inn[dim]
    done = [0] * n
    classes = []
    for a in range(n):
        rest = out[a] & ~done[a]
        while rest:
            b = (rest & -rest).bit_length() - 1
            succ = [0] * n
            pending = {a: 1 << b}
            while pending:
                x, new = pending.popitem()
                new &= ~succ[x]
                if not new:
                    continue
                succ[x] |= new
                done[x] |= new
                reach = 0
                for y in iter_bits(new):
                    reach |= inn[y]
                    for x2 in iter_bits(out[y] & inn[x]):
                        if not succ[x2] >> y & 1:
                            pending[x2] = pending.get(x2, 0) | (1 << y)
                more = out[x] & reach & ~succ[x]
                if more:
                    pending[x] = pending.get(x, 0) | more
            classes.append(succ)
            rest = out[a] & ~done[a]
    return classes


def orientation_requirements(state: PackingClassState, dim: int) -> int | list[tuple[int, int]]:
    """Pairs that must be Out because a forcing class chains through them.

    A transitive orientation contains each forcing class or its reverse, hence
    also the transitive closure of that class; every closure pair must then be
    an Out-pair.  Returns ``-1`` when a class closes a directed cycle or its
    closure hits a pair fixed In, else the Free pairs to fix Out.
    """
    n, inn, out = state.n, state.inn[dim], state.out[dim]
    needed = []
    for succ in implication_classes(state, dim):
        tails = 0
        heads = 0
        for x in range(n):
            if succ[x]:
                tails |= 1 << x
                heads |= succ[x]
        if not tails & heads:
            # no two-arc path: the class is its own closure
            continue
        closure = succ[:]
        for k in range(n):
            bit = 1 << k
            ck = closure[k]
            if not ck:
                continue
            for x in range(n):
                if closure[x] & bit:
                    closure[x] |= ck
        for x in range(n):
            cx = closure[x]
            if cx >> x & 1 or cx & inn[x]:
                return -1
            extra = cx & ~out[x]
            for y in iter_bits(extra):
                needed.append((x, y))
    return needed


def orientation_conflict(state: PackingClassState, dim: int) -> bool:
    """True when no completion of ``dim`` can have a transitively orientable Out-graph."""
    return orientation_requirements(state, dim) == -1


def initial_fixes(state: PackingClassState) -> list[Fix] | Conflict:
    """Pairs too long to sit side by side along an axis must overlap there."""
    forced = []
    for d in range(DIMS):
        ext, cap = state.extents[d], state.caps[d]
        for u in range(state.n):
            for v in range(u + 1, state.n):
                if ext[u] + ext[v] > cap and state.get(d, u, v) is not IN:
                    result = propagate(state, Fix(d, u, v, IN))
                    if isinstance(result, Conflict):
                        return result
                    forced.append(Fix(d, u, v, IN))
                    forced.extend(result)
    return forced


def coordinates(state: PackingClassState, dim: int) -> list[int] | None:
    """Coordinates along ``dim`` from a transitive orientation of the Out-graph.

    Each box sits right after the longest weighted chain of boxes oriented
    before it.  ``None`` when the Out-graph is not a comparability graph.
    """
    order = find_transitive_orientation(state.out_graph(dim))
    if order is None:
        return None
    pred = order.predecessors()
    ext = state.extents[dim]
    coord = [0] * state.n
    for v in order.topological_order():
        coord[v] = max((coord[u] + ext[u] for u in iter_bits(pred[v])), default=0)
    return coord


def extract_layout(state: PackingClassState, modules: Sequence[ModuleSpec], container: Container) -> Layout:
    """Concrete placement realising a packing class."""
    conditions = check_conditions(state)
    if not conditions.ok:
        raise ValueError(f"state is not a packing class: {conditions}")
    if [m.id for m in modules] != list(state.ids):
        raise ValueError("modules must be given in state order")
    xs = coordinates(state, 0)
    ys = coordinates(state, 1)
    layout = Layout.build(container, zip(modules, xs, ys))
    try:
        return check_layout(layout)
    except LayoutError as exc:  # pragma: no cover - would mean the construction is wrong
        raise AssertionError(f"extracted layout invalid: {exc}") from exc
