"""Orthogonal packing decision: do the modules fit into a ``W x H`` container?

Depth-first branch and bound over the Free pairs of a packing-class state.
Each branch fixes one pair In or Out in one dimension and propagates; complete
states are verified against the packing-class conditions and turned into
coordinates.
"""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .geometry import Container, Layout, ModuleSpec
from .graphs import iter_bits
from .packing_class import (
    DIMS,
    IN,
    OUT,
    Conflict,
    Fix,
    PackingClassState,
    check_conditions,
    extract_layout,
    from_layout,
    initial_fixes,
    propagate,
)

log = logging.getLogger(__name__)


class Verdict(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


@dataclass
class SearchStats:
    nodes: int = 0
    conflicts: int = 0
    propagated: int = 0
    max_depth: int = 0
    elapsed: float = 0.0

    def as_dict(self, timing: bool = False) -> dict:
        d = {"nodes": self.nodes, "conflicts": self.conflicts, "propagated": self.propagated, "max_depth": self.max_depth}
        if timing:
            d["elapsed"] = self.elapsed
        return d


@dataclass
class OppResult:
    verdict: Verdict
    layout: Layout | None = None
    packing_class: PackingClassState | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


class _Budget:
    def __init__(self, node_limit, time_limit, stats: SearchStats):
        self.node_limit = node_limit
        self.deadline = None if time_limit is None else time.perf_counter() + time_limit
        self.stats = stats

    def exhausted(self) -> bool:
        if self.node_limit is not None and self.stats.nodes > self.node_limit:
            return True
        # clock reads are comparatively slow; sample them
        if self.deadline is not None and self.stats.nodes % 64 == 0:
            return time.perf_counter() > self.deadline
        return False


def _branch_pair(state: PackingClassState) -> Fix | None:
    """Free pair with the largest combined extent; ties to the lower dimension and indices."""
    best, best_key = None, None
    for d in range(DIMS):
        ext = state.extents[d]
        for u in range(state.n):
            free = state.free_mask(d, u) >> (u + 1)
            v = u + 1
            while free:
                if free & 1:
                    key = ext[u] + ext[v]
                    if best_key is None or key > best_key:
                        best, best_key = (d, u, v), key
                free >>= 1
                v += 1
    if best is None:
        return None
    return Fix(best[0], best[1], best[2], IN)


def _free_pairs(state: PackingClassState) -> list[tuple[int, int, int]]:
    """All Free pairs ``(dim, u, v)``, widest combined extent first."""
    out = []
    for d in range(DIMS):
        ext = state.extents[d]
        for u in range(state.n):
            free = state.free_mask(d, u) >> (u + 1)
            v = u + 1
            while free:
                if free & 1:
                    out.append((-(ext[u] + ext[v]), d, u, v))
                free >>= 1
                v += 1
    out.sort()
    return [(d, u, v) for _, d, u, v in out]


def _probe(state: PackingClassState, width: int, stats: SearchStats):
    """Try both values on the ``width`` widest Free pairs.

    A pair with one failing value has the other forced and probing restarts
    on the stronger state.  Returns ``None`` when both values of some pair
    fail, else the state and the two children of the pair whose values
    propagate furthest (``(state, None, None)`` once no Free pair is left).
    """
    while True:
        best = None
        for d, u, v in _free_pairs(state)[:width]:
            kids = []
            for val in (IN, OUT):
                child = state.copy()
                result = propagate(child, Fix(d, u, v, val))
                if isinstance(result, Conflict):
                    stats.conflicts += 1
                    kids.append(None)
                else:
                    kids.append((child, len(result)))
            if kids[0] is None and kids[1] is None:
                return None
            if kids[0] is None or kids[1] is None:
                state, n = kids[0] or kids[1]
                stats.propagated += n
                break
            score = (kids[0][1] + 1) * (kids[1][1] + 1)
            if best is None or score > best[0]:
                best = (score, kids[0][0], kids[1][0])
        else:
            if best is None:
                return state, None, None
            return state, best[1], best[2]


def precheck(modules: Sequence[ModuleSpec], container: Container) -> str | None:
    """Reason the instance is trivially infeasible, else ``None``."""
    for m in modules:
        if m.width > container.width or m.height > container.height:
            return f"module {m.id} ({m.width}x{m.height}) exceeds container {container.width}x{container.height}"
    if sum(m.area for m in modules) > container.area:
        return "total module area exceeds container area"
    return None


def _dff_family(cap: int) -> list[Callable[[int], Fraction]]:
    """Dual feasible functions on ``0..cap``, scaled so that ``cap`` maps to 1.

    The identity, the threshold family (large items round up to 1, small ones
    drop to 0) and the staircase family ``u^(k)``.  Any feasible packing keeps
    the transformed area at most 1 under every pair of them.
    """
    fs: list[Callable[[int], Fraction]] = [lambda a: Fraction(a, cap)]
    for k in range(1, cap // 2 + 1):
        fs.append(lambda a, k=k: Fraction(1) if a > cap - k else (Fraction(0) if a < k else Fraction(a, cap)))
    for k in range(1, cap + 1):
        fs.append(lambda a, k=k: Fraction(a, cap) if (k + 1) * a % cap == 0 else Fraction((k + 1) * a // cap, k))
    return fs


def dff_refutes(modules: Sequence[ModuleSpec], container: Container) -> bool:
    """True when some pair of dual feasible functions proves the modules cannot fit."""
    if not modules:
        return False
    xs = {tuple(f(m.width) for m in modules) for f in _dff_family(container.width)}
    ys = {tuple(g(m.height) for m in modules) for g in _dff_family(container.height)}
    return any(sum(a * b for a, b in zip(fx, gy)) > 1 for fx in xs for gy in ys)


def _bars_fit(items: Sequence[tuple[int, int]], length: int, cap: int, step_limit: int) -> bool | None:
    """Can each ``(span, load)`` item get a start so that no cell's load exceeds ``cap``?

    Cells ``0..length-1`` are closed left to right; at each cell some of the
    remaining items start there.  The unused capacity of closed cells may not
    exceed the total slack.  Returns ``None`` when ``step_limit`` runs out.
    """
    slack = length * cap - sum(a * b for a, b in items)
    if slack < 0:
        return False
    items = sorted(items, key=lambda t: (-t[1], -t[0]))
    n = len(items)
    dead: set[tuple[int, int, tuple[int, ...]]] = set()
    steps = 0

    class _OutOfSteps(Exception):
        pass

    def close(cell: int, rem: int, profile: tuple[int, ...], waste: int) -> bool:
        if not rem:
            return True
        if cell >= length or (cell, rem, profile) in dead:
            return False
        cand = [i for i in range(n) if rem >> i & 1 and cell + items[i][0] <= length]

        def choose(k: int, chosen: int, prof: list[int]) -> bool:
            nonlocal steps
            steps += 1
            if steps > step_limit:
                raise _OutOfSteps
            if k == len(cand):
                lost = waste + cap - prof[0]
                return lost <= slack and close(cell + 1, rem & ~chosen, tuple(prof[1:]) or (0,), lost)
            i = cand[k]
            span, load = items[i]
            if all(prof[j] + load <= cap for j in range(min(span, len(prof)))):
                grown = prof + [0] * (span - len(prof))
                for j in range(span):
                    grown[j] += load
                if choose(k + 1, chosen | 1 << i, grown):
                    return True
            # skipping an item skips its identical successors too
            nxt = k + 1
            while nxt < len(cand) and items[cand[nxt]] == items[i]:
                nxt += 1
            return choose(nxt, chosen, prof)

        if choose(0, 0, list(profile)):
            return True
        dead.add((cell, rem, profile))
        return False

    try:
        return close(0, (1 << n) - 1, (0,), 0)
    except _OutOfSteps:
        return None


def bars_refute(modules: Sequence[ModuleSpec], container: Container, step_limit: int = 200_000) -> bool:
    """True when the one-dimensional column (or row) relaxation has no solution.

    Modules crossing one column are stacked, so their heights fit in ``H``;
    giving every module a start column with that property is necessary for a
    packing, and likewise for rows.
    """
    cols = _bars_fit([(m.width, m.height) for m in modules], container.width, container.height, step_limit)
    if cols is False:
        return True
    return _bars_fit([(m.height, m.width) for m in modules], container.height, container.width, step_limit) is False


def bottom_left_fill(modules: Sequence[ModuleSpec], container: Container, column_first: bool = False) -> Layout | None:
    """Place modules in the given order at the lowest (or leftmost) free spot."""
    W, H = container.width, container.height
    occ = 0
    items = []
    for m in modules:
        if m.width > W or m.height > H:
            return None
        row = (1 << m.width) - 1
        shape = 0
        for r in range(m.height):
            shape |= row << (r * W)
        if column_first:
            spots = ((x, y) for x in range(W - m.width + 1) for y in range(H - m.height + 1))
        else:
            spots = ((x, y) for y in range(H - m.height + 1) for x in range(W - m.width + 1))
        for x, y in spots:
            mask = shape << (y * W + x)
            if not mask & occ:
                occ |= mask
                items.append((m, x, y))
                break
        else:
            return None
    return Layout.build(container, items)


_ORDERS = (
    lambda m: (-m.height, -m.width, m.id),
    lambda m: (-m.width, -m.height, m.id),
    lambda m: (-m.area, -m.height, m.id),
    lambda m: (-(m.width + m.height), m.id),
)


def corner_fill(modules: Sequence[ModuleSpec], container: Container, column_first: bool = False, step_limit: int = 5000) -> Layout | None:
    """Backtracking fill of the first empty cell, for near-perfect packings.

    The first empty cell in scan order (rows bottom-up, or columns
    left-to-right with ``column_first``) either becomes the lower-left corner
    of an unused module or is given up as waste, as long as the waste stays
    within the container's slack.  ``None`` when nothing is found within
    ``step_limit`` steps.
    """
    if column_first:
        flipped = [ModuleSpec(m.id, m.height, m.width, m.usage_count) for m in modules]
        layout = corner_fill(flipped, Container(container.height, container.width), False, step_limit)
        if layout is None:
            return None
        by_id = {m.id: m for m in modules}
        return Layout.build(container, ((by_id[p.module_id], p.y, p.x) for p in layout.placements))
    W, H = container.width, container.height
    mods = sorted(modules, key=lambda m: (-m.height, -m.width, m.id))
    slack = container.area - sum(m.area for m in mods)
    if slack < 0 or any(m.width > W or m.height > H for m in mods):
        return None
    full = (1 << (W * H)) - 1
    shapes = []
    for m in mods:
        row = (1 << m.width) - 1
        shapes.append(sum(row << (r * W) for r in range(m.height)))
    spots: list[tuple[int, int] | None] = [None] * len(mods)
    dead: set[tuple[int, int]] = set()
    steps = 0

    def fill(occ: int, rem: int, waste: int) -> bool | None:
        nonlocal steps
        if not rem:
            return True
        steps += 1
        if steps > step_limit:
            return None
        if (occ, rem) in dead:
            return False
        free = ~occ & full
        cell = (free & -free).bit_length() - 1
        x, y = cell % W, cell // W
        tried = set()
        for i in iter_bits(rem):
            m = mods[i]
            if (m.width, m.height) in tried or x + m.width > W or y + m.height > H:
                continue
            tried.add((m.width, m.height))
            shape = shapes[i] << cell
            if shape & occ:
                continue
            spots[i] = (x, y)
            found = fill(occ | shape, rem & ~(1 << i), waste)
            if found is not False:
                return found
        if waste < slack:
            found = fill(occ | 1 << cell, rem, waste + 1)
            if found is not False:
                return found
        dead.add((occ, rem))
        return False

    if not fill(0, (1 << len(mods)) - 1, 0):
        return None
    return Layout.build(container, ((m, *spots[i]) for i, m in enumerate(mods)))


def heuristic_packing(modules: Sequence[ModuleSpec], container: Container) -> Layout | None:
    """First layout found by bottom-left fill over a few fixed orderings."""
    for key in _ORDERS:
        ordered = sorted(modules, key=key)
        for column_first in (False, True):
            layout = bottom_left_fill(ordered, container, column_first)
            if layout is not None:
                return layout
    return None


def solve_opp(
    modules: Sequence[ModuleSpec],
    container: Container,
    node_limit: int | None = None,
    time_limit: float | None = None,
    heuristics: bool = True,
    lower_bounds: bool = True,
    probe_depth: int = 4,
    probe_width: int = 30,
) -> OppResult:
    """Decide whether ``modules`` fit into ``container`` without rotation.

    Stages: trivial bounds, dual feasible function bounds, bottom-left fill,
    the column/row relaxation, corner fill, then the tree search.
    ``lower_bounds`` switches the two relaxations, ``heuristics`` the two
    fills.
    Nodes up to ``probe_depth`` pick their branching pair by trying both
    values on the ``probe_width`` widest Free pairs; deeper nodes branch on
    the widest pair directly.

    Returns a FEASIBLE result carrying a layout and its packing class, an
    INFEASIBLE result once the search tree is exhausted, or UNKNOWN when the
    node or time budget runs out first.
    """
    modules = list(modules)
    stats = SearchStats()
    started = time.perf_counter()

    def finish(result: OppResult) -> OppResult:
        stats.elapsed = time.perf_counter() - started
        log.debug("opp %dx%d n=%d -> %s %s", container.width, container.height, len(modules), result.verdict.value, stats)
        return result

    def packed(layout: Layout) -> OppResult:
        # placements in input order, like the layouts the search extracts
        ordered = Layout(container, tuple(layout.placement_of(m.id) for m in modules), layout.modules)
        return OppResult(Verdict.FEASIBLE, ordered, from_layout(ordered), stats)

    if len({m.id for m in modules}) != len(modules):
        raise ValueError("module ids must be unique")
    stats.nodes = 1
    reason = precheck(modules, container)
    if reason is not None:
        log.debug("precheck: %s", reason)
        return finish(OppResult(Verdict.INFEASIBLE, stats=stats))
    if lower_bounds and dff_refutes(modules, container):
        log.debug("dual feasible function bound refutes %dx%d", container.width, container.height)
        return finish(OppResult(Verdict.INFEASIBLE, stats=stats))

    if heuristics:
        layout = heuristic_packing(modules, container)
        if layout is not None:
            return finish(packed(layout))
    if lower_bounds and bars_refute(modules, container):
        log.debug("column/row relaxation refutes %dx%d", container.width, container.height)
        return finish(OppResult(Verdict.INFEASIBLE, stats=stats))
    if heuristics:
        for column_first in (True, False):
            layout = corner_fill(modules, container, column_first)
            if layout is not None:
                return finish(packed(layout))

    root = PackingClassState.for_modules(modules, container)
    fixed = initial_fixes(root)
    if isinstance(fixed, Conflict):
        stats.conflicts += 1
        return finish(OppResult(Verdict.INFEASIBLE, stats=stats))
    stats.propagated += len(fixed)

    budget = _Budget(node_limit, time_limit, stats)
    stats.nodes = 0
    stack: list[tuple[PackingClassState, int]] = [(root, 0)]
    while stack:
        state, depth = stack.pop()
        stats.nodes += 1
        stats.max_depth = max(stats.max_depth, depth)
        if budget.exhausted():
            return finish(OppResult(Verdict.UNKNOWN, stats=stats))
        if depth <= probe_depth and probe_width > 0:
            probed = _probe(state, probe_width, stats)
            if probed is None:
                continue
            state, first, second = probed
            if first is not None:
                stack.append((second, depth + 1))
                stack.append((first, depth + 1))
                continue
        branch = _branch_pair(state)
        if branch is None:
            if check_conditions(state).ok:
                layout = extract_layout(state, modules, container)
                return finish(OppResult(Verdict.FEASIBLE, layout, state, stats))
            stats.conflicts += 1
            continue
        d, u, v, _ = branch
        children = []
        for val in (IN, OUT):
            child = state.copy()
            result = propagate(child, Fix(d, u, v, val))
            if isinstance(result, Conflict):
                stats.conflicts += 1
                continue
            stats.propagated += len(result)
            children.append((child, depth + 1))
        stack.extend(reversed(children))
    return finish(OppResult(Verdict.INFEASIBLE, stats=stats))


def brute_force_opp(modules: Sequence[ModuleSpec], container: Container, cap: int = 10**9) -> Layout | None:
    """Exhaustive placement enumeration; a layout if one exists, else ``None``.

    Only meant for tiny instances used as ground truth in tests.  The first
    module is restricted to the lower-left quarter of its position range
    (mirroring a packing keeps it feasible) and dead ``(index, occupancy)``
    states are memoised.
    """
    modules = sorted(modules, key=lambda m: (-m.area, m.id))
    W, H = container.width, container.height
    space = 1
    for m in modules:
        space *= max(0, W - m.width + 1) * max(0, H - m.height + 1)
    if space > cap:
        raise ValueError(f"search space {space} exceeds cap {cap}")
    if not modules:
        return Layout(container)
    options = []
    for k, m in enumerate(modules):
        xs = range(W - m.width + 1)
        ys = range(H - m.height + 1)
        if k == 0:
            xs = range((W - m.width) // 2 + 1)
            ys = range((H - m.height) // 2 + 1)
        row = (1 << m.width) - 1
        opts = []
        for y in ys:
            for x in xs:
                mask = 0
                for r in range(y, y + m.height):
                    mask |= row << (r * W + x)
                opts.append((mask, x, y))
        options.append(opts)

    dead: set[tuple[int, int]] = set()
    chosen: list[tuple[int, int]] = []

    def place(k: int, occ: int) -> bool:
        if k == len(modules):
            return True
        if (k, occ) in dead:
            return False
        for mask, x, y in options[k]:
            if mask & occ == 0:
                chosen.append((x, y))
                if place(k + 1, occ | mask):
                    return True
                chosen.pop()
        dead.add((k, occ))
        return False

    if not place(0, 0):
        return None
    return Layout.build(container, ((m, x, y) for m, (x, y) in zip(modules, chosen)))
