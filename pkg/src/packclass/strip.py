"""Strip packing by bisection over the width, and layout defragmentation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .bounds import compute_bounds
from .geometry import Container, Layout, MetricsReport, ModuleSpec, check_layout, metrics
from .opp import OppResult, SearchStats, Verdict, solve_opp

log = logging.getLogger(__name__)

DEFAULT_NODE_LIMIT = 10**7
DEFAULT_TIME_LIMIT = 60.0


class SearchBudgetExceeded(RuntimeError):
    """An OPP probe ran out of budget; carries the bracket known so far."""

    def __init__(self, width: int, lower: int, upper: int):
        super().__init__(f"probe at width {width} undecided; optimum in [{lower}, {upper}]")
        self.width = width
        self.lower = lower
        self.upper = upper


@dataclass
class Probe:
    width: int
    verdict: Verdict
    stats: SearchStats


@dataclass
class StripResult:
    optimal_width: int
    layout: Layout
    lower_bound: int
    upper_bound: int
    probes: list[Probe] = field(default_factory=list)


def min_strip_width(
    modules: Sequence[ModuleSpec],
    H: int,
    node_limit: int | None = DEFAULT_NODE_LIMIT,
    time_limit: float | None = DEFAULT_TIME_LIMIT,
    witness: Layout | None = None,
) -> StripResult:
    """Smallest width ``W`` such that ``modules`` fit into ``W x H``.

    Bisects between the area bound and the shelf bound, keeping a feasible
    layout for the current upper end at all times.  ``witness`` may supply an
    extra feasible layout (e.g. the one being defragmented) to tighten the
    upper end.
    """
    modules = list(modules)
    for m in modules:
        if m.height > H:
            raise ValueError(f"module {m.id} of height {m.height} exceeds strip height {H}")
    bounds = compute_bounds(modules, H)
    lb, ub = bounds.lower, bounds.upper
    best = bounds.upper_layout
    if witness is not None:
        check_layout(witness)
        if witness.container.height != H or sorted(m.id for m in witness.placed_modules()) != sorted(m.id for m in modules):
            raise ValueError("witness must place exactly the given modules in height H")
        if witness.used_width() < ub:
            ub, best = witness.used_width(), witness
    lb = min(lb, ub)
    initial = (lb, ub)
    probes = []
    while lb < ub:
        w = (lb + ub) // 2
        res: OppResult = solve_opp(modules, Container(w, H), node_limit, time_limit)
        probes.append(Probe(w, res.verdict, res.stats))
        log.info("probe width %d: %s (%d nodes)", w, res.verdict.value, res.stats.nodes)
        if res.verdict is Verdict.FEASIBLE:
            ub, best = w, res.layout
        elif res.verdict is Verdict.INFEASIBLE:
            lb = w + 1
        else:
            raise SearchBudgetExceeded(w, lb, ub)
    if modules:
        best = Layout(Container(ub, H), best.placements, best.modules)
    return StripResult(ub, best, initial[0], initial[1], probes)


@dataclass
class DefragResult:
    layout: Layout
    before: MetricsReport
    after: MetricsReport
    strip: StripResult


def defragment(
    layout: Layout,
    node_limit: int | None = DEFAULT_NODE_LIMIT,
    time_limit: float | None = DEFAULT_TIME_LIMIT,
) -> DefragResult:
    """Repack the placed modules into the fewest leftmost columns.

    The new layout keeps the original container; columns right of the optimal
    strip width are left entirely free.
    """
    check_layout(layout)
    modules = layout.placed_modules()
    container = layout.container
    strip = min_strip_width(modules, container.height, node_limit, time_limit, witness=layout)
    packed = Layout(container, strip.layout.placements, strip.layout.modules)
    packed = _pick_variant(packed, strip.optimal_width)
    before = metrics(layout)
    if metrics(packed).max_free_rect.area < before.max_free_rect.area:
        # a tall packing can hide a wide free band the old layout had; try the flattest one
        flat = _flattest(modules, strip.optimal_width, container, node_limit, time_limit)
        if flat is not None:
            flat = _pick_variant(flat, strip.optimal_width)
            if metrics(flat).max_free_rect.area > metrics(packed).max_free_rect.area:
                packed = flat
    # keep unplaced module specs the caller had
    extra = {k: v for k, v in layout.modules.items() if k not in packed.modules}
    if extra:
        packed = Layout(container, packed.placements, {**packed.modules, **extra})
    check_layout(packed)
    return DefragResult(packed, before, metrics(packed), strip)


def _flattest(modules, width: int, container: Container, node_limit, time_limit) -> Layout | None:
    """Packing of ``modules`` into ``width`` columns using the fewest rows, or ``None``."""
    area = sum(m.area for m in modules)
    for rows in range(max(1, -(-area // width)), container.height):
        res = solve_opp(modules, Container(width, rows), node_limit, time_limit)
        if res.verdict is Verdict.FEASIBLE:
            return Layout(container, res.layout.placements, res.layout.modules)
        if res.verdict is Verdict.UNKNOWN:
            return None
    return None


def _pick_variant(layout: Layout, width: int) -> Layout:
    """Of the layout and its mirror images inside ``[0, width)``, the one with the largest free rectangle."""
    H = layout.container.height
    variants = []
    for flip_x in (False, True):
        for flip_y in (False, True):
            items = []
            for m, p in layout.placed():
                x = width - p.x - m.width if flip_x else p.x
                y = H - p.y - m.height if flip_y else p.y
                items.append((m, x, y))
            variants.append(Layout.build(layout.container, items))
    return max(variants, key=lambda v: metrics(v).max_free_rect.area)
