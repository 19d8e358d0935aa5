"""Online placement simulator with idle-time defragmentation.

Modules arrive and are placed by least interference fit (LIF); when nothing
fits, least-recently-used modules are evicted.  Defragment events repack the
device into the fewest leftmost columns and produce one report row each.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .geometry import (
    Container,
    FreeRect,
    Layout,
    ModuleSpec,
    Placement,
    check_layout,
    free_area,
    free_columns,
    max_free_rectangle,
    occupancy_grid,
)
from .jsonio import InputError, container_from_dict, layout_from_dict, layout_to_dict, module_from_dict, module_to_dict
from .strip import DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT, defragment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Arrive:
    module: ModuleSpec


@dataclass(frozen=True)
class Depart:
    module_id: str


@dataclass(frozen=True)
class RemoveLowUsage:
    threshold: int


@dataclass(frozen=True)
class Defragment:
    pass


ScenarioEvent = Union[Arrive, Depart, RemoveLowUsage, Defragment]


class ScenarioError(ValueError):
    """A malformed or inapplicable event; ``index`` is its position in the event list."""

    def __init__(self, index: int, message: str):
        super().__init__(f"event {index}: {message}")
        self.index = index


# ---------------------------------------------------------------- placement


def lif_place(layout: Layout, module: ModuleSpec) -> Placement | None:
    """Least interference fit: the free spot whose columns touch the fewest modules.

    Ties go to fewer shared columns, then smaller ``x``, then smaller ``y``.
    ``None`` when no free ``w x h`` rectangle exists.
    """
    W, H = layout.container.width, layout.container.height
    w, h = module.width, module.height
    if w > W or h > H:
        return None
    grid = occupancy_grid(layout)
    # taken[y, x]: occupied cells under the w x h window anchored at (x, y)
    sums = np.zeros((H + 1, W + 1), dtype=int)
    sums[1:, 1:] = grid.cumsum(0).cumsum(1)
    taken = sums[h:, w:] - sums[:-h, w:] - sums[h:, :-w] + sums[:-h, :-w]
    spans = [(p.x, p.x + m.width) for m, p in layout.placed()]
    best, best_key = None, None
    for x in range(W - w + 1):
        free_y = np.flatnonzero(taken[:, x] == 0)
        if not free_y.size:
            continue
        shared = [min(b, x + w) - max(a, x) for a, b in spans]
        key = (sum(1 for s in shared if s > 0), sum(s for s in shared if s > 0), x, int(free_y[0]))
        if best_key is None or key < best_key:
            best, best_key = Placement(module.id, x, int(free_y[0])), key
    return best


def lru_evict(layout: Layout, last_use: Mapping[str, int]) -> str:
    """Id of the placed module used longest ago; ties to the smallest id.

    Modules missing from ``last_use`` count as never used.
    """
    ids = [p.module_id for p in layout.placements]
    if not ids:
        raise ValueError("nothing to evict from an empty layout")
    return min(ids, key=lambda i: (last_use.get(i, -1), i))


def remove_low_usage(layout: Layout, threshold: int) -> tuple[Layout, list[str]]:
    """Drop every placed module whose usage count is below ``threshold``."""
    gone = [m.id for m in layout.placed_modules() if m.usage_count < threshold]
    return layout.without(gone), gone


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class ReportRow:
    label: str
    event_index: int | None
    module_count: int
    free_space: int
    max_rect_before: FreeRect
    free_columns_before: int
    max_rect_after: FreeRect
    free_columns_after: int

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "event_index": self.event_index,
            "modules": self.module_count,
            "free_space": self.free_space,
            "before": {"max_rect": _rect_str(self.max_rect_before), "free_columns": self.free_columns_before},
            "after": {"max_rect": _rect_str(self.max_rect_after), "free_columns": self.free_columns_after},
        }


def _rect_str(r: FreeRect) -> str:
    return f"{r.width}x{r.height}"


def report_row(label: str, event_index: int | None, before: Layout, after: Layout) -> ReportRow:
    """One table row computed from the layouts around a defragmentation."""
    return ReportRow(
        label,
        event_index,
        len(before.placements),
        free_area(before),
        max_free_rectangle(before),
        free_columns(before)[0],
        max_free_rectangle(after),
        free_columns(after)[0],
    )


@dataclass(frozen=True)
class Snapshot:
    event_index: int | None  # None for the initial layout
    layout: Layout


@dataclass
class ScenarioReport:
    rows: list[ReportRow]
    snapshots: list[Snapshot]
    defrag_pairs: list[tuple[int, Layout, Layout]] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)
    evicted: list[tuple[int, str]] = field(default_factory=list)
    widths: list[int] = field(default_factory=list)

    @property
    def final_layout(self) -> Layout:
        return self.snapshots[-1].layout

    def as_dict(self, label: str | None = None) -> dict:
        doc = {
            "rows": [r.as_dict() for r in self.rows],
            "optimal_widths": list(self.widths),
            "rejected": [{"event_index": i, "id": m} for i, m in self.rejected],
            "evicted": [{"event_index": i, "id": m} for i, m in self.evicted],
            "final_layout": layout_to_dict(self.final_layout),
        }
        if label is not None:
            doc = {"scenario": label, **doc}
        return doc


TABLE_HEADER = (
    "Scenario",
    "|I|",
    "Free space",
    "Max. rect (before)",
    "Free columns (before)",
    "Max. rect (after)",
    "Free columns (after)",
)


def format_table(rows: Sequence[ReportRow]) -> str:
    """Aligned text table in the column order scenario, |I|, free space, before, after."""
    cells = [TABLE_HEADER] + [
        (
            r.label,
            str(r.module_count),
            str(r.free_space),
            _rect_str(r.max_rect_before),
            str(r.free_columns_before),
            _rect_str(r.max_rect_after),
            str(r.free_columns_after),
        )
        for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(TABLE_HEADER))]
    lines = []
    for k, row in enumerate(cells):
        parts = [row[0].ljust(widths[0])] + [c.rjust(widths[i]) for i, c in enumerate(row) if i]
        lines.append("  ".join(parts).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- simulation


class _Device:
    """Mutable simulation state: the layout plus LRU timestamps."""

    def __init__(self, layout: Layout, evict: bool, node_limit, time_limit):
        check_layout(layout)
        self.layout = layout
        self.last_use = {p.module_id: -1 for p in layout.placements}
        self.evict = evict
        self.node_limit = node_limit
        self.time_limit = time_limit

    def placed_ids(self) -> set[str]:
        return {p.module_id for p in self.layout.placements}

    def arrive(self, index: int, module: ModuleSpec, report: ScenarioReport) -> None:
        current = self.layout.placement_of(module.id)
        if current is not None:
            old = self.layout.modules[module.id]
            if (old.width, old.height) != (module.width, module.height):
                raise ScenarioError(index, f"module {module.id!r} is placed with a different shape")
            # a request for a module that is already configured counts as a use
            used = replace(old, usage_count=old.usage_count + 1)
            placements = self.layout.placements
            self.layout = Layout(self.layout.container, placements, {**self.layout.modules, module.id: used})
            self.last_use[module.id] = index
            return
        spot = lif_place(self.layout, module)
        while spot is None and self.evict and self.layout.placements and _fits(module, self.layout.container):
            victim = lru_evict(self.layout, self.last_use)
            self.layout = self.layout.without([victim])
            self.last_use.pop(victim, None)
            report.evicted.append((index, victim))
            spot = lif_place(self.layout, module)
        if spot is None:
            report.rejected.append((index, module.id))
            log.info("event %d: module %s rejected", index, module.id)
            return
        self.layout = self.layout.with_placement(module, spot.x, spot.y)
        self.last_use[module.id] = index

    def depart(self, index: int, module_id: str) -> None:
        if self.layout.placement_of(module_id) is None:
            raise ScenarioError(index, f"depart of module {module_id!r} that is not placed")
        self.layout = self.layout.without([module_id])
        self.last_use.pop(module_id, None)

    def remove_low_usage(self, threshold: int) -> None:
        self.layout, gone = remove_low_usage(self.layout, threshold)
        for i in gone:
            self.last_use.pop(i, None)

    def defragment(self) -> tuple[Layout, int]:
        result = defragment(self.layout, self.node_limit, self.time_limit)
        self.layout = result.layout
        return result.layout, result.strip.optimal_width


def _fits(module: ModuleSpec, container: Container) -> bool:
    return module.width <= container.width and module.height <= container.height


def run_scenario(
    initial: Layout,
    events: Iterable[ScenarioEvent],
    evict: bool = True,
    node_limit: int | None = DEFAULT_NODE_LIMIT,
    time_limit: float | None = DEFAULT_TIME_LIMIT,
    label: str = "",
) -> ScenarioReport:
    """Apply ``events`` in order and report every defragmentation.

    There is one row per Defragment event.  When the last event is not a
    Defragment (including the empty event list) a closing row describes the
    final layout, with identical before and after metrics.  Timestamps for LRU
    eviction are event indices; modules of the initial layout count as used
    at time -1.
    """
    device = _Device(initial, evict, node_limit, time_limit)
    report = ScenarioReport([], [Snapshot(None, initial)])
    last_defrag = False
    for index, event in enumerate(events):
        last_defrag = False
        if isinstance(event, Arrive):
            device.arrive(index, event.module, report)
        elif isinstance(event, Depart):
            device.depart(index, event.module_id)
        elif isinstance(event, RemoveLowUsage):
            device.remove_low_usage(event.threshold)
        elif isinstance(event, Defragment):
            before = device.layout
            after, width = device.defragment()
            report.defrag_pairs.append((index, before, after))
            report.widths.append(width)
            last_defrag = True
        else:
            raise ScenarioError(index, f"unknown event {event!r}")
        report.snapshots.append(Snapshot(index, device.layout))
    report.rows = rows_from_report(report, label)
    if not last_defrag:
        final = report.final_layout
        report.rows.append(report_row(f"{label}#final" if label else "final", None, final, final))
    return report


def rows_from_report(report: ScenarioReport, label: str = "") -> list[ReportRow]:
    """Defragmentation rows recomputed from the recorded before/after layouts.

    A lone defragmentation is labelled ``label``; several get ``label#k``.
    """
    pairs = report.defrag_pairs
    rows = []
    for k, (index, before, after) in enumerate(pairs):
        name = label if len(pairs) == 1 and label else f"{label}#{k + 1}"
        rows.append(report_row(name, index, before, after))
    return rows


# ---------------------------------------------------------------- scenario files


def event_from_dict(obj, index: int) -> ScenarioEvent:
    if not isinstance(obj, dict):
        raise ScenarioError(index, "expected an object")
    kind = obj.get("type")
    try:
        if kind == "arrive":
            return Arrive(module_from_dict(obj.get("module"), f"events[{index}].module"))
        if kind == "depart":
            mid = obj.get("id")
            if not isinstance(mid, str):
                raise ScenarioError(index, "depart needs a string 'id'")
            return Depart(mid)
        if kind == "remove_low_usage":
            t = obj.get("threshold")
            if isinstance(t, bool) or not isinstance(t, int) or t < 0:
                raise ScenarioError(index, "remove_low_usage needs a non-negative integer 'threshold'")
            return RemoveLowUsage(t)
        if kind == "defragment":
            return Defragment()
    except InputError as exc:
        raise ScenarioError(index, str(exc)) from None
    raise ScenarioError(index, f"unknown event type {kind!r}")


def event_to_dict(event: ScenarioEvent) -> dict:
    if isinstance(event, Arrive):
        return {"type": "arrive", "module": module_to_dict(event.module)}
    if isinstance(event, Depart):
        return {"type": "depart", "id": event.module_id}
    if isinstance(event, RemoveLowUsage):
        return {"type": "remove_low_usage", "threshold": event.threshold}
    return {"type": "defragment"}


@dataclass(frozen=True)
class Scenario:
    initial: Layout
    events: tuple[ScenarioEvent, ...]
    seed: int | None = None
    name: str = ""


def scenario_from_dict(doc) -> Scenario:
    """Scenario document: container, optional seed/name, optional initial layout, events."""
    if not isinstance(doc, dict):
        raise InputError("document: expected object")
    if "container" not in doc:
        raise InputError("document: missing field 'container'")
    if "modules" in doc or "placements" in doc:
        initial = layout_from_dict(doc)
    else:
        initial = Layout(container_from_dict(doc["container"]))
    raw = doc.get("events", [])
    if not isinstance(raw, list):
        raise InputError("events: expected list")
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise InputError("seed: expected integer")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise InputError("name: expected string")
    return Scenario(initial, tuple(event_from_dict(e, i) for i, e in enumerate(raw)), seed, name)


def scenario_to_dict(scenario: Scenario) -> dict:
    doc: dict = {}
    if scenario.name:
        doc["name"] = scenario.name
    if scenario.seed is not None:
        doc["seed"] = scenario.seed
    doc.update(layout_to_dict(scenario.initial))
    if not scenario.initial.modules:
        doc = {k: v for k, v in doc.items() if k not in ("modules", "placements")}
    doc["events"] = [event_to_dict(e) for e in scenario.events]
    return doc


# ---------------------------------------------------------------- generator


@dataclass(frozen=True)
class ScenarioParams:
    container: tuple[int, int] = (13, 11)
    library: int = 24  # distinct modules that can be requested
    module_count: tuple[int, int] = (5, 11)  # modules left on the device at the defragmentation
    width: tuple[int, int] = (1, 4)
    height: tuple[int, int] = (1, 6)
    usage: tuple[int, int] = (0, 9)
    events: int = 60  # arrivals and departures during the busy period
    depart_weight: float = 0.15
    threshold: int | None = None  # emit a RemoveLowUsage before the defragmentation
    defragment: bool = True

    def check(self) -> None:
        W, H = self.container
        if W < 1 or H < 1:
            raise ValueError("container must be at least 1x1")
        if self.library < 1:
            raise ValueError("library must hold at least one module")
        for name in ("module_count", "width", "height", "usage"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < (0 if name == "usage" else 1):
                raise ValueError(f"{name}: bad range {lo}..{hi}")
        if self.width[1] > W or self.height[1] > H:
            raise ValueError("module dimensions may not exceed the container")
        if self.events < 0 or not 0 <= self.depart_weight <= 1:
            raise ValueError("events must be >= 0 and depart_weight in [0, 1]")


def generate_scenario(seed: int, params: ScenarioParams = ScenarioParams()) -> Scenario:
    """Deterministic random busy period followed by an idle-time defragmentation.

    A library of modules is drawn first; each busy step either requests a
    library module (placed by LIF with LRU eviction) or retires a placed one.
    Afterwards randomly chosen modules depart until at most a
    ``module_count`` draw remain, and the device is defragmented.
    Departures are only emitted for modules that are placed at that point.
    """
    params.check()
    rng = random.Random(seed)
    W, H = params.container
    library = [
        ModuleSpec(
            f"M{i + 1}",
            rng.randint(*params.width),
            rng.randint(*params.height),
            rng.randint(*params.usage),
        )
        for i in range(params.library)
    ]
    initial = Layout(Container(W, H))
    device = _Device(initial, True, None, None)
    scratch = ScenarioReport([], [])
    events: list[ScenarioEvent] = []
    for index in range(params.events):
        placed = sorted(device.placed_ids())
        if placed and rng.random() < params.depart_weight:
            event: ScenarioEvent = Depart(rng.choice(placed))
            device.depart(index, event.module_id)
        else:
            module = rng.choice(library)
            event = Arrive(module)
            device.arrive(index, module, scratch)
        events.append(event)
    keep = rng.randint(*params.module_count)
    placed = sorted(device.placed_ids())
    for module_id in rng.sample(placed, max(0, len(placed) - keep)):
        events.append(Depart(module_id))
    if params.threshold is not None:
        events.append(RemoveLowUsage(params.threshold))
    if params.defragment:
        events.append(Defragment())
    return Scenario(initial, tuple(events), seed, f"seed-{seed}")


def bundled_scenarios() -> list[Scenario]:
    """The ten shipped 13 x 11 scenarios, labelled A to J."""
    from importlib.resources import files

    from .jsonio import parse_json

    root = files("packclass") / "data" / "fixtures"
    docs = sorted((p.name, p.read_text()) for p in root.iterdir() if p.name.endswith(".json"))
    return [scenario_from_dict(parse_json(text, name)) for name, text in docs]
