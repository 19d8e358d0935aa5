"""Rectangles, layouts and fragmentation metrics on a column-reconfigured device.

Coordinates are integer and half-open: a module of width ``w`` placed at
column ``x`` occupies columns ``[x, x + w)``; rows likewise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

import numpy as np


class LayoutError(ValueError):
    """Raised when a layout is structurally invalid for the requested operation."""


@dataclass(frozen=True)
class ModuleSpec:
    id: str
    width: int
    height: int
    usage_count: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"module {self.id!r}: width and height must be >= 1, got {self.width}x{self.height}"
            )
        if self.usage_count < 0:
            raise ValueError(f"module {self.id!r}: usage_count must be >= 0")

    @property
    def area(self) -> int:
        return self.width * self.height

    def extent(self, dim: int) -> int:
        return self.width if dim == 0 else self.height


@dataclass(frozen=True)
class Container:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"container must be at least 1x1, got {self.width}x{self.height}")

    @property
    def area(self) -> int:
        return self.width * self.height

    def extent(self, dim: int) -> int:
        return self.width if dim == 0 else self.height


@dataclass(frozen=True)
class Placement:
    module_id: str
    x: int
    y: int


@dataclass(frozen=True)
class Layout:
    """A container with modules placed in it.

    ``modules`` may hold specs that are not placed; metrics only look at
    ``placements``.  Construction does not validate geometry, use
    :func:`validate_layout` for that.
    """

    container: Container
    placements: tuple[Placement, ...] = ()
    modules: Mapping[str, ModuleSpec] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(self.placements))
        object.__setattr__(self, "modules", MappingProxyType(dict(self.modules)))

    @classmethod
    def build(cls, container: Container, items: Iterable[tuple[ModuleSpec, int, int]]) -> "Layout":
        """Layout from ``(module, x, y)`` triples."""
        items = list(items)
        return cls(
            container,
            tuple(Placement(m.id, x, y) for m, x, y in items),
            {m.id: m for m, _, _ in items},
        )

    def placed(self) -> list[tuple[ModuleSpec, Placement]]:
        return [(self.modules[p.module_id], p) for p in self.placements]

    def placed_modules(self) -> list[ModuleSpec]:
        return [self.modules[p.module_id] for p in self.placements]

    def placement_of(self, module_id: str) -> Placement | None:
        for p in self.placements:
            if p.module_id == module_id:
                return p
        return None

    def with_placement(self, module: ModuleSpec, x: int, y: int) -> "Layout":
        modules = dict(self.modules)
        modules[module.id] = module
        return Layout(self.container, self.placements + (Placement(module.id, x, y),), modules)

    def without(self, module_ids: Iterable[str]) -> "Layout":
        drop = set(module_ids)
        return Layout(
            self.container,
            tuple(p for p in self.placements if p.module_id not in drop),
            {k: v for k, v in self.modules.items() if k not in drop},
        )

    def used_width(self) -> int:
        """Rightmost occupied column + 1 (0 for an empty layout)."""
        return max((p.x + m.width for m, p in self.placed()), default=0)

    def __hash__(self):
        return hash((self.container, self.placements, tuple(sorted(self.modules.items()))))

    def __eq__(self, other):
        if not isinstance(other, Layout):
            return NotImplemented
        return (
            self.container == other.container
            and self.placements == other.placements
            and dict(self.modules) == dict(other.modules)
        )


class Violation(NamedTuple):
    kind: str  # "unknown_module" | "out_of_bounds" | "overlap" | "duplicate"
    module_ids: tuple[str, ...]
    detail: str


class FreeRect(NamedTuple):
    width: int
    height: int
    x: int
    y: int

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class MetricsReport:
    free_area: int
    max_free_rect: FreeRect
    free_column_count: int
    free_column_indices: tuple[int, ...]

    def as_dict(self) -> dict:
        r = self.max_free_rect
        return {
            "free_area": self.free_area,
            "max_free_rect": {"width": r.width, "height": r.height, "x": r.x, "y": r.y},
            "free_columns": {"count": self.free_column_count, "indices": list(self.free_column_indices)},
        }


def _intersection(a0: int, a1: int, b0: int, b1: int) -> int:
    return max(0, min(a1, b1) - max(a0, b0))


def validate_layout(layout: Layout) -> list[Violation]:
    """Every out-of-bounds placement and overlapping pair; ``[]`` means valid."""
    W, H = layout.container.width, layout.container.height
    violations = []
    boxes = []
    seen = set()
    for p in layout.placements:
        if p.module_id in seen:
            violations.append(Violation("duplicate", (p.module_id,), "module placed more than once"))
            continue
        seen.add(p.module_id)
        m = layout.modules.get(p.module_id)
        if m is None:
            violations.append(Violation("unknown_module", (p.module_id,), "placement references unknown module"))
            continue
        if not (0 <= p.x <= W - m.width and 0 <= p.y <= H - m.height):
            violations.append(
                Violation(
                    "out_of_bounds",
                    (m.id,),
                    f"{m.width}x{m.height} at ({p.x},{p.y}) exceeds {W}x{H}",
                )
            )
        boxes.append((m.id, p.x, p.y, p.x + m.width, p.y + m.height))
    for i in range(len(boxes)):
        a, ax0, ay0, ax1, ay1 = boxes[i]
        for j in range(i + 1, len(boxes)):
            b, bx0, by0, bx1, by1 = boxes[j]
            dx = _intersection(ax0, ax1, bx0, bx1)
            dy = _intersection(ay0, ay1, by0, by1)
            if dx and dy:
                violations.append(Violation("overlap", (a, b), f"overlap of {dx}x{dy} cells"))
    return violations


def check_layout(layout: Layout) -> Layout:
    violations = validate_layout(layout)
    if violations:
        raise LayoutError("; ".join(f"{v.kind} {','.join(v.module_ids)}: {v.detail}" for v in violations))
    return layout


def occupancy_grid(layout: Layout) -> np.ndarray:
    """Boolean ``(H, W)`` grid, ``grid[y, x]`` true when the cell is covered."""
    grid = np.zeros((layout.container.height, layout.container.width), dtype=bool)
    for m, p in layout.placed():
        grid[p.y : p.y + m.height, p.x : p.x + m.width] = True
    return grid


def free_area(layout: Layout) -> int:
    return layout.container.area - sum(m.area for m in layout.placed_modules())


def free_columns(layout: Layout) -> tuple[int, list[int]]:
    covered = np.zeros(layout.container.width, dtype=bool)
    for m, p in layout.placed():
        covered[p.x : p.x + m.width] = True
    cols = [int(c) for c in np.flatnonzero(~covered)]
    return len(cols), cols


def max_free_rectangle(layout: Layout) -> FreeRect:
    """Largest empty axis-aligned rectangle.

    Ties go to the wider rectangle, then to the smaller ``(x, y)``.  For each
    bottom row the column heights of free cells above it are scanned over every
    column range; every maximum-area rectangle shows up this way because its
    height equals the minimum column height over its range.
    """
    grid = occupancy_grid(layout)
    H, W = grid.shape
    heights = np.zeros(W, dtype=int)
    best = FreeRect(0, 0, 0, 0)
    best_key = (0, 0, 0, 0)
    for row in range(H):
        heights = np.where(grid[row], 0, heights + 1)
        for x0 in range(W):
            h = heights[x0]
            if h == 0:
                continue
            for x1 in range(x0, W):
                h = min(h, heights[x1])
                if h == 0:
                    break
                w = x1 - x0 + 1
                y = row - h + 1
                key = (w * h, w, -x0, -y)
                if key > best_key:
                    best_key = key
                    best = FreeRect(int(w), int(h), x0, int(y))
    return best


def column_interference(layout: Layout, x: int, w: int, c: int = 1) -> tuple[int, dict[str, int]]:
    """Interruption per placed module when columns ``[x, x + w)`` are reconfigured.

    Each module loses ``c`` time units per shared column.
    """
    if w < 1 or not 0 <= x <= layout.container.width - w:
        raise ValueError(f"window [{x}, {x + w}) does not fit in width {layout.container.width}")
    times = {m.id: c * _intersection(p.x, p.x + m.width, x, x + w) for m, p in layout.placed()}
    return sum(1 for t in times.values() if t > 0), times


def metrics(layout: Layout) -> MetricsReport:
    count, cols = free_columns(layout)
    return MetricsReport(free_area(layout), max_free_rectangle(layout), count, tuple(cols))
