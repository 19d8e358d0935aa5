"""Cheap bounds on the strip width: area bound below, shelf heuristics above.

Shelves here are vertical slices of the strip.  A shelf is as wide as the
first module put into it and modules stack upwards inside it until the strip
height ``H`` is reached.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .geometry import Container, Layout, ModuleSpec


class ShelfStrategy(enum.Enum):
    NEXT_FIT = "next_fit"
    FIRST_FIT = "first_fit"
    BEST_FIT = "best_fit"


@dataclass(frozen=True)
class Bounds:
    lower: int
    upper: int
    upper_layout: Layout
    strategy: ShelfStrategy | None = None


def volume_lower_bound(modules: Sequence[ModuleSpec], H: int) -> int:
    if H < 1:
        raise ValueError("strip height must be >= 1")
    return -(-sum(m.area for m in modules) // H)


def _decreasing(modules: Sequence[ModuleSpec]) -> list[ModuleSpec]:
    return sorted(modules, key=lambda m: (-m.width, -m.height, m.id))


def shelf_pack(modules: Sequence[ModuleSpec], H: int, strategy: ShelfStrategy | str = ShelfStrategy.FIRST_FIT) -> Layout:
    """Pack into vertical shelves using next-, first- or best-fit decreasing.

    The returned layout's container is exactly as wide as the shelves used.
    """
    strategy = ShelfStrategy(strategy)
    for m in modules:
        if m.height > H:
            raise ValueError(f"module {m.id} of height {m.height} exceeds strip height {H}")
    shelves: list[list[int]] = []  # [x, width, used height]
    items = []
    for m in _decreasing(modules):
        if strategy is ShelfStrategy.NEXT_FIT:
            fits = [len(shelves) - 1] if shelves and shelves[-1][2] + m.height <= H else []
        else:
            fits = [i for i, s in enumerate(shelves) if s[2] + m.height <= H]
            if strategy is ShelfStrategy.BEST_FIT and fits:
                fits = [min(fits, key=lambda i: (H - shelves[i][2], i))]
        if fits:
            shelf = shelves[fits[0]]
        else:
            x = shelves[-1][0] + shelves[-1][1] if shelves else 0
            shelf = [x, m.width, 0]
            shelves.append(shelf)
        items.append((m, shelf[0], shelf[2]))
        shelf[2] += m.height
    width = shelves[-1][0] + shelves[-1][1] if shelves else 0
    return Layout.build(Container(max(width, 1), H), items) if items else Layout(Container(1, H))


def shelf_width(layout: Layout) -> int:
    return layout.used_width()


def compute_bounds(modules: Sequence[ModuleSpec], H: int) -> Bounds:
    """Area lower bound and the best of the three shelf heuristics."""
    lower = volume_lower_bound(modules, H)
    best = None
    for strategy in ShelfStrategy:
        layout = shelf_pack(modules, H, strategy)
        if best is None or layout.used_width() < best[0].used_width():
            best = (layout, strategy)
    layout, strategy = best
    return Bounds(lower, layout.used_width(), layout, strategy if modules else None)
