"""Regenerate the bundled scenario fixtures.

Scenario A is an 11-module layout on the 13 x 11 device with 30 free cells
and no free column.  Every other scenario starts from the same layout and
removes a subset of its modules, chosen so that the module count, free space,
free columns before and the optimal width after match the target table.

Usage: python scripts/make_fixtures.py [seed]
"""
from __future__ import annotations

import itertools
import random
import sys
from pathlib import Path

from packclass.geometry import Container, Layout, ModuleSpec, check_layout, free_columns, metrics
from packclass.harness import Defragment, Depart, RemoveLowUsage, Scenario, scenario_to_dict
from packclass.jsonio import dumps
from packclass.strip import min_strip_width

W, H = 13, 11
OUT = Path(__file__).resolve().parent.parent / "src" / "packclass" / "data" / "fixtures"

# label: (modules removed, removed area, free columns before, optimal width)
TARGETS = {
    "B": (2, 22, 0, 9),
    "C": (2, 40, 0, 7),
    "D": (2, 12, 0, 10),
    "E": (5, 53, 0, 7),
    "F": (5, 24, 0, 9),
    "G": (6, 46, 2, 7),
    "H": (5, 23, 3, 9),
    "I": (6, 57, 1, 6),
    "J": (5, 12, 0, 10),
}


def sample_modules(rng: random.Random) -> list[tuple[int, int]] | None:
    small = [(rng.randint(1, 2), rng.randint(1, 3)) for _ in range(5)]
    rest = 113 - sum(w * h for w, h in small)
    big = [(rng.randint(2, 6), rng.randint(2, 10)) for _ in range(5)]
    last = rest - sum(w * h for w, h in big)
    shapes = [(w, last // w) for w in range(1, 7) if last > 0 and last % w == 0 and last // w <= 10]
    if not shapes:
        return None
    dims = small + big + [rng.choice(shapes)]
    rng.shuffle(dims)
    return dims


def subsets_ok(dims) -> bool:
    areas = [w * h for w, h in dims]
    for k, area, _, _ in TARGETS.values():
        if not any(sum(areas[i] for i in c) == area for c in itertools.combinations(range(11), k)):
            return False
    return True


def scramble(layout: Layout, rng: random.Random, steps: int) -> Layout:
    """Random walk over valid layouts: move one module to a random free spot."""
    import numpy as np
    from packclass.geometry import occupancy_grid

    for _ in range(steps):
        m, p = rng.choice(layout.placed())
        rest = layout.without([m.id])
        grid = occupancy_grid(rest)
        spots = [
            (x, y)
            for x in range(W - m.width + 1)
            for y in range(H - m.height + 1)
            if not grid[y : y + m.height, x : x + m.width].any()
        ]
        x, y = rng.choice(spots)
        layout = rest.with_placement(m, x, y)
    return layout


def main(seed: int) -> None:
    rng = random.Random(seed)
    while True:
        dims = sample_modules(rng)
        if dims is None or not subsets_ok(dims):
            continue
        modules = [ModuleSpec(f"M{i + 1}", w, h) for i, (w, h) in enumerate(dims)]
        try:
            strip = min_strip_width(modules, H, time_limit=2.0)
        except Exception:
            continue
        if strip.optimal_width != 11:
            continue
        base = Layout(Container(W, H), strip.layout.placements, strip.layout.modules)
        print("candidate", dims, flush=True)
        for attempt in range(40):
            layout = scramble(base, rng, 200)
            if free_columns(layout)[0] != 0:
                continue
            chosen = pick_subsets(layout, rng)
            if chosen is not None:
                write(layout, chosen, seed)
                return


def pick_subsets(layout: Layout, rng: random.Random):
    areas = {m.id: m.area for m in layout.placed_modules()}
    ids = sorted(areas)
    chosen = {}
    for label, (k, area, cols, width) in TARGETS.items():
        combos = [c for c in itertools.combinations(ids, k) if sum(areas[i] for i in c) == area]
        rng.shuffle(combos)
        for combo in combos[:40]:
            rest = layout.without(combo)
            if free_columns(rest)[0] != cols:
                continue
            try:
                w = min_strip_width(rest.placed_modules(), H, time_limit=1.0).optimal_width
            except Exception:
                continue
            if w == width:
                chosen[label] = combo
                break
        else:
            return None
    return chosen


def write(layout: Layout, chosen: dict, seed: int) -> None:
    # B loses its modules through the usage threshold: they get usage 0, everything else more
    low = set(chosen["B"])
    modules = {
        m.id: ModuleSpec(m.id, m.width, m.height, 0 if m.id in low else 1 + int(m.id[1:]) % 5)
        for m in layout.placed_modules()
    }
    layout = check_layout(Layout(layout.container, layout.placements, modules))
    OUT.mkdir(parents=True, exist_ok=True)
    scenarios = {"A": Scenario(layout, (Defragment(),), seed, "A")}
    scenarios["B"] = Scenario(layout, (RemoveLowUsage(1), Defragment()), seed, "B")
    for label, combo in chosen.items():
        if label != "B":
            events = tuple(Depart(i) for i in combo) + (Defragment(),)
            scenarios[label] = Scenario(layout, events, seed, label)
    for label in sorted(scenarios):
        (OUT / f"scenario_{label}.json").write_text(dumps(scenario_to_dict(scenarios[label])))
    print("before A:", metrics(layout).as_dict())


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2004)
