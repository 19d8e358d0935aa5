"""Command-line front end.

Exit codes: 0 success / feasible, 1 infeasible, 2 search budget exhausted,
64 malformed input, 70 internal error.  Output files are written atomically.
Set ``PACKCLASS_LOG`` (e.g. ``INFO`` or ``DEBUG``) for a trace on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .bounds import compute_bounds
from .geometry import Layout, LayoutError, check_layout
from .harness import (
    Defragment,
    RemoveLowUsage,
    Scenario,
    ScenarioError,
    ScenarioParams,
    bundled_scenarios,
    format_table,
    generate_scenario,
    report_row,
    run_scenario,
    scenario_from_dict,
)
from .jsonio import InputError, container_from_dict, dumps, layout_from_dict, layout_to_dict, modules_from_list, read_json, write_atomic
from .opp import Verdict, solve_opp
from .render import render_svg
from .strip import DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT, SearchBudgetExceeded, defragment

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 64
EXIT_INTERNAL = 70

log = logging.getLogger("packclass")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not the "budget exhausted" code 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class _Output:
    def __init__(self, args):
        self.quiet = args.quiet

    def print(self, text: str) -> None:
        if not self.quiet:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _instance(path):
    """Container and modules of an instance or layout document (placements ignored)."""
    doc = read_json(path)
    if not isinstance(doc, dict) or "container" not in doc:
        raise InputError(f"{path}: expected an object with a 'container' field")
    return container_from_dict(doc["container"]), modules_from_list(doc.get("modules", []))


def _layout(path) -> Layout:
    layout = layout_from_dict(read_json(path))
    try:
        return check_layout(layout)
    except LayoutError as exc:
        raise InputError(f"{path}: invalid layout: {exc}") from None


def cmd_solve_opp(args, out: _Output) -> int:
    container, modules = _instance(args.instance)
    result = solve_opp(modules, container, args.node_budget, args.time_budget)
    doc = {"verdict": result.verdict.value, "stats": result.stats.as_dict()}
    if result.feasible:
        doc["layout"] = layout_to_dict(result.layout)
        if args.svg:
            write_atomic(args.svg, render_svg(result.layout))
    text = dumps(doc)
    if args.out:
        write_atomic(args.out, text)
    out.print(text)
    return {Verdict.FEASIBLE: EXIT_OK, Verdict.INFEASIBLE: EXIT_INFEASIBLE}.get(result.verdict, EXIT_UNKNOWN)


def _svg_pair(path: str) -> tuple[Path, Path]:
    p = Path(path)
    stem = p.with_suffix("") if p.suffix == ".svg" else p
    return stem.with_name(stem.name + ".before.svg"), stem.with_name(stem.name + ".after.svg")


def cmd_defrag(args, out: _Output) -> int:
    layout = _layout(args.layout)
    result = defragment(layout, args.node_budget, args.time_budget)
    strip = result.strip
    row = report_row(Path(args.layout).stem, None, layout, result.layout)
    doc = {
        "optimal_width": strip.optimal_width,
        "lower_bound": strip.lower_bound,
        "upper_bound": strip.upper_bound,
        "probes": [{"width": p.width, "verdict": p.verdict.value, **p.stats.as_dict()} for p in strip.probes],
        "row": row.as_dict(),
        "before": result.before.as_dict(),
        "after": result.after.as_dict(),
        "layout": layout_to_dict(result.layout),
    }
    if args.out:
        write_atomic(args.out, dumps(doc))
    if args.svg:
        before, after = _svg_pair(args.svg)
        write_atomic(before, render_svg(layout, "before defragmentation"))
        write_atomic(after, render_svg(result.layout, "after defragmentation"))
    probes = ", ".join(f"{p.width}:{p.verdict.value}" for p in strip.probes) or "none"
    out.print(f"optimal width {strip.optimal_width} (bounds {strip.lower_bound}..{strip.upper_bound}; probes {probes})")
    out.print(format_table([row]))
    return EXIT_OK


def _with_threshold(scenario: Scenario, threshold: int | None) -> Scenario:
    if threshold is None:
        return scenario
    events = []
    for e in scenario.events:
        if isinstance(e, Defragment):
            events.append(RemoveLowUsage(threshold))
        events.append(e)
    return Scenario(scenario.initial, tuple(events), scenario.seed, scenario.name)


def cmd_simulate(args, out: _Output) -> int:
    scenarios: list[Scenario] = []
    if args.bundled:
        scenarios.extend(bundled_scenarios())
    for path in args.scenarios:
        doc = read_json(path)
        try:
            sc = scenario_from_dict(doc)
        except ScenarioError as exc:
            raise InputError(f"{path}: {exc}") from None
        scenarios.append(Scenario(sc.initial, sc.events, sc.seed, sc.name or Path(path).stem))
    if args.seed is not None:
        scenarios.append(generate_scenario(args.seed, ScenarioParams()))
    if not scenarios:
        raise InputError("simulate needs scenario files, --bundled or --seed")
    rows, reports = [], []
    for sc in scenarios:
        sc = _with_threshold(sc, args.usage_threshold)
        try:
            report = run_scenario(sc.initial, sc.events, node_limit=args.node_budget, time_limit=args.time_budget, label=sc.name)
        except ScenarioError as exc:
            raise InputError(f"scenario {sc.name or '?'}: {exc}") from None
        rows.extend(report.rows)
        reports.append(report.as_dict(sc.name))
    if args.out:
        write_atomic(args.out, dumps({"scenarios": reports}))
    out.print(format_table(rows))
    return EXIT_OK


def cmd_render(args, out: _Output) -> int:
    layout = _layout(args.layout)
    svg = render_svg(layout)
    if args.out:
        write_atomic(args.out, svg)
    else:
        out.print(svg)
    return EXIT_OK


def cmd_bounds(args, out: _Output) -> int:
    container, modules = _instance(args.instance)
    try:
        b = compute_bounds(modules, container.height)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {
        "height": container.height,
        "lower": b.lower,
        "upper": b.upper,
        "strategy": b.strategy.value if b.strategy else None,
        "layout": layout_to_dict(b.upper_layout),
    }
    if args.out:
        write_atomic(args.out, dumps(doc))
    if args.svg:
        write_atomic(args.svg, render_svg(b.upper_layout))
    out.print(f"lower {b.lower} upper {b.upper}" + (f" ({b.strategy.value})" if b.strategy else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the result document here")
    common.add_argument("--quiet", action="store_true", help="print nothing on stdout")
    budget = _Parser(add_help=False)
    budget.add_argument("--node-budget", type=int, default=DEFAULT_NODE_LIMIT, help="search nodes per OPP probe")
    budget.add_argument("--time-budget", type=float, default=DEFAULT_TIME_LIMIT, help="seconds per OPP probe")

    parser = _Parser(prog="packclass", description="Exact strip packing and layout defragmentation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-opp", parents=[common, budget], help="decide whether modules fit a container")
    p.add_argument("instance")
    p.add_argument("--svg", help="render the packing when feasible")
    p.set_defaults(func=cmd_solve_opp)

    p = sub.add_parser("defrag", parents=[common, budget], help="repack a layout into the fewest columns")
    p.add_argument("layout")
    p.add_argument("--svg", help="write <name>.before.svg and <name>.after.svg")
    p.set_defaults(func=cmd_defrag)

    p = sub.add_parser("simulate", parents=[common, budget], help="run placement scenarios")
    p.add_argument("scenarios", nargs="*")
    p.add_argument("--bundled", action="store_true", help="run the ten shipped scenarios")
    p.add_argument("--seed", type=int, help="also run a generated scenario with this seed")
    p.add_argument("--usage-threshold", type=int, help="remove modules used fewer times before each defragmentation")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("render", parents=[common], help="draw a layout as SVG")
    p.add_argument("layout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bounds", parents=[common], help="area and shelf bounds on the strip width")
    p.add_argument("instance")
    p.add_argument("--svg", help="render the shelf layout")
    p.set_defaults(func=cmd_bounds)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("PACKCLASS_LOG")
    if not level:
        return
    value = int(level) if level.isdigit() else getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=value, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "usage_threshold", None) is not None and args.usage_threshold < 0:
        parser.error("--usage-threshold must be >= 0")
    out = _Output(args)
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"packclass: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SearchBudgetExceeded as exc:
        print(f"packclass: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except Exception as exc:  # noqa: BLE001 - last-resort guard for the exit code contract
        log.debug("internal error", exc_info=True)
        print(f"packclass: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
