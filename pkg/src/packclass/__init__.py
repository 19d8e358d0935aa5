"""Exact strip packing via packing classes, for defragmenting FPGA module layouts."""
from .bounds import Bounds, ShelfStrategy, compute_bounds, shelf_pack, volume_lower_bound
from .geometry import (
    Container,
    FreeRect,
    Layout,
    LayoutError,
    MetricsReport,
    ModuleSpec,
    Placement,
    check_layout,
    column_interference,
    free_area,
    free_columns,
    max_free_rectangle,
    metrics,
    validate_layout,
)
from .opp import OppResult, SearchStats, Verdict, brute_force_opp, solve_opp
from .strip import DefragResult, SearchBudgetExceeded, StripResult, defragment, min_strip_width

__version__ = "0.1.0"
