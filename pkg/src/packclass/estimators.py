"""Estimator-style wrappers around the solvers.

Module sets are given as ``(n, 2)`` integer arrays of ``(width, height)``
rows; row ``i`` becomes module ``M{i+1}`` unless ids are passed.  Positions
come back as ``(n, 2)`` arrays of ``(x, y)`` in the same row order.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .geometry import Container, Layout, ModuleSpec, check_layout
from .opp import Verdict, solve_opp
from .strip import DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT, defragment, min_strip_width


def check_modules(X, ids: Sequence[str] | None = None) -> list[ModuleSpec]:
    """Validate module input and return specs.

    Accepts a sequence of :class:`ModuleSpec` (returned as a list) or an array
    of positive integer ``(width, height)`` rows.
    """
    if isinstance(X, (list, tuple)) and X and all(isinstance(m, ModuleSpec) for m in X):
        if len({m.id for m in X}) != len(X):
            raise ValueError("module ids must be unique")
        return list(X)
    arr = check_array(X, dtype=None, ensure_min_samples=0, ensure_all_finite=True)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) array of width/height rows, got shape {arr.shape}")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("widths and heights must be integers")
    arr = arr.astype(int)
    if arr.size and arr.min() < 1:
        raise ValueError("widths and heights must be >= 1")
    if ids is None:
        ids = [f"M{i + 1}" for i in range(len(arr))]
    if len(ids) != len(arr) or len(set(ids)) != len(ids):
        raise ValueError("ids must be unique and match the number of rows")
    return [ModuleSpec(str(i), int(w), int(h)) for i, (w, h) in zip(ids, arr)]


def check_layout_input(layout) -> Layout:
    """The layout itself if it is a valid :class:`Layout`, else an error."""
    if not isinstance(layout, Layout):
        raise TypeError(f"expected a Layout, got {type(layout).__name__}")
    return check_layout(layout)


def positions(layout: Layout, modules: Sequence[ModuleSpec]) -> np.ndarray:
    """``(n, 2)`` array of placement coordinates in ``modules`` order."""
    out = np.empty((len(modules), 2), dtype=int)
    for i, m in enumerate(modules):
        p = layout.placement_of(m.id)
        if p is None:
            raise ValueError(f"module {m.id} is not placed")
        out[i] = (p.x, p.y)
    return out


class OrthogonalPacker(BaseEstimator):
    """Decide whether modules fit a ``width x height`` container.

    After ``fit``: ``verdict_``, ``feasible_``, ``layout_`` (or ``None``),
    ``positions_`` and ``n_nodes_``.
    """

    def __init__(self, width: int = 13, height: int = 11, node_budget=DEFAULT_NODE_LIMIT, time_budget=DEFAULT_TIME_LIMIT):
        self.width = width
        self.height = height
        self.node_budget = node_budget
        self.time_budget = time_budget

    def fit(self, X, y=None):
        self.modules_ = check_modules(X)
        result = solve_opp(self.modules_, Container(self.width, self.height), self.node_budget, self.time_budget)
        self.verdict_ = result.verdict
        self.feasible_ = result.verdict is Verdict.FEASIBLE
        self.layout_ = result.layout
        self.positions_ = positions(result.layout, self.modules_) if self.feasible_ else None
        self.n_nodes_ = result.stats.nodes
        return self

    def predict(self, X):
        """Positions for ``X``; rows are ``(-1, -1)`` when the set does not fit."""
        check_is_fitted(self, "verdict_")
        modules = check_modules(X)
        fitted = self if modules == self.modules_ else OrthogonalPacker(**self.get_params()).fit(modules)
        if not fitted.feasible_:
            return np.full((len(modules), 2), -1, dtype=int)
        return fitted.positions_.copy()


class StripPacker(TransformerMixin, BaseEstimator):
    """Minimum-width packing into a strip of fixed ``height``.

    After ``fit``: ``width_``, ``layout_``, ``positions_``, ``lower_bound_``,
    ``upper_bound_`` and ``n_probes_``.
    """

    def __init__(self, height: int = 11, node_budget=DEFAULT_NODE_LIMIT, time_budget=DEFAULT_TIME_LIMIT):
        self.height = height
        self.node_budget = node_budget
        self.time_budget = time_budget

    def fit(self, X, y=None):
        self.modules_ = check_modules(X)
        result = min_strip_width(self.modules_, self.height, self.node_budget, self.time_budget)
        self.width_ = result.optimal_width
        self.layout_ = result.layout
        self.positions_ = positions(result.layout, self.modules_)
        self.lower_bound_ = result.lower_bound
        self.upper_bound_ = result.upper_bound
        self.n_probes_ = len(result.probes)
        return self

    def transform(self, X):
        check_is_fitted(self, "width_")
        modules = check_modules(X)
        if modules == self.modules_:
            return self.positions_.copy()
        return StripPacker(**self.get_params()).fit(modules).positions_


class Defragmenter(TransformerMixin, BaseEstimator):
    """Repack a layout into its fewest leftmost columns.

    After ``fit``: ``layout_``, ``width_``, ``before_`` and ``after_`` metrics.
    """

    def __init__(self, node_budget=DEFAULT_NODE_LIMIT, time_budget=DEFAULT_TIME_LIMIT):
        self.node_budget = node_budget
        self.time_budget = time_budget

    def fit(self, X, y=None):
        layout = check_layout_input(X)
        result = defragment(layout, self.node_budget, self.time_budget)
        self.source_ = layout
        self.layout_ = result.layout
        self.width_ = result.strip.optimal_width
        self.before_ = result.before
        self.after_ = result.after
        return self

    def transform(self, X):
        check_is_fitted(self, "layout_")
        layout = check_layout_input(X)
        if layout == self.source_:
            return self.layout_
        return Defragmenter(**self.get_params()).fit(layout).layout_
