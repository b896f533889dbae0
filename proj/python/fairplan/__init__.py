"""Two-layer production and workforce planner (C++ core)."""
import json as _json

from . import _core
from ._core import (
    Episode,
    IllegalActionError,
    fairness_score,
    flatten,
    format_iso8601,
    from_solver_minutes,
    parse_iso8601,
    shift_grid,
    to_solver_minutes,
    unflatten,
)

__all__ = [
    "Episode",
    "IllegalActionError",
    "fairness_score",
    "flatten",
    "format_iso8601",
    "from_solver_minutes",
    "generate",
    "parse_iso8601",
    "run",
    "shift_grid",
    "solve_schedule",
    "timebox_schema",
    "to_solver_minutes",
    "unflatten",
]


def run(orders_csv, static_json, objective="balanced", reward="balanced", strategy="greedy",
        days_to_plan=5, seed=0, mcts_rollouts=3):
    """Both layers end to end; returns the solution record as a dict."""
    return _json.loads(_core.run(orders_csv, static_json, objective, reward, strategy,
                                 days_to_plan, seed, mcts_rollouts))


def solve_schedule(orders_csv, static_json, objective="balanced", seed=0):
    return _json.loads(_core.solve_schedule(orders_csv, static_json, objective, seed))


def timebox_schema():
    return _json.loads(_core.timebox_schema())


def generate(seed=0, **ranges):
    """Seeded random instance as (orders_csv, static_json)."""
    return _core.generate(seed, ranges.get("batches", 6), ranges.get("lines", 3), ranges.get("workers", 8))
