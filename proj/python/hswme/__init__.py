"""Shallow water moment solvers with POD and low-rank reduction."""

import json

from ._hswme import (
    FileFormatError,
    SolverError,
    legendre,
    load_basis,
    load_trajectory,
    preset_names,
    relative_l2_error,
)
from . import _hswme

__all__ = [
    "FileFormatError",
    "SolverError",
    "config",
    "initial_condition",
    "legendre",
    "load_basis",
    "load_trajectory",
    "preset",
    "preset_names",
    "rank_sweep",
    "relative_l2_error",
    "run",
]


def preset(name):
    return json.loads(_hswme.preset(name))


def config(**overrides):
    """Full configuration dict; a "preset" key is applied before the overrides."""
    return json.loads(_hswme.resolve_config(json.dumps(overrides)))


def run(cfg=None, keep_frames=True, **overrides):
    merged = dict(cfg or {})
    merged.update(overrides)
    return _hswme.run(json.dumps(merged), keep_frames)


def rank_sweep(cfg, ranks):
    return _hswme.rank_sweep(json.dumps(cfg), list(ranks))


def initial_condition(cfg=None, **overrides):
    merged = dict(cfg or {})
    merged.update(overrides)
    return _hswme.initial_condition(json.dumps(merged))
