"""Small input-validation helpers shared by the public entry points."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np

from .exceptions import InvalidConfig, UnknownNode


def check_positive(value, name: str, *, strict: bool = True) -> float:
    if not isinstance(value, Real) or not math.isfinite(value):
        raise InvalidConfig(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise InvalidConfig(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise InvalidConfig(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_count(value, name: str, *, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise InvalidConfig(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidConfig(f"{name} must be >= {minimum}, got {value!r}")
    return int(value)


def check_node(topology, node) -> int:
    if isinstance(node, bool) or not isinstance(node, Integral):
        raise UnknownNode(node)
    if not 0 <= node < topology.node_count:
        raise UnknownNode(node)
    return int(node)


def check_random_state(seed) -> np.random.Generator:
    """Turn a seed, ``None`` or an existing generator into a ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, Integral):
        return np.random.default_rng(seed)
    raise InvalidConfig(f"cannot build a random generator from {seed!r}")


def check_probability_row(row, name: str = "routing row") -> np.ndarray:
    """Validate one routing-matrix row: entries >= 0 and summing to at most 1."""
    arr = np.asarray(row, dtype=float)
    if arr.ndim != 1:
        raise InvalidConfig(f"{name} must be one-dimensional")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidConfig(f"{name} has negative or non-finite entries")
    if arr.sum() > 1.0 + 1e-12:
        raise InvalidConfig(f"{name} sums to {arr.sum():.6g} > 1")
    return arr
