"""Interval partitions of [0,1].

Cells are half-open [a_j, a_{j+1}) except the last one, which is closed.
Partitions are immutable and safe to share.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidArgumentError

#: Breakpoints closer than this are merged during refinement.
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class IntervalPartition:
    """Ordered breakpoints 0 = a_0 < a_1 < ... < a_J = 1."""

    breakpoints: tuple[float, ...]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise InvalidArgumentError("partition needs at least two breakpoints")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise InvalidArgumentError("breakpoints must start at 0 and end at 1")
        if not np.all(np.diff(bp) > 0):
            raise InvalidArgumentError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))

    @property
    def ncells(self) -> int:
        return len(self.breakpoints) - 1

    def weights(self) -> np.ndarray:
        """Cell lengths p_j; positive and summing to 1."""
        return np.diff(np.asarray(self.breakpoints))

    def locate(self, x: float) -> int:
        """Index of the cell containing x; x = 1 belongs to the last cell."""
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"point {x!r} outside [0, 1]")
        bp = np.asarray(self.breakpoints)
        j = int(np.searchsorted(bp, x, side="right")) - 1
        return min(j, self.ncells - 1)

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints)}

    @classmethod
    def from_json(cls, data: dict) -> "IntervalPartition":
        return cls(tuple(data["breakpoints"]))


def uniform(n: int) -> IntervalPartition:
    """Uniform partition with breakpoints k/n."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"uniform partition needs n >= 1, got {n!r}")
    return IntervalPartition(tuple(k / n for k in range(n + 1)))


def weights(p: IntervalPartition) -> np.ndarray:
    return p.weights()


def locate(p: IntervalPartition, x: float) -> int:
    return p.locate(x)


def common_refinement(p: IntervalPartition, q: IntervalPartition) -> IntervalPartition:
    """Partition whose breakpoints are the union of both inputs.

    Breakpoints within MERGE_TOL of each other are merged so floating-point
    noise cannot create zero-width cells.
    """
    merged = np.union1d(np.asarray(p.breakpoints), np.asarray(q.breakpoints))
    keep = [merged[0]]
    for b in merged[1:]:
        if b - keep[-1] > MERGE_TOL:
            keep.append(b)
        elif b == 1.0:
            keep[-1] = 1.0
    keep[0], keep[-1] = 0.0, 1.0
    return IntervalPartition(tuple(keep))


def from_weights(w) -> IntervalPartition:
    """Partition whose cell lengths match the given positive weights."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise InvalidArgumentError("weights must be positive")
    if abs(w.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError("weights must sum to 1")
    bp = np.concatenate([[0.0], np.cumsum(w)])
    bp[-1] = 1.0
    return IntervalPartition(tuple(bp))
