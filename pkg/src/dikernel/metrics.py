"""Distances between kernels and the quantitative error bounds.

The cut norm of a signed block kernel is computed exactly by subset
enumeration: the objective is bilinear in per-cell inclusion fractions, so
the supremum over measurable rectangles is attained at 0/1 cell subsets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, InvalidArgumentError, ShapeError
from .kernels import BlockKernel, GridKernel, LipschitzMeta, OpinionFunction, refine_block
from .partition import IntervalPartition, common_refinement

#: Exact cut-norm enumeration is limited to this many cells.
CUT_NORM_EXACT_MAX_CELLS = 22

_CHUNK_BITS = 16


@dataclass(frozen=True)
class SignedBlockKernel:
    """Block-constant signed function, typically a difference W - V."""

    partition: IntervalPartition
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        j = self.partition.ncells
        if v.shape != (j, j):
            raise ShapeError(f"values must be {j}x{j}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ShapeError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def to_json(self) -> dict:
        return {"partition": list(self.partition.breakpoints), "values": self.values.tolist()}


def block_difference(w: BlockKernel, v: BlockKernel) -> SignedBlockKernel:
    """W - V on the common refinement of their partitions."""
    r = common_refinement(w.partition, v.partition)
    wr, vr = refine_block(w, r), refine_block(v, r)
    return SignedBlockKernel(r, wr.values - vr.values)


def l1_distance(f: OpinionFunction, g: OpinionFunction) -> float:
    """Integral of |f - g|; exact on blocks, midpoint quadrature on grids."""
    if f.is_block and g.is_block:
        r = common_refinement(f.partition, g.partition)
        mids = (np.asarray(r.breakpoints[:-1]) + np.asarray(r.breakpoints[1:])) / 2.0
        fv = np.array([f.values[f.partition.locate(m)] for m in mids])
        gv = np.array([g.values[g.partition.locate(m)] for m in mids])
        return float(r.weights() @ np.abs(fv - gv))
    if not f.is_block and not g.is_block and f.n == g.n:
        return float(np.abs(f.values - g.values).sum() / f.n)
    raise ShapeError("cannot align a block function with a grid function")


def _best_columns(c: np.ndarray) -> tuple[float, np.ndarray]:
    """max over column subsets T of |sum_{j in T} c_j| and a witness."""
    pos = c > 0
    p, q = float(c[pos].sum()), float(-c[~pos].sum())
    return (p, pos) if p >= q else (q, ~pos)


def cut_norm_exact(u: SignedBlockKernel):
    """Exact cut norm with witnessing cell subsets (S, T).

    Enumerates row subsets S; for each, the optimal T keeps the columns of
    one sign.  Returns (value, row indices, column indices).
    """
    j = u.partition.ncells
    if j > CUT_NORM_EXACT_MAX_CELLS:
        raise BudgetError(
            f"{j} cells exceeds the exact enumeration budget "
            f"({CUT_NORM_EXACT_MAX_CELLS}); use cut_norm_heuristic"
        )
    p = u.partition.weights()
    m = (p[:, None] * p[None, :]) * u.values  # mass per cell pair
    best, best_s, best_t = 0.0, np.zeros(j, bool), np.zeros(j, bool)

    lo_bits = min(j, _CHUNK_BITS)
    hi_bits = j - lo_bits
    lo_masks = np.arange(2**lo_bits, dtype=np.uint32)
    lo_members = (lo_masks[:, None] >> np.arange(lo_bits)) & 1  # (2^lo, lo)
    lo_sums = lo_members.astype(float) @ m[:lo_bits]  # (2^lo, j)
    for hi in range(2**hi_bits):
        hi_sel = np.array([(hi >> b) & 1 for b in range(hi_bits)], dtype=bool)
        base = hi_sel.astype(float) @ m[lo_bits:] if hi_bits else np.zeros(j)
        c = lo_sums + base
        pos = np.maximum(c, 0.0).sum(axis=1)
        neg = np.maximum(-c, 0.0).sum(axis=1)
        vals = np.maximum(pos, neg)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            s = np.zeros(j, bool)
            s[:lo_bits] = lo_members[k].astype(bool)
            s[lo_bits:] = hi_sel
            _, t = _best_columns(c[k])
            best_s, best_t = s, t
    return best, np.flatnonzero(best_s), np.flatnonzero(best_t)


def cut_norm_heuristic(u: SignedBlockKernel, restarts: int = 50, seed: int = 0):
    """Alternating-maximization lower bound on the cut norm.

    Deterministic given the seed; never exceeds the exact value.
    """
    if restarts < 1:
        raise InvalidArgumentError("restarts must be >= 1")
    j = u.partition.ncells
    p = u.partition.weights()
    m = (p[:, None] * p[None, :]) * u.values
    rng = np.random.default_rng(seed)
    best, best_s, best_t = 0.0, np.zeros(j, bool), np.zeros(j, bool)
    for r in range(restarts):
        s = np.ones(j, bool) if r == 0 else rng.random(j) < 0.5
        val = -1.0
        for _ in range(100):
            new_val, t = _best_columns(s.astype(float) @ m)
            new_val2, s2 = _best_columns(m @ t.astype(float))
            if new_val2 <= val + 1e-15:
                break
            val, s = new_val2, s2
        val, t = _best_columns(s.astype(float) @ m)
        if val > best:
            best, best_s, best_t = float(val), s, t
    return best, np.flatnonzero(best_s), np.flatnonzero(best_t)


@dataclass(frozen=True)
class BoundReport:
    """A computed error bound together with the inputs that produced it."""

    bound: float
    kind: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bound < 0:
            raise InvalidArgumentError("bounds are non-negative")

    def to_json(self) -> dict:
        return {"bound": self.bound, "kind": self.kind, "inputs": dict(self.inputs)}


def bound_one_step(l1: float, cut: float) -> BoundReport:
    """One update step: ||T(W)f - T(V)g||_1 <= ||f-g||_1 + 4 ||W-V||_cut."""
    return BoundReport(l1 + 4.0 * cut, "one_step", {"l1": l1, "cut": cut})


def bound_dynamic(t: int, cut: float) -> BoundReport:
    """t-step divergence, capped at the opinion-space diameter 2."""
    return BoundReport(min(2.0, 4.0 * t * cut), "dynamic", {"t": t, "cut": cut})


def bound_discounted(alpha: float, delta: float, cut: float) -> BoundReport:
    """Discounted-utility gap between one kernel and its discretization."""
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    if alpha < 0:
        raise InvalidArgumentError("alpha must be >= 0")
    b = 4.0 * alpha * delta / (1.0 - delta) ** 2 * cut
    return BoundReport(b, "discounted", {"alpha": alpha, "delta": delta, "cut": cut})


def bound_two_kernel_discounted(
    alpha: float, delta: float, l1: float, cut: float
) -> BoundReport:
    """Discounted gap for two kernels and two starting opinion functions."""
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    b = alpha * delta / (1.0 - delta) * l1 + 4.0 * alpha * delta / (1.0 - delta) ** 2 * cut
    return BoundReport(
        b,
        "two_kernel_discounted",
        {"alpha": alpha, "delta": delta, "l1": l1, "cut": cut},
    )


def bound_partition(meta: LipschitzMeta, n: int) -> BoundReport:
    """Cut distance to any discretization on cells of measure <= 1/n."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    b = 2.0 * meta.theta / n + meta.bound * meta.k**2 / n**2
    return BoundReport(
        b, "partition", {"theta": meta.theta, "k": meta.k, "m": meta.bound, "n": n}
    )


def min_partition_size(eta: float, meta: LipschitzMeta) -> int:
    """Smallest n0 with 4 * bound_partition(meta, n) < eta for all n >= n0."""
    if eta <= 0:
        raise InvalidArgumentError("eta must be positive")
    theta, k, m = meta.theta, meta.k, meta.bound
    root = (8.0 * theta + np.sqrt(64.0 * theta**2 + 16.0 * k**2 * m * eta)) / (2.0 * eta)
    n0 = int(np.floor(root)) + 1
    # Guard against floating-point edge cases at the root.
    while 8.0 * theta / n0 + 4.0 * m * k**2 / n0**2 >= eta:
        n0 += 1
    return n0
