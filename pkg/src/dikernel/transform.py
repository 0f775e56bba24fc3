"""Canonical maps between discrete DeGroot models and DiKernels.

lift:        row-stochastic matrix + partition  ->  block kernel (densities)
discretize:  kernel + partition                 ->  block averages
block_to_model:  block kernel                   ->  matrix + weight vector
reduce_dimension: the composition of the three, over grouped agents.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ContractError, InvalidArgumentError, ShapeError
from .kernels import (
    AnalyticKernel,
    BlockKernel,
    GridKernel,
    OpinionFunction,
    refine_block,
)
from .partition import IntervalPartition, common_refinement, from_weights


@dataclass(frozen=True)
class WeightedDeGrootModel:
    """Row-stochastic matrix plus agent weights (and optional opinions)."""

    matrix: np.ndarray
    weights: np.ndarray
    opinions: np.ndarray = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        w = np.array(self.weights, dtype=float)
        n = w.size
        if m.shape != (n, n):
            raise ShapeError(f"matrix must be {n}x{n}, got {m.shape}")
        if np.any(m < 0):
            raise ContractError("matrix entries must be non-negative")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-12:
            raise ContractError("matrix rows must sum to 1")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ContractError("weights must be positive and sum to 1")
        m.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "weights", w)
        if self.opinions is not None:
            f = np.array(self.opinions, dtype=float)
            if f.shape != (n,):
                raise ShapeError("opinions must match the matrix dimension")
            if np.any(np.abs(f) > 1.0 + 1e-12):
                raise ContractError("opinions must lie in [-1, 1]")
            f.setflags(write=False)
            object.__setattr__(self, "opinions", f)

    @property
    def size(self) -> int:
        return self.weights.size

    def to_json(self) -> dict:
        out = {"matrix": self.matrix.tolist(), "weights": self.weights.tolist()}
        if self.opinions is not None:
            out["opinions"] = self.opinions.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "WeightedDeGrootModel":
        return cls(
            np.asarray(data["matrix"]),
            np.asarray(data["weights"]),
            np.asarray(data["opinions"]) if data.get("opinions") is not None else None,
        )


def lift(
    model: WeightedDeGrootModel, p: IntervalPartition
) -> tuple[BlockKernel, OpinionFunction]:
    """Block-constant kernel with values w_ij / p_j on cell (i, j).

    The partition must carry the model's weights as its cell lengths.
    Returns the kernel together with the lifted opinion function (constant
    zero opinions if the model carries none).
    """
    if p.ncells != model.size:
        raise ShapeError(
            f"partition has {p.ncells} cells, model has {model.size} agents"
        )
    pw = p.weights()
    if np.max(np.abs(pw - model.weights)) > 1e-12:
        raise ContractError("partition cell lengths must equal the model weights")
    values = model.matrix / pw[np.newaxis, :]
    kernel = BlockKernel(p, values)
    f0 = model.opinions if model.opinions is not None else np.zeros(model.size)
    return kernel, OpinionFunction(f0, partition=p)


def default_partition(model: WeightedDeGrootModel) -> IntervalPartition:
    """Partition whose cells carry the model weights (cumulative sums)."""
    return from_weights(model.weights)


def discretize_kernel(
    w: Union[BlockKernel, GridKernel, AnalyticKernel], v: IntervalPartition
) -> BlockKernel:
    """Block averages of W over the cells of V x V.

    Exact for block and analytic input; midpoint-quadrature accurate for
    grid input (breakpoints are snapped to the nearest grid line).
    """
    bp = np.asarray(v.breakpoints)
    if isinstance(w, AnalyticKernel):
        j = v.ncells
        vals = np.empty((j, j))
        for i in range(j):
            for k in range(j):
                vals[i, k] = w.cell_average(bp[i], bp[i + 1], bp[k], bp[k + 1])
        # exact integrals of a non-negative density; clear roundoff-scale dips
        vals[(vals < 0) & (vals > -1e-12)] = 0.0
        return BlockKernel(v, vals, bound=w.bound)

    if isinstance(w, BlockKernel):
        r = common_refinement(w.partition, v)
        fine = refine_block(w, r)
        rw = r.weights()
        mids = (np.asarray(r.breakpoints[:-1]) + np.asarray(r.breakpoints[1:])) / 2.0
        owner = np.array([v.locate(m) for m in mids])
        j = v.ncells
        mass = np.zeros((j, r.ncells))
        mass[owner, np.arange(r.ncells)] = rw
        cellw = v.weights()
        vals = (mass @ fine.values @ mass.T) / np.outer(cellw, cellw)
        return BlockKernel(v, vals, bound=w.bound)

    # GridKernel: snap breakpoints to grid lines, then average samples.
    n = w.n
    snapped = np.round(bp * n) / n
    if np.max(np.abs(snapped - bp)) > 1.0 / (2 * n) + 1e-12:
        raise ShapeError("partition breakpoints too far from grid lines to snap")
    edges = np.unique(np.round(snapped * n).astype(int))
    if edges[0] != 0 or edges[-1] != n or edges.size != bp.size:
        raise ShapeError("snapped breakpoints collapse partition cells")
    j = v.ncells
    vals = np.empty((j, j))
    for i in range(j):
        for k in range(j):
            block = w.samples[edges[i] : edges[i + 1], edges[k] : edges[k + 1]]
            vals[i, k] = block.mean()
    return BlockKernel(v, vals, bound=w.bound)


def block_to_model(w: BlockKernel) -> WeightedDeGrootModel:
    """Inverse of lift: probabilities w'_ij * p_j, weights = cell lengths."""
    p = w.partition.weights()
    return WeightedDeGrootModel(w.values * p[np.newaxis, :], p)


def reduce_dimension(
    model: WeightedDeGrootModel, groups: list[list[int]]
) -> WeightedDeGrootModel:
    """Aggregate agents into contiguous ordered groups.

    Pipeline: lift onto the weight-induced partition, discretize onto the
    coarser group partition, map back to a weighted model.
    """
    flat = [i for g in groups for i in g]
    if flat != list(range(model.size)):
        raise InvalidArgumentError(
            "groups must be contiguous, ordered, and cover every agent exactly once"
        )
    if any(len(g) == 0 for g in groups):
        raise InvalidArgumentError("groups must be non-empty")
    p = default_partition(model)
    kernel, _ = lift(model, p)
    bp = np.asarray(p.breakpoints)
    coarse_bp = [0.0]
    pos = 0
    for g in groups:
        pos += len(g)
        coarse_bp.append(float(bp[pos]))
    coarse = IntervalPartition(tuple(coarse_bp))
    return block_to_model(discretize_kernel(kernel, coarse))


def lift_opinions(f_hat, p: IntervalPartition) -> OpinionFunction:
    """Step function taking value f_hat[i] on cell i."""
    f_hat = np.asarray(f_hat, dtype=float)
    if f_hat.shape != (p.ncells,):
        raise ShapeError(f"expected {p.ncells} opinion values, got {f_hat.shape}")
    return OpinionFunction(f_hat, partition=p)


def project_opinions(f: OpinionFunction, v: IntervalPartition) -> np.ndarray:
    """Cell means of f over the cells of V (exact on aligned blocks)."""
    if f.is_block:
        r = common_refinement(f.partition, v)
        mids = (np.asarray(r.breakpoints[:-1]) + np.asarray(r.breakpoints[1:])) / 2.0
        vals = np.array([f.values[f.partition.locate(m)] for m in mids])
        owner = np.array([v.locate(m) for m in mids])
        rw = r.weights()
        out = np.zeros(v.ncells)
        np.add.at(out, owner, rw * vals)
        return out / v.weights()
    mids = (np.arange(f.n) + 0.5) / f.n
    owner = np.array([v.locate(m) for m in mids])
    out = np.zeros(v.ncells)
    np.add.at(out, owner, f.values / f.n)
    return out / v.weights()
