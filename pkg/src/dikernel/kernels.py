"""DiKernel carriers and the opinion-update operator.

Two numeric carriers are used:

* ``BlockKernel`` -- block-constant densities on an interval partition.
  All algebra on these is exact (no quadrature), which is what lets the
  worked rational examples reproduce to machine precision.
* ``GridKernel`` -- midpoint samples of an analytic kernel on a uniform
  n x n grid.  Quadrature error scales like M/n.

Analytic kernels enter only through the named catalog at the bottom of this
module; they support exact rectangle integrals so discretizations of them
are exact as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ContractError, InvalidArgumentError, ShapeError
from .partition import IntervalPartition, common_refinement, uniform

#: Row-sum tolerance for block kernels (exact arithmetic expected).
BLOCK_ROW_TOL = 1e-9

#: Values may exceed [-1, 1] by at most this much before apply() errors.
CLAMP_TOL = 1e-6


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BlockKernel:
    """Block-constant DiKernel: density value values[i][j] on V^i x V^j."""

    partition: IntervalPartition
    values: np.ndarray
    bound: float = None  # the bound M; defaults to max entry (at least > 1)

    def __post_init__(self):
        v = _readonly(self.values)
        j = self.partition.ncells
        if v.shape != (j, j):
            raise ShapeError(f"values must be {j}x{j}, got {v.shape}")
        if np.any(v < 0):
            raise ContractError("kernel densities must be non-negative")
        object.__setattr__(self, "values", v)
        m = self.bound
        if m is None:
            m = max(float(v.max(initial=0.0)), 1.0 + 1e-9)
        if m <= 1.0:
            raise InvalidArgumentError("bound M must exceed 1")
        if float(v.max(initial=0.0)) > m + 1e-12:
            raise ContractError("kernel entries exceed the stored bound M")
        object.__setattr__(self, "bound", float(m))
        ok, defect = check_row_stochastic(self, BLOCK_ROW_TOL)
        if not ok:
            raise ContractError(
                f"block kernel is not row-stochastic: max row defect {defect:.3e}"
            )

    def to_json(self) -> dict:
        return {
            "type": "block",
            "partition": list(self.partition.breakpoints),
            "values": self.values.tolist(),
        }


@dataclass(frozen=True)
class GridKernel:
    """Midpoint samples: samples[i][j] = W((i + 1/2)/n, (j + 1/2)/n)."""

    n: int
    samples: np.ndarray
    bound: float = None

    def __post_init__(self):
        s = _readonly(self.samples)
        if s.shape != (self.n, self.n):
            raise ShapeError(f"samples must be {self.n}x{self.n}, got {s.shape}")
        if np.any(s < 0):
            raise ContractError("kernel samples must be non-negative")
        object.__setattr__(self, "samples", s)
        m = self.bound
        if m is None:
            m = max(float(s.max(initial=0.0)), 1.0 + 1e-9)
        if m <= 1.0:
            raise InvalidArgumentError("bound M must exceed 1")
        object.__setattr__(self, "bound", float(m))
        ok, defect = check_row_stochastic(self, 10.0 * self.bound / self.n)
        if not ok:
            raise ContractError(
                f"grid kernel rows off by {defect:.3e}, beyond quadrature tolerance"
            )

    def to_json(self) -> dict:
        return {"type": "grid", "n": self.n, "samples": self.samples.tolist()}


Kernel = Union[BlockKernel, GridKernel]


def kernel_from_json(data: dict) -> Kernel:
    if data.get("type") == "block":
        return BlockKernel(
            IntervalPartition(tuple(data["partition"])), np.asarray(data["values"])
        )
    if data.get("type") == "grid":
        return GridKernel(int(data["n"]), np.asarray(data["samples"]))
    raise InvalidArgumentError(f"unknown kernel type {data.get('type')!r}")


@dataclass(frozen=True)
class OpinionFunction:
    """Piecewise-constant or grid-sampled function [0,1] -> [-1, 1]."""

    values: np.ndarray
    partition: IntervalPartition = None
    n: int = None

    def __post_init__(self):
        v = _readonly(self.values)
        object.__setattr__(self, "values", v)
        if (self.partition is None) == (self.n is None):
            raise InvalidArgumentError(
                "exactly one of partition (block) or n (grid) must be given"
            )
        size = self.partition.ncells if self.partition is not None else self.n
        if v.shape != (size,):
            raise ShapeError(f"expected {size} values, got shape {v.shape}")
        if np.any(np.abs(v) > 1.0 + 1e-12):
            raise ContractError("opinions must lie in [-1, 1]")

    @property
    def is_block(self) -> bool:
        return self.partition is not None

    def integral(self) -> float:
        """Integral over [0,1] under the active quadrature."""
        if self.is_block:
            return float(self.partition.weights() @ self.values)
        return float(self.values.sum() / self.n)


@dataclass(frozen=True)
class LipschitzMeta:
    """Piecewise-Lipschitz description: constant theta on K pieces, bound M."""

    theta: float
    pieces: IntervalPartition
    bound: float

    def __post_init__(self):
        if self.theta < 0:
            raise InvalidArgumentError("theta must be >= 0")
        if self.bound <= 1:
            raise InvalidArgumentError("bound M must exceed 1")

    @property
    def k(self) -> int:
        return self.pieces.ncells


def check_row_stochastic(w: Kernel, tol: float) -> tuple[bool, float]:
    """Max row defect |integral of row - 1| and whether it is within tol."""
    if isinstance(w, BlockKernel):
        sums = w.values @ w.partition.weights()
    else:
        sums = w.samples.sum(axis=1) / w.n
    defect = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
    return defect <= tol, defect


def gamma_mixing(w: Kernel) -> float:
    """Uniform lower bound of the kernel (minimum entry / sample)."""
    arr = w.values if isinstance(w, BlockKernel) else w.samples
    return float(arr.min())


def _clamp(values: np.ndarray) -> np.ndarray:
    over = np.max(np.abs(values)) - 1.0
    if over > CLAMP_TOL:
        raise ContractError(
            f"updated opinions exceed [-1,1] by {over:.3e}; kernel row sums are off"
        )
    return np.clip(values, -1.0, 1.0)


def apply(w: Kernel, f: OpinionFunction) -> OpinionFunction:
    """One opinion update: x -> integral of W(x, y) f(y) dy."""
    if isinstance(w, BlockKernel):
        if not f.is_block or f.partition != w.partition:
            raise ShapeError("opinion function must share the kernel's partition")
        out = w.values @ (w.partition.weights() * f.values)
        return OpinionFunction(_clamp(out), partition=w.partition)
    if f.is_block or f.n != w.n:
        raise ShapeError("opinion function must share the kernel's grid size")
    out = w.samples @ f.values / w.n
    return OpinionFunction(_clamp(out), n=w.n)


def iterate(w: Kernel, f0: OpinionFunction, t: int) -> list[OpinionFunction]:
    """Trajectory [f_0, f_1, ..., f_t]."""
    if t < 0:
        raise InvalidArgumentError("t must be >= 0")
    traj = [f0]
    for _ in range(t):
        traj.append(apply(w, traj[-1]))
    return traj


def refine_block(w: BlockKernel, p: IntervalPartition) -> BlockKernel:
    """Re-express a block kernel on a refinement of its own partition."""
    mids = (np.asarray(p.breakpoints[:-1]) + np.asarray(p.breakpoints[1:])) / 2.0
    idx = np.array([w.partition.locate(m) for m in mids])
    return BlockKernel(p, w.values[np.ix_(idx, idx)], bound=w.bound)


def kernel_product(w: BlockKernel, v: BlockKernel) -> BlockKernel:
    """DiKernel product (W * V)(x,y) = integral of W(x,u) V(u,y) du."""
    if w.partition != v.partition:
        r = common_refinement(w.partition, v.partition)
        w, v = refine_block(w, r), refine_block(v, r)
    p = w.partition.weights()
    out = (w.values * p) @ v.values
    return BlockKernel(w.partition, out, bound=max(w.bound, v.bound))


# --------------------------------------------------------------------------
# Analytic catalog
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticKernel:
    """Named analytic kernel with an exact rectangle integral.

    Not a dynamics carrier: sample it onto a grid or discretize it onto a
    partition first.
    """

    name: str
    value: Callable[[float, float], float]
    rect_integral: Callable[[float, float, float, float], float]
    bound: float
    meta: LipschitzMeta = None

    def to_grid(self, n: int) -> GridKernel:
        if n < 1:
            raise InvalidArgumentError("grid size must be >= 1")
        mids = (np.arange(n) + 0.5) / n
        s = np.array([[self.value(x, y) for y in mids] for x in mids])
        return GridKernel(n, s, bound=self.bound)

    def cell_average(self, x0, x1, y0, y1) -> float:
        return self.rect_integral(x0, x1, y0, y1) / ((x1 - x0) * (y1 - y0))


def _tri_area(x0, x1, y0, y1, c):
    """Area of {(x,y) in [x0,x1]x[y0,y1] : x + y <= c}."""

    def g(u):  # area of x + y <= u within the box anchored at (x0, y0)
        a, b = x1 - x0, y1 - y0
        u = u - x0 - y0
        u = min(max(u, 0.0), a + b)
        # integral of min(b, max(0, u - x)) over x in [0, a]
        lo, hi = max(0.0, u - b), min(a, u)
        return u * (hi - lo) - (hi * hi - lo * lo) / 2.0 + b * max(0.0, min(a, u - b))

    return g(c)


def figure3a() -> AnalyticKernel:
    """Banded kernel: value 2 where (x + y) mod 1 is within 1/4 of 0, else 0.

    Row-stochastic, piecewise constant with diagonal discontinuities along
    x + y in {1/4, 3/4, 5/4, 7/4}.
    """

    def value(x, y):
        frac = (x + y) % 1.0
        return 2.0 if (frac < 0.25 or frac >= 0.75) else 0.0

    def rect_integral(x0, x1, y0, y1):
        # Band = union of {x + y in [l, u]} slabs covering [0, 2].
        area = 0.0
        for lo, hi in ((0.0, 0.25), (0.75, 1.25), (1.75, 2.0)):
            area += _tri_area(x0, x1, y0, y1, hi) - _tri_area(x0, x1, y0, y1, lo)
        return 2.0 * area

    meta = LipschitzMeta(theta=2.0, pieces=uniform(4), bound=2.0)
    return AnalyticKernel("figure3a", value, rect_integral, bound=2.0, meta=meta)


def bilinear(a: float) -> AnalyticKernel:
    """Smooth kernel 1 + a(2x-1)(2y-1); row-stochastic for |a| <= 1."""
    if not 0 <= a <= 1:
        raise InvalidArgumentError("bilinear coefficient must be in [0, 1]")

    def value(x, y):
        return 1.0 + a * (2 * x - 1) * (2 * y - 1)

    def rect_integral(x0, x1, y0, y1):
        # Average of a bilinear function over a rectangle is its center value.
        cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        return value(cx, cy) * (x1 - x0) * (y1 - y0)

    meta = LipschitzMeta(theta=4.0 * a, pieces=uniform(1), bound=1.0 + a + 1e-9)
    return AnalyticKernel(f"bilinear:{a}", value, rect_integral, bound=1.0 + a, meta=meta)


def unitype_linear() -> AnalyticKernel:
    """Uni-type kernel W(x, y) = h(y) with density h(y) = 2y."""

    def value(x, y):
        return 2.0 * y

    def rect_integral(x0, x1, y0, y1):
        return (x1 - x0) * (y1 * y1 - y0 * y0)

    meta = LipschitzMeta(theta=2.0, pieces=uniform(1), bound=2.0)
    return AnalyticKernel("unitype2y", value, rect_integral, bound=2.0, meta=meta)


def blend(base: AnalyticKernel, gamma: float) -> AnalyticKernel:
    """Lazy blend (1 - gamma) * base + gamma * 1; gamma-mixing by construction."""
    if not 0 <= gamma <= 1:
        raise InvalidArgumentError("blend weight must be in [0, 1]")

    def value(x, y):
        return (1 - gamma) * base.value(x, y) + gamma

    def rect_integral(x0, x1, y0, y1):
        box = (x1 - x0) * (y1 - y0)
        return (1 - gamma) * base.rect_integral(x0, x1, y0, y1) + gamma * box

    meta = None
    if base.meta is not None:
        meta = LipschitzMeta(
            theta=(1 - gamma) * base.meta.theta,
            pieces=base.meta.pieces,
            bound=max((1 - gamma) * base.meta.bound + gamma, 1.0 + 1e-9),
        )
    return AnalyticKernel(
        f"blend:{base.name}:{gamma}",
        value,
        rect_integral,
        bound=max((1 - gamma) * base.bound + gamma, 1.0 + 1e-9),
        meta=meta,
    )


def catalog(name: str) -> AnalyticKernel:
    """Resolve a catalog name like "figure3a", "bilinear:0.5" or
    "blend:figure3a:0.3"."""
    parts = name.split(":")
    if parts[0] == "figure3a" and len(parts) == 1:
        return figure3a()
    if parts[0] == "bilinear" and len(parts) == 2:
        return bilinear(float(parts[1]))
    if parts[0] == "unitype2y" and len(parts) == 1:
        return unitype_linear()
    if parts[0] == "blend" and len(parts) == 3:
        return blend(catalog(parts[1]), float(parts[2]))
    raise InvalidArgumentError(f"unknown catalog kernel {name!r}")
