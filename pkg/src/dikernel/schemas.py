"""Request and response models for the service endpoints.

Kernels travel as their JSON dicts ({"type": "block", ...} or
{"type": "grid", ...}) or as catalog names like "figure3a"; validation of
the numeric content happens in the core library, not here.
"""
from __future__ import annotations

from typing import Optional, Union

from pydantic import BaseModel, Field

KernelSpec = Union[dict, str]


class LiftRequest(BaseModel):
    matrix: list[list[float]]
    weights: list[float]
    opinions: Optional[list[float]] = None
    breakpoints: Optional[list[float]] = None


class LiftResponse(BaseModel):
    kernel: dict
    opinions: list[float]


class DiscretizeRequest(BaseModel):
    kernel: KernelSpec
    breakpoints: Optional[list[float]] = None
    cells: Optional[int] = Field(default=None, description="uniform partition size")


class DiscretizeResponse(BaseModel):
    kernel: dict


class SimulateRequest(BaseModel):
    kernel: KernelSpec
    grid: Optional[int] = Field(default=None, description="grid size for catalog kernels")
    opinions: list[float]
    t: int = 10
    tol: float = 1e-10
    with_consensus: bool = True


class SimulateResponse(BaseModel):
    trajectory: list[list[float]]
    consensus: Optional[dict] = None
    converged: bool = True


class ReduceRequest(BaseModel):
    matrix: list[list[float]]
    weights: list[float]
    opinions: Optional[list[float]] = None
    groups: list[list[int]]


class ReduceResponse(BaseModel):
    matrix: list[list[float]]
    weights: list[float]


class CutNormRequest(BaseModel):
    kernel_a: KernelSpec
    kernel_b: KernelSpec
    breakpoints: Optional[list[float]] = None
    cells: Optional[int] = None
    mode: str = Field(default="auto", description="auto, exact or heuristic")
    restarts: int = 50
    seed: int = 0


class CutNormResponse(BaseModel):
    value: float
    rows: list[int]
    cols: list[int]
    mode: str


class BoundsRequest(BaseModel):
    kind: str
    t: Optional[int] = None
    l1: Optional[float] = None
    cut: Optional[float] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    theta: Optional[float] = None
    k: Optional[int] = None
    m: Optional[float] = None
    n: Optional[int] = None
    eta: Optional[float] = None


class BoundsResponse(BaseModel):
    bound: float
    kind: str
    inputs: dict


class StationaryRequest(BaseModel):
    kernel: KernelSpec
    grid: Optional[int] = None
    tol: float = 1e-12
    max_iter: int = 10_000


class StationaryResponse(BaseModel):
    density: list[float]
    residual: float
    rate: float
    iterations: int
    converged: bool = True


class SolveGameRequest(BaseModel):
    spec: dict
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 500
    seed: int = 0
    resolution: Optional[int] = None


class SolveGameResponse(BaseModel):
    s1: list[float]
    s2: list[float]
    u1: float
    u2: float
    residual1: float
    residual2: float
    iterations: int
    converged: bool


class VerifyNashRequest(BaseModel):
    spec: dict
    s1: list[float]
    s2: list[float]
    seed: int = 0
    resolution: Optional[int] = None


class VerifyNashResponse(BaseModel):
    residual1: float
    residual2: float
    u1: float
    u2: float


class ErrorResponse(BaseModel):
    error: str
    message: str
