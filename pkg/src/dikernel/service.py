"""HTTP service exposing the library operations.

Each endpoint is a thin handler: decode the request model, call the
library, encode the response model.  The CLI reuses the same handlers
in-process, so the numerics live in exactly one place.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import dynamics, game, kernels, metrics, transform
from .errors import DikernelError, InvalidArgumentError, NonConvergenceError
from .kernels import AnalyticKernel, BlockKernel, GridKernel, OpinionFunction
from .partition import IntervalPartition, from_weights, uniform
from .schemas import (
    BoundsRequest,
    BoundsResponse,
    CutNormRequest,
    CutNormResponse,
    DiscretizeRequest,
    DiscretizeResponse,
    LiftRequest,
    LiftResponse,
    ReduceRequest,
    ReduceResponse,
    SimulateRequest,
    SimulateResponse,
    SolveGameRequest,
    SolveGameResponse,
    StationaryRequest,
    StationaryResponse,
    VerifyNashRequest,
    VerifyNashResponse,
)


def _resolve_kernel(spec, grid: int = None):
    """Kernel dict -> carrier; catalog name -> analytic (or grid sample)."""
    if isinstance(spec, dict):
        return kernels.kernel_from_json(spec)
    analytic = kernels.catalog(spec)
    if grid is not None:
        return analytic.to_grid(grid)
    return analytic


def _resolve_partition(breakpoints, cells) -> IntervalPartition:
    if breakpoints is not None:
        return IntervalPartition(tuple(breakpoints))
    if cells is not None:
        return uniform(cells)
    raise InvalidArgumentError("a partition is required (breakpoints or cells)")


def handle_lift(req: LiftRequest) -> LiftResponse:
    model = transform.WeightedDeGrootModel(
        np.asarray(req.matrix), np.asarray(req.weights),
        np.asarray(req.opinions) if req.opinions is not None else None,
    )
    p = (
        IntervalPartition(tuple(req.breakpoints))
        if req.breakpoints is not None
        else transform.default_partition(model)
    )
    kernel, f0 = transform.lift(model, p)
    return LiftResponse(kernel=kernel.to_json(), opinions=f0.values.tolist())


def handle_discretize(req: DiscretizeRequest) -> DiscretizeResponse:
    w = _resolve_kernel(req.kernel)
    v = _resolve_partition(req.breakpoints, req.cells)
    return DiscretizeResponse(kernel=transform.discretize_kernel(w, v).to_json())


def handle_simulate(req: SimulateRequest) -> SimulateResponse:
    w = _resolve_kernel(req.kernel, grid=req.grid)
    if isinstance(w, AnalyticKernel):
        raise InvalidArgumentError("catalog kernels need a grid size to simulate")
    f0 = (
        OpinionFunction(np.asarray(req.opinions), partition=w.partition)
        if isinstance(w, BlockKernel)
        else OpinionFunction(np.asarray(req.opinions), n=w.n)
    )
    traj = kernels.iterate(w, f0, req.t)
    out = [f.values.tolist() for f in traj]
    consensus_json, converged = None, True
    if req.with_consensus:
        try:
            consensus_json = dynamics.consensus(w, f0, tol=req.tol).to_json()
        except NonConvergenceError as exc:
            converged = False
            if exc.partial is not None:
                consensus_json = exc.partial.to_json()
    return SimulateResponse(trajectory=out, consensus=consensus_json, converged=converged)


def handle_reduce(req: ReduceRequest) -> ReduceResponse:
    model = transform.WeightedDeGrootModel(
        np.asarray(req.matrix), np.asarray(req.weights),
        np.asarray(req.opinions) if req.opinions is not None else None,
    )
    small = transform.reduce_dimension(model, [list(g) for g in req.groups])
    return ReduceResponse(matrix=small.matrix.tolist(), weights=small.weights.tolist())


def _as_block(w, p: IntervalPartition = None) -> BlockKernel:
    if isinstance(w, BlockKernel):
        return w
    if isinstance(w, GridKernel):
        return BlockKernel(uniform(w.n), w.samples, bound=w.bound)
    return transform.discretize_kernel(w, p)


def handle_cutnorm(req: CutNormRequest) -> CutNormResponse:
    p = None
    if req.breakpoints is not None or req.cells is not None:
        p = _resolve_partition(req.breakpoints, req.cells)
    a = _resolve_kernel(req.kernel_a)
    b = _resolve_kernel(req.kernel_b)
    if p is None and (isinstance(a, AnalyticKernel) or isinstance(b, AnalyticKernel)):
        raise InvalidArgumentError("catalog kernels need a partition for cut norms")
    diff = metrics.block_difference(_as_block(a, p), _as_block(b, p))
    mode = req.mode
    if mode == "auto":
        mode = (
            "exact"
            if diff.partition.ncells <= metrics.CUT_NORM_EXACT_MAX_CELLS
            else "heuristic"
        )
    if mode == "exact":
        value, rows, cols = metrics.cut_norm_exact(diff)
    elif mode == "heuristic":
        value, rows, cols = metrics.cut_norm_heuristic(
            diff, restarts=req.restarts, seed=req.seed
        )
    else:
        raise InvalidArgumentError(f"unknown cut norm mode {req.mode!r}")
    return CutNormResponse(
        value=value, rows=[int(i) for i in rows], cols=[int(i) for i in cols], mode=mode
    )


def _require(req: BoundsRequest, *names):
    vals = []
    for name in names:
        v = getattr(req, name)
        if v is None:
            raise InvalidArgumentError(f"bound kind {req.kind!r} needs --{name}")
        vals.append(v)
    return vals


def handle_bounds(req: BoundsRequest) -> BoundsResponse:
    kind = req.kind
    if kind == "one_step":
        l1, cut = _require(req, "l1", "cut")
        report = metrics.bound_one_step(l1, cut)
    elif kind == "dynamic":
        t, cut = _require(req, "t", "cut")
        report = metrics.bound_dynamic(t, cut)
    elif kind == "discounted":
        alpha, delta, cut = _require(req, "alpha", "delta", "cut")
        report = metrics.bound_discounted(alpha, delta, cut)
    elif kind == "two_kernel":
        alpha, delta, l1, cut = _require(req, "alpha", "delta", "l1", "cut")
        report = metrics.bound_two_kernel_discounted(alpha, delta, l1, cut)
    elif kind == "partition":
        theta, k, m, n = _require(req, "theta", "k", "m", "n")
        meta = kernels.LipschitzMeta(theta, uniform(k), m)
        report = metrics.bound_partition(meta, n)
    elif kind == "min_size":
        eta, theta, k, m = _require(req, "eta", "theta", "k", "m")
        meta = kernels.LipschitzMeta(theta, uniform(k), m)
        n0 = metrics.min_partition_size(eta, meta)
        report = metrics.BoundReport(
            float(n0), "min_size", {"eta": eta, "theta": theta, "k": k, "m": m}
        )
    else:
        raise InvalidArgumentError(f"unknown bound kind {kind!r}")
    return BoundsResponse(bound=report.bound, kind=report.kind, inputs=report.inputs)


def handle_stationary(req: StationaryRequest) -> StationaryResponse:
    w = _resolve_kernel(req.kernel, grid=req.grid)
    if isinstance(w, AnalyticKernel):
        raise InvalidArgumentError("catalog kernels need a grid size")
    try:
        sd = dynamics.stationary_density(w, tol=req.tol, max_iter=req.max_iter)
        converged = True
    except NonConvergenceError as exc:
        sd = exc.partial
        converged = False
    return StationaryResponse(
        density=sd.density.tolist(),
        residual=sd.residual,
        rate=sd.rate,
        iterations=sd.iterations,
        converged=converged,
    )


def _game_spec(data: dict, resolution: int = None) -> game.GameSpec:
    data = dict(data)
    if isinstance(data.get("kernel"), str):
        res = resolution or data.get("resolution") or 64
        data["kernel"] = kernels.catalog(data["kernel"]).to_grid(int(res)).to_json()
        data.setdefault("resolution", int(res))
    return game.GameSpec.from_json(data)


def handle_solve_game(req: SolveGameRequest) -> SolveGameResponse:
    spec = _game_spec(req.spec, req.resolution)
    report = game.solve_nash(
        spec, damping=req.damping, max_iter=req.max_iter, tol=req.tol, seed=req.seed
    )
    return SolveGameResponse(**report.to_json())


def handle_verify_nash(req: VerifyNashRequest) -> VerifyNashResponse:
    spec = _game_spec(req.spec, req.resolution)
    s1 = game.Strategy(np.asarray(req.s1), spec.b1)
    s2 = game.Strategy(np.asarray(req.s2), spec.b2)
    return VerifyNashResponse(
        residual1=game.epsilon_residual(spec, s1, s2, 1),
        residual2=game.epsilon_residual(spec, s1, s2, 2),
        u1=game.lobby_utility(spec, s1, s2, 1),
        u2=game.lobby_utility(spec, s1, s2, 2),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="dikernel", version="0.1.0")

    @app.exception_handler(DikernelError)
    async def _domain_error(request, exc):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.post("/lift", response_model=LiftResponse)
    def lift(req: LiftRequest):
        return handle_lift(req)

    @app.post("/discretize", response_model=DiscretizeResponse)
    def discretize(req: DiscretizeRequest):
        return handle_discretize(req)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        return handle_simulate(req)

    @app.post("/reduce", response_model=ReduceResponse)
    def reduce(req: ReduceRequest):
        return handle_reduce(req)

    @app.post("/cutnorm", response_model=CutNormResponse)
    def cutnorm(req: CutNormRequest):
        return handle_cutnorm(req)

    @app.post("/bounds", response_model=BoundsResponse)
    def bounds(req: BoundsRequest):
        return handle_bounds(req)

    @app.post("/stationary", response_model=StationaryResponse)
    def stationary(req: StationaryRequest):
        return handle_stationary(req)

    @app.post("/solve-game", response_model=SolveGameResponse)
    def solve_game(req: SolveGameRequest):
        return handle_solve_game(req)

    @app.post("/verify-nash", response_model=VerifyNashResponse)
    def verify_nash(req: VerifyNashRequest):
        return handle_verify_nash(req)

    return app


app = create_app()
