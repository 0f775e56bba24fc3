"""Batch command-line front end.

Every subcommand parses its inputs, builds a request model, and calls the
same handler the HTTP service uses; no numerics live here.  Output is
canonical JSON: sorted keys, floats printed with 17 significant digits,
so identical inputs and seed give byte-identical files.

Exit codes: 0 success, 1 contract or input error, 2 non-convergence
(reports are still written).
"""
from __future__ import annotations

import json
import os
import sys

import click
import pydantic

from . import schemas, service
from .errors import DikernelError


# --------------------------------------------------------------------------
# Canonical output
# --------------------------------------------------------------------------


def canonical_json(obj) -> str:
    """JSON with sorted keys and '%.17g' floats, for reproducible files."""
    if isinstance(obj, float):
        return format(obj, ".17g")
    if isinstance(obj, dict):
        items = (
            f"{json.dumps(str(k))}: {canonical_json(v)}" for k, v in sorted(obj.items())
        )
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_json(v) for v in obj) + "]"
    return json.dumps(obj)


def _emit(data: dict, output: str):
    text = canonical_json(data) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Input parsing
# --------------------------------------------------------------------------


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _kernel_arg(value: str):
    """A kernel flag is either a JSON file path or a catalog name."""
    if os.path.exists(value):
        return _load_json(value)
    return value


def _partition_arg(value: str):
    """Returns (breakpoints, cells) from uniform:N, a file, or a list."""
    if value is None:
        return None, None
    if value.startswith("uniform:"):
        return None, int(value.split(":", 1)[1])
    if os.path.exists(value):
        data = _load_json(value)
        return list(data["breakpoints"] if isinstance(data, dict) else data), None
    return [float(x) for x in value.split(",")], None


def _vector_arg(value: str):
    """Comma-separated numbers, or a JSON file holding a list."""
    if os.path.exists(value):
        return list(_load_json(value))
    return [float(x) for x in value.split(",")]


def _run(fn):
    """Handler call with the CLI error-to-exit-code mapping."""
    try:
        return fn()
    except DikernelError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            pydantic.ValidationError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


@click.group()
def main():
    """Continuous DeGroot dynamics on DiKernels."""


@main.command()
@click.option("--matrix", "matrix_path", required=True, help="model JSON file")
@click.option("--partition", "partition_spec", default=None)
@click.option("--output", "-o", default=None)
def lift(matrix_path, partition_spec, output):
    """Lift a weighted DeGroot model to a block kernel."""

    def go():
        data = _load_json(matrix_path)
        bp, cells = _partition_arg(partition_spec)
        if cells is not None:
            bp = [k / cells for k in range(cells + 1)]
        req = schemas.LiftRequest(
            matrix=data["matrix"],
            weights=data["weights"],
            opinions=data.get("opinions"),
            breakpoints=bp,
        )
        return service.handle_lift(req)

    _emit(_run(go).model_dump(exclude_none=True), output)


@main.command()
@click.option("--kernel", "kernel_spec", required=True)
@click.option("--partition", "partition_spec", required=True)
@click.option("--output", "-o", default=None)
def discretize(kernel_spec, partition_spec, output):
    """Block-average a kernel onto a partition."""

    def go():
        bp, cells = _partition_arg(partition_spec)
        req = schemas.DiscretizeRequest(
            kernel=_kernel_arg(kernel_spec), breakpoints=bp, cells=cells
        )
        return service.handle_discretize(req)

    _emit(_run(go).model_dump(exclude_none=True), output)


@main.command()
@click.option("--kernel", "kernel_spec", required=True)
@click.option("--grid", "-n", default=None, type=int, help="grid size for catalog kernels")
@click.option("--opinions", required=True, help="comma list or JSON file")
@click.option("--t", default=10, type=int)
@click.option("--tol", default=1e-10, type=float)
@click.option("--csv", "csv_path", default=None, help="trajectory CSV path (default stdout)")
@click.option("--output", "-o", default=None, help="consensus report JSON path")
def simulate(kernel_spec, grid, opinions, t, tol, csv_path, output):
    """Run the opinion dynamics; emit a trajectory CSV and a report."""

    def go():
        req = schemas.SimulateRequest(
            kernel=_kernel_arg(kernel_spec),
            grid=grid,
            opinions=_vector_arg(opinions),
            t=t,
            tol=tol,
        )
        return service.handle_simulate(req)

    resp = _run(go)
    lines = ["t,cell,value"]
    for step, row in enumerate(resp.trajectory):
        for cell, value in enumerate(row):
            lines.append(f"{step},{cell},{format(value, '.17g')}")
    csv_text = "\n".join(lines) + "\n"
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if output or csv_path:
        _emit(resp.model_dump(exclude_none=True), output)
    if not resp.converged:
        sys.exit(2)


@main.command()
@click.option("--model", "model_path", required=True)
@click.option("--groups", required=True, help="JSON list of index groups")
@click.option("--output", "-o", default=None)
def reduce(model_path, groups, output):
    """Aggregate agents of a DeGroot model into grouped blocks."""

    def go():
        data = _load_json(model_path)
        req = schemas.ReduceRequest(
            matrix=data["matrix"],
            weights=data["weights"],
            opinions=data.get("opinions"),
            groups=json.loads(groups),
        )
        return service.handle_reduce(req)

    _emit(_run(go).model_dump(exclude_none=True), output)


@main.command()
@click.option("--kernel-a", "kernel_a", required=True)
@click.option("--kernel-b", "kernel_b", required=True)
@click.option("--partition", "partition_spec", default=None)
@click.option("--mode", default="auto", type=click.Choice(["auto", "exact", "heuristic"]))
@click.option("--restarts", default=50, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--output", "-o", default=None)
def cutnorm(kernel_a, kernel_b, partition_spec, mode, restarts, seed, output):
    """Cut norm of the difference of two kernels."""

    def go():
        bp, cells = _partition_arg(partition_spec)
        req = schemas.CutNormRequest(
            kernel_a=_kernel_arg(kernel_a),
            kernel_b=_kernel_arg(kernel_b),
            breakpoints=bp,
            cells=cells,
            mode=mode,
            restarts=restarts,
            seed=seed,
        )
        return service.handle_cutnorm(req)

    _emit(_run(go).model_dump(exclude_none=True), output)


@main.command()
@click.option("--kind", required=True,
              type=click.Choice(["one_step", "dynamic", "discounted",
                                 "two_kernel", "partition", "min_size"]))
@click.option("--t", default=None, type=int)
@click.option("--l1", default=None, type=float)
@click.option("--cut", default=None, type=float)
@click.option("--alpha", default=None, type=float)
@click.option("--delta", default=None, type=float)
@click.option("--theta", default=None, type=float)
@click.option("--k", default=None, type=int)
@click.option("--m", default=None, type=float)
@click.option("--n", default=None, type=int)
@click.option("--eta", default=None, type=float)
@click.option("--output", "-o", default=None)
def bounds(kind, t, l1, cut, alpha, delta, theta, k, m, n, eta, output):
    """Quantitative error bounds from the distance reports."""

    def go():
        req = schemas.BoundsRequest(
            kind=kind, t=t, l1=l1, cut=cut, alpha=alpha, delta=delta,
            theta=theta, k=k, m=m, n=n, eta=eta,
        )
        return service.handle_bounds(req)

    _emit(_run(go).model_dump(exclude_none=True), output)


@main.command()
@click.option("--kernel", "kernel_spec", required=True)
@click.option("--grid", "-n", default=None, type=int)
@click.option("--tol", default=1e-12, type=float)
@click.option("--max-iter", default=10_000, type=int)
@click.option("--output", "-o", default=None)
def stationary(kernel_spec, grid, tol, max_iter, output):
    """Stationary density of the adjoint update."""

    def go():
        req = schemas.StationaryRequest(
            kernel=_kernel_arg(kernel_spec), grid=grid, tol=tol, max_iter=max_iter
        )
        return service.handle_stationary(req)

    resp = _run(go)
    _emit(resp.model_dump(exclude_none=True), output)
    if not resp.converged:
        sys.exit(2)


@main.command(name="solve-game")
@click.option("--spec", "spec_path", required=True)
@click.option("--damping", default=0.5, type=float)
@click.option("--tol", default=1e-10, type=float)
@click.option("--max-iter", default=500, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--resolution", default=None, type=int)
@click.option("--output", "-o", default=None)
def solve_game(spec_path, damping, tol, max_iter, seed, resolution, output):
    """Damped best-response iteration for the two-lobby game."""

    def go():
        req = schemas.SolveGameRequest(
            spec=_load_json(spec_path), damping=damping, tol=tol,
            max_iter=max_iter, seed=seed, resolution=resolution,
        )
        return service.handle_solve_game(req)

    resp = _run(go)
    _emit(resp.model_dump(exclude_none=True), output)
    if not resp.converged:
        sys.exit(2)


@main.command(name="verify-nash")
@click.option("--spec", "spec_path", required=True)
@click.option("--profile", "profile_path", required=True,
              help='JSON file {"s1": [...], "s2": [...]}')
@click.option("--seed", default=0, type=int)
@click.option("--resolution", default=None, type=int)
@click.option("--output", "-o", default=None)
def verify_nash(spec_path, profile_path, seed, resolution, output):
    """Best-deviation residuals of a strategy profile."""

    def go():
        profile = _load_json(profile_path)
        req = schemas.VerifyNashRequest(
            spec=_load_json(spec_path), s1=profile["s1"], s2=profile["s2"],
            seed=seed, resolution=resolution,
        )
        return service.handle_verify_nash(req)

    _emit(_run(go).model_dump(exclude_none=True), output)


if __name__ == "__main__":
    main()
