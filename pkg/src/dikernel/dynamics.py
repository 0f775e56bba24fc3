"""Consensus machinery: stationary density, consensus value, utilities.

The stationary density h solves h(y) = integral of W(x, y) h(x) dx.  For a
gamma-mixing kernel the adjoint update is an L1 contraction with factor at
most 1 - gamma (Doeblin), so power iteration from the uniform density
converges geometrically and the opinions converge to the consensus
f* = integral of h * f0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InvalidArgumentError, NonConvergenceError
from .kernels import BlockKernel, GridKernel, Kernel, OpinionFunction, apply, gamma_mixing


def _cell_masses(w: Kernel) -> np.ndarray:
    if isinstance(w, BlockKernel):
        return w.partition.weights()
    return np.full(w.n, 1.0 / w.n)


def adjoint_apply(w: Kernel, h: np.ndarray) -> np.ndarray:
    """One step of the adjoint update h'(y) = integral of W(x,y) h(x) dx."""
    masses = _cell_masses(w)
    mat = w.values if isinstance(w, BlockKernel) else w.samples
    return mat.T @ (masses * h)


@dataclass(frozen=True)
class StationaryDensity:
    """Probability density fixed under the adjoint update."""

    density: np.ndarray
    kernel: Kernel
    residual: float
    rate: float
    iterations: int

    def __post_init__(self):
        h = np.array(self.density, dtype=float)
        if np.any(h < -1e-12):
            raise ContractError("a density must be non-negative")
        total = float(_cell_masses(self.kernel) @ h)
        if abs(total - 1.0) > 1e-10:
            raise ContractError(f"density integrates to {total}, not 1")
        h.setflags(write=False)
        object.__setattr__(self, "density", h)

    def to_json(self) -> dict:
        out = {
            "density": self.density.tolist(),
            "residual": self.residual,
            "rate": self.rate,
            "iterations": self.iterations,
        }
        if isinstance(self.kernel, BlockKernel):
            out["partition"] = list(self.kernel.partition.breakpoints)
        else:
            out["n"] = self.kernel.n
        return out


@dataclass(frozen=True)
class ConsensusReport:
    """Consensus value with the geometric-envelope certificate."""

    value: float
    certified: bool
    gamma: float
    rho: float
    alpha: float
    sup_distances: tuple[float, ...]
    iterations: int

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "certified": self.certified,
            "gamma": self.gamma,
            "rho": self.rho,
            "alpha": self.alpha,
            "sup_distances": list(self.sup_distances),
            "iterations": self.iterations,
        }


def stationary_density(
    w: Kernel, tol: float = 1e-12, max_iter: int = 10_000
) -> StationaryDensity:
    """Power iteration on the adjoint update, starting from uniform.

    Convergence is guaranteed when gamma_mixing(w) > 0; kernels with
    gamma = 0 may still converge (aperiodic chains) or may not, in which
    case a NonConvergenceError carries the last iterate.
    """
    masses = _cell_masses(w)
    h = np.ones_like(masses)
    residual = np.inf
    for it in range(1, max_iter + 1):
        h_new = adjoint_apply(w, h)
        h_new = h_new / float(masses @ h_new)
        residual = float(masses @ np.abs(h_new - h))
        h = h_new
        if residual <= tol:
            return StationaryDensity(h, w, residual, 1.0 - gamma_mixing(w), it)
    raise NonConvergenceError(
        f"stationary density did not reach tol={tol} in {max_iter} iterations",
        partial=StationaryDensity(h, w, residual, 1.0 - gamma_mixing(w), max_iter),
    )


def consensus(
    w: Kernel, f0: OpinionFunction, tol: float = 1e-10, max_iter: int = 10_000
) -> ConsensusReport:
    """Consensus value f* = integral of h * f0, with trajectory audit."""
    sd = stationary_density(w, tol=min(tol, 1e-12), max_iter=max_iter)
    masses = _cell_masses(w)
    f_star = float(masses @ (sd.density * f0.values))
    gamma = gamma_mixing(w)
    sup_distances = []
    f = f0
    for it in range(max_iter):
        d = float(np.max(np.abs(f.values - f_star)))
        sup_distances.append(d)
        if it > 0 and float(np.max(np.abs(f.values - prev.values))) <= tol:
            break
        prev = f
        f = apply(w, f)
    else:
        raise NonConvergenceError(
            "opinions did not settle within the iteration cap",
            partial=ConsensusReport(
                f_star, gamma > 0, gamma, 1.0 - gamma, 2.0,
                tuple(sup_distances), max_iter,
            ),
        )
    return ConsensusReport(
        value=f_star,
        certified=gamma > 0,
        gamma=gamma,
        rho=1.0 - gamma,
        alpha=2.0,
        sup_distances=tuple(sup_distances),
        iterations=len(sup_distances),
    )


def _check_weight_function(psi: OpinionFunction | np.ndarray, masses: np.ndarray):
    vals = psi.values if isinstance(psi, OpinionFunction) else np.asarray(psi, float)
    if np.any(vals < 0):
        raise ContractError("weight function psi must be non-negative")
    total = float(masses @ vals)
    if abs(total - 1.0) > 1e-9:
        raise ContractError(f"psi must integrate to 1, got {total}")
    return vals


def stage_utility(f: OpinionFunction, psi, sign: int) -> float:
    """sign * integral of f * psi, with psi >= 0 and integral psi = 1."""
    if sign not in (1, -1):
        raise InvalidArgumentError("sign must be +1 or -1")
    masses = (
        f.partition.weights() if f.is_block else np.full(f.n, 1.0 / f.n)
    )
    vals = _check_weight_function(psi, masses)
    return sign * float(masses @ (f.values * vals))


def discounted_utility(
    w: Kernel,
    f_initial: OpinionFunction,
    psi,
    sign: int,
    delta: float,
    tol: float = 1e-10,
) -> float:
    """(1 - delta) * sum over t >= 1 of delta^t * u(f_t).

    Truncated where the geometric tail drops below tol (|u| <= 1 because
    opinions live in [-1, 1] and psi integrates to 1).
    """
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    horizon = max(1, int(np.ceil(np.log(tol) / np.log(delta))) - 1)
    total = 0.0
    f = f_initial
    d = 1.0
    for _ in range(1, horizon + 1):
        f = apply(w, f)
        d *= delta
        total += d * stage_utility(f, psi, sign)
    return (1.0 - delta) * total
