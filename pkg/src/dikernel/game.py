"""The two-lobby influence game.

Lobby 1 pushes opinions toward +1, lobby 2 toward -1.  Each lobby spends a
budget on a pointwise influence function; a competition operator turns the
initial opinions plus both efforts into new opinions, which then evolve
under the kernel.  Payoffs are normalized discounted sums of weighted
average opinions.

For uni-type kernels W(x, y) = h(y) with the weighted-contest operator the
best response has a closed water-filling form; the general case falls back
to projected gradient ascent on the strategy grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ContractError,
    InvalidArgumentError,
    NotApplicableError,
    ShapeError,
)
from .kernels import BlockKernel, GridKernel, Kernel, OpinionFunction, gamma_mixing
from .dynamics import adjoint_apply, discounted_utility, stationary_density
from .partition import IntervalPartition
from .transform import discretize_kernel
from .kernels import refine_block

#: Budget feasibility slack.
BUDGET_TOL = 1e-9

WEIGHTED = "weighted"
ADDITIVE = "additive"


def _masses(kernel: Kernel) -> np.ndarray:
    if isinstance(kernel, BlockKernel):
        return kernel.partition.weights()
    return np.full(kernel.n, 1.0 / kernel.n)


@dataclass(frozen=True)
class Strategy:
    """Non-negative influence function with a budget cap."""

    values: np.ndarray
    budget: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if self.budget < 0:
            raise InvalidArgumentError("budget must be non-negative")
        if np.any(v < -1e-12):
            raise ContractError("strategies must be non-negative")
        v = np.maximum(v, 0.0)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def spend(self, masses: np.ndarray) -> float:
        return float(masses @ self.values)


@dataclass(frozen=True)
class GameSpec:
    """Full description of one influence game.

    All pointwise functions (f0, s0, psi1, psi2) live on the kernel's cells.
    """

    kernel: Kernel
    operator: str
    f0: np.ndarray
    s0: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    b1: float
    b2: float
    delta: float
    resolution: int = None

    def __post_init__(self):
        if self.operator not in (WEIGHTED, ADDITIVE):
            raise InvalidArgumentError(f"unknown competition operator {self.operator!r}")
        if not 0 < self.delta < 1:
            raise InvalidArgumentError("delta must lie in (0, 1)")
        if self.b1 < 0 or self.b2 < 0:
            raise InvalidArgumentError("budgets must be non-negative")
        m = _masses(self.kernel)
        size = m.size
        arrays = {}
        for name in ("f0", "s0", "psi1", "psi2"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (size,):
                raise ShapeError(f"{name} must have one value per kernel cell")
            a.setflags(write=False)
            arrays[name] = a
        if np.any(np.abs(arrays["f0"]) > 1.0 + 1e-12):
            raise ContractError("f0 must lie in [-1, 1]")
        if np.min(arrays["s0"]) < 1e-6:
            raise ContractError("s0 must be bounded away from 0 (min 1e-6)")
        for name in ("psi1", "psi2"):
            if np.any(arrays[name] < 0):
                raise ContractError(f"{name} must be non-negative")
            tot = float(m @ arrays[name])
            if abs(tot - 1.0) > 1e-9:
                raise ContractError(f"{name} must integrate to 1, got {tot}")
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @property
    def masses(self) -> np.ndarray:
        return _masses(self.kernel)

    def budget(self, player: int) -> float:
        return self.b1 if player == 1 else self.b2

    def psi(self, player: int) -> np.ndarray:
        return self.psi1 if player == 1 else self.psi2

    def sign(self, player: int) -> int:
        return 1 if player == 1 else -1

    def to_json(self) -> dict:
        out = {
            "kernel": self.kernel.to_json(),
            "operator": self.operator,
            "f0": self.f0.tolist(),
            "s0": self.s0.tolist(),
            "psi1": self.psi1.tolist(),
            "psi2": self.psi2.tolist(),
            "b1": self.b1,
            "b2": self.b2,
            "delta": self.delta,
        }
        if self.resolution is not None:
            out["resolution"] = self.resolution
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GameSpec":
        from .kernels import kernel_from_json

        return cls(
            kernel=kernel_from_json(data["kernel"]),
            operator=data["operator"],
            f0=np.asarray(data["f0"], dtype=float),
            s0=np.asarray(data["s0"], dtype=float),
            psi1=np.asarray(data["psi1"], dtype=float),
            psi2=np.asarray(data["psi2"], dtype=float),
            b1=float(data["b1"]),
            b2=float(data["b2"]),
            delta=float(data["delta"]),
            resolution=int(data["resolution"]) if data.get("resolution") else None,
        )


@dataclass(frozen=True)
class EquilibriumReport:
    s1: Strategy
    s2: Strategy
    u1: float
    u2: float
    residual1: float
    residual2: float
    iterations: int
    converged: bool

    def to_json(self) -> dict:
        return {
            "s1": self.s1.values.tolist(),
            "s2": self.s2.values.tolist(),
            "u1": self.u1,
            "u2": self.u2,
            "residual1": self.residual1,
            "residual2": self.residual2,
            "iterations": self.iterations,
            "converged": self.converged,
        }


# --------------------------------------------------------------------------
# Competition operators
# --------------------------------------------------------------------------


def compete_weighted(f0, s1, s2, s0) -> np.ndarray:
    """Contest form (s1 - s2 + f0 s0) / (s1 + s2 + s0)."""
    f0, s1, s2, s0 = (np.asarray(a, dtype=float) for a in (f0, s1, s2, s0))
    if np.any(s0 <= 0):
        raise ContractError("s0 must be strictly positive")
    out = (s1 - s2 + f0 * s0) / (s1 + s2 + s0)
    return np.clip(out, -1.0, 1.0)


def compete_additive(f0, s1, s2, s0) -> np.ndarray:
    """Additive form f0 + (s1 - s2)/s0, clipped to [-1, 1]."""
    f0, s1, s2, s0 = (np.asarray(a, dtype=float) for a in (f0, s1, s2, s0))
    if np.any(s0 <= 0):
        raise ContractError("s0 must be strictly positive")
    return np.clip(f0 + (s1 - s2) / s0, -1.0, 1.0)


def compete(spec: GameSpec, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    op = compete_weighted if spec.operator == WEIGHTED else compete_additive
    return op(spec.f0, s1, s2, spec.s0)


# --------------------------------------------------------------------------
# Utilities
# --------------------------------------------------------------------------


def _check_feasible(spec: GameSpec, s: Strategy, player: int):
    if s.values.shape != spec.masses.shape:
        raise ShapeError("strategy must live on the kernel's cells")
    if s.spend(spec.masses) > spec.budget(player) + BUDGET_TOL:
        raise ContractError(f"strategy of player {player} exceeds its budget")


def _opinion(spec: GameSpec, values: np.ndarray) -> OpinionFunction:
    if isinstance(spec.kernel, BlockKernel):
        return OpinionFunction(values, partition=spec.kernel.partition)
    return OpinionFunction(values, n=spec.kernel.n)


def lobby_utility(
    spec: GameSpec, s1: Strategy, s2: Strategy, player: int, tol: float = 1e-10
) -> float:
    """Normalized discounted payoff of one lobby under the profile."""
    _check_feasible(spec, s1, 1)
    _check_feasible(spec, s2, 2)
    g = compete(spec, s1.values, s2.values)
    if _is_unitype(spec.kernel):
        # After one update the opinions are the constant integral of h * g,
        # so the discounted sum collapses to delta times that constant.
        h = _unitype_density(spec.kernel)
        f_star = float(spec.masses @ (h * g))
        return spec.sign(player) * spec.delta * f_star
    return discounted_utility(
        spec.kernel, _opinion(spec, g), spec.psi(player), spec.sign(player),
        spec.delta, tol=tol,
    )


def discounted_weight(spec: GameSpec, player: int, tol: float = 1e-12) -> np.ndarray:
    """Density phi with U_i = sign * integral of phi * C(f0, s1, s2).

    phi = (1 - delta) * sum over t >= 1 of delta^t (T*)^t psi_i; the payoff
    is linear in the post-competition opinions, which makes pointwise
    gradients of the utility exact.
    """
    psi = spec.psi(player)
    phi = np.zeros_like(psi)
    cur = psi
    d = 1.0
    horizon = max(1, int(np.ceil(np.log(tol) / np.log(spec.delta))))
    for _ in range(horizon):
        cur = adjoint_apply(spec.kernel, cur)
        d *= spec.delta
        phi += d * cur
    return (1.0 - spec.delta) * phi


# --------------------------------------------------------------------------
# Water-filling best response (uni-type, weighted contest)
# --------------------------------------------------------------------------


def _is_unitype(kernel: Kernel, tol: float = 1e-12) -> bool:
    mat = kernel.values if isinstance(kernel, BlockKernel) else kernel.samples
    return bool(np.max(np.abs(mat - mat[0])) <= tol)


def _unitype_density(kernel: Kernel) -> np.ndarray:
    mat = kernel.values if isinstance(kernel, BlockKernel) else kernel.samples
    return mat[0].copy()


def unitype_best_response(
    h: np.ndarray,
    f_eff: np.ndarray,
    s_eff: np.ndarray,
    budget: float,
    masses: np.ndarray,
) -> tuple[np.ndarray, bool]:
    """Water-filling allocation maximizing the consensus shift.

    Maximizes integral of h * (s + s_eff * f_eff) / (s + s_eff) subject to
    s >= 0 and integral of s = budget.  On the funded support the marginal
    value weight / (s + s_eff)^2 is a constant nu, found by bisection on
    the monotone budget map; weight = h * s_eff * (1 - f_eff).

    Returns (values, no_gain); no_gain is True when nothing can be gained
    (weight identically zero) and the zero strategy is returned instead of
    burning budget.
    """
    h, f_eff, s_eff, masses = (
        np.asarray(a, dtype=float) for a in (h, f_eff, s_eff, masses)
    )
    if budget < 0:
        raise InvalidArgumentError("budget must be non-negative")
    if np.any(h < 0) or np.any(s_eff <= 0) or np.any(np.abs(f_eff) > 1 + 1e-12):
        raise ContractError("need h >= 0, s_eff > 0, |f_eff| <= 1")
    weight = h * s_eff * np.maximum(0.0, 1.0 - f_eff)
    if budget == 0:
        return np.zeros_like(h), False
    if np.max(weight) <= 0.0:
        return np.zeros_like(h), True

    def alloc(nu):
        return np.maximum(0.0, np.sqrt(weight / nu) - s_eff)

    def spend(nu):
        return float(masses @ alloc(nu))

    nu_hi = float(np.max(weight / s_eff**2))  # spend(nu_hi) == 0
    nu_lo = nu_hi
    while spend(nu_lo) < budget:
        nu_lo /= 4.0
    for _ in range(200):
        nu = np.sqrt(nu_lo * nu_hi)
        gap = spend(nu) - budget
        if abs(gap) <= 1e-12 * max(1.0, budget):
            break
        if gap > 0:
            nu_lo = nu
        else:
            nu_hi = nu
    return alloc(nu), False


def two_player_transform(
    f0: np.ndarray, s0: np.ndarray, s_opponent: np.ndarray, player: int
) -> tuple[np.ndarray, np.ndarray]:
    """Fold the opponent's fixed effort into effective (f0, s0).

    The weighted contest then takes the one-player form
    (s + s_eff * f_eff) / (s + s_eff) from the acting player's viewpoint
    (opinions sign-flipped for player 2, who minimizes).
    """
    f0, s0, s_opp = (np.asarray(a, dtype=float) for a in (f0, s0, s_opponent))
    s_eff = s_opp + s0
    if player == 1:
        f_eff = (-s_opp + s0 * f0) / s_eff
    elif player == 2:
        f_eff = (-s_opp + s0 * (-f0)) / s_eff
    else:
        raise InvalidArgumentError("player must be 1 or 2")
    return f_eff, s_eff


def _unitype_br(spec: GameSpec, opponent: Strategy, player: int) -> Strategy:
    h = _unitype_density(spec.kernel)
    f_eff, s_eff = two_player_transform(spec.f0, spec.s0, opponent.values, player)
    values, _ = unitype_best_response(
        h, f_eff, s_eff, spec.budget(player), spec.masses
    )
    return Strategy(values, spec.budget(player))


def solve_unitype_nash(
    spec: GameSpec,
    damping: float = 0.5,
    max_iter: int = 500,
    tol: float = 1e-10,
) -> EquilibriumReport:
    """Damped best-response iteration for uni-type weighted-contest games.

    No convergence guarantee exists in general; on hitting the iteration
    cap the report carries the last iterate with converged=False.
    """
    if spec.operator != WEIGHTED:
        raise NotApplicableError("closed-form best responses need the contest operator")
    if not _is_unitype(spec.kernel):
        raise NotApplicableError("kernel is not uni-type; reduce it first")
    if not 0 < damping <= 1:
        raise InvalidArgumentError("damping must lie in (0, 1]")
    m = spec.masses
    s1 = Strategy(np.full(m.size, spec.b1), spec.b1)
    s2 = Strategy(np.full(m.size, spec.b2), spec.b2)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        br1 = _unitype_br(spec, s2, 1)
        new1 = Strategy((1 - damping) * s1.values + damping * br1.values, spec.b1)
        br2 = _unitype_br(spec, new1, 2)
        new2 = Strategy((1 - damping) * s2.values + damping * br2.values, spec.b2)
        move = float(m @ np.abs(new1.values - s1.values)) + float(
            m @ np.abs(new2.values - s2.values)
        )
        s1, s2 = new1, new2
        if move < tol:
            converged = True
            break
    return EquilibriumReport(
        s1=s1,
        s2=s2,
        u1=lobby_utility(spec, s1, s2, 1),
        u2=lobby_utility(spec, s1, s2, 2),
        residual1=epsilon_residual(spec, s1, s2, 1),
        residual2=epsilon_residual(spec, s1, s2, 2),
        iterations=it,
        converged=converged,
    )


# --------------------------------------------------------------------------
# Residuals and the projected-gradient fallback
# --------------------------------------------------------------------------


def _project_budget(v: np.ndarray, masses: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto {s >= 0, integral of s <= budget}."""
    clipped = np.maximum(v, 0.0)
    if float(masses @ clipped) <= budget:
        return clipped
    lo, hi = 0.0, float(np.max(v / masses)) if np.any(v > 0) else 1.0
    for _ in range(60):
        tau = (lo + hi) / 2.0
        s = np.maximum(0.0, v - tau * masses)
        if float(masses @ s) > budget:
            lo = tau
        else:
            hi = tau
    return np.maximum(0.0, v - hi * masses)


def _utility_gradient(
    spec: GameSpec, phi: np.ndarray, s1: np.ndarray, s2: np.ndarray, player: int
) -> np.ndarray:
    """Pointwise gradient of U_player with respect to its own strategy."""
    if spec.operator == WEIGHTED:
        denom = (s1 + s2 + spec.s0) ** 2
        if player == 1:
            return phi * (2 * s2 + spec.s0 * (1 - spec.f0)) / denom
        return phi * (2 * s1 + spec.s0 * (1 + spec.f0)) / denom
    inner = spec.f0 + (s1 - s2) / spec.s0
    active = (np.abs(inner) < 1.0).astype(float)
    return phi * active / spec.s0


def best_response_gradient(
    spec: GameSpec,
    opponent: Strategy,
    player: int,
    starts: int = 4,
    max_steps: int = 400,
    tol: float = 1e-10,
    seed: int = 0,
) -> tuple[Strategy, float, bool]:
    """Projected gradient ascent over the strategy cells.

    Multi-start with a deterministic seed; the best value found is a lower
    bound on the true best-response payoff.  Returns (strategy, utility,
    converged).
    """
    m = spec.masses
    b = spec.budget(player)
    phi = discounted_weight(spec, player)
    rng = np.random.default_rng(seed)

    def utility(values):
        if player == 1:
            g = compete(spec, values, opponent.values)
        else:
            g = compete(spec, opponent.values, values)
        return float(phi @ (m * g)) * spec.sign(player)

    inits = [np.zeros(m.size), np.full(m.size, b)]
    inits += [_project_budget(rng.random(m.size) * 2 * b, m, b) for _ in range(max(0, starts - 2))]
    best_s, best_u, any_conv = inits[0], -np.inf, False
    for s in inits:
        step = 1.0
        u = utility(s)
        converged = False
        for _ in range(max_steps):
            if player == 1:
                grad = _utility_gradient(spec, phi, s, opponent.values, 1) * m
            else:
                grad = _utility_gradient(spec, phi, opponent.values, s, 2) * m
            grad = grad / m  # gradient of the discrete objective per cell
            new = _project_budget(s + step * grad, m, b)
            new_u = utility(new)
            while new_u < u - 1e-15 and step > 1e-12:
                step /= 2.0
                new = _project_budget(s + step * grad, m, b)
                new_u = utility(new)
            moved = float(m @ np.abs(new - s))
            s, u = new, new_u
            step = min(step * 2.0, 1e6)
            if moved < tol:
                converged = True
                break
        if u > best_u:
            best_s, best_u, any_conv = s, u, converged
    return Strategy(best_s, b), best_u, any_conv


def epsilon_residual(spec: GameSpec, s1: Strategy, s2: Strategy, player: int) -> float:
    """Best unilateral improvement of one player, clipped at zero.

    Exact (up to the bisection tolerance) for uni-type weighted-contest
    games; otherwise a projected-gradient lower bound on the true residual.
    """
    _check_feasible(spec, s1, 1)
    _check_feasible(spec, s2, 2)
    current = lobby_utility(spec, s1, s2, player)
    if spec.operator == WEIGHTED and _is_unitype(spec.kernel):
        br = _unitype_br(spec, s2 if player == 1 else s1, player)
        alt = (
            lobby_utility(spec, br, s2, player)
            if player == 1
            else lobby_utility(spec, s1, br, player)
        )
        return max(0.0, alt - current)
    opponent = s2 if player == 1 else s1
    _, alt, _ = best_response_gradient(spec, opponent, player)
    return max(0.0, alt - current)


def solve_nash(
    spec: GameSpec,
    damping: float = 0.5,
    max_iter: int = 500,
    tol: float = 1e-10,
    seed: int = 0,
) -> EquilibriumReport:
    """Damped best-response iteration for any admissible game.

    Uses the closed-form water-filling responses when the kernel is
    uni-type and the operator is the weighted contest; otherwise each
    response comes from projected gradient ascent.
    """
    if spec.operator == WEIGHTED and _is_unitype(spec.kernel):
        return solve_unitype_nash(spec, damping=damping, max_iter=max_iter, tol=tol)
    if not 0 < damping <= 1:
        raise InvalidArgumentError("damping must lie in (0, 1]")
    m = spec.masses
    s1 = Strategy(np.full(m.size, spec.b1), spec.b1)
    s2 = Strategy(np.full(m.size, spec.b2), spec.b2)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        br1, _, _ = best_response_gradient(spec, s2, 1, starts=2, seed=seed)
        new1 = Strategy((1 - damping) * s1.values + damping * br1.values, spec.b1)
        br2, _, _ = best_response_gradient(spec, new1, 2, starts=2, seed=seed)
        new2 = Strategy((1 - damping) * s2.values + damping * br2.values, spec.b2)
        move = float(m @ np.abs(new1.values - s1.values)) + float(
            m @ np.abs(new2.values - s2.values)
        )
        s1, s2 = new1, new2
        if move < max(tol, 1e-8):
            converged = True
            break
    return EquilibriumReport(
        s1=s1,
        s2=s2,
        u1=lobby_utility(spec, s1, s2, 1),
        u2=lobby_utility(spec, s1, s2, 2),
        residual1=epsilon_residual(spec, s1, s2, 1),
        residual2=epsilon_residual(spec, s1, s2, 2),
        iterations=it,
        converged=converged,
    )


# --------------------------------------------------------------------------
# Game transforms
# --------------------------------------------------------------------------


def discretize_game(spec: GameSpec, v: IntervalPartition) -> GameSpec:
    """Replace the kernel by its discretization; everything else unchanged.

    The coarsened kernel is re-expressed on the original partition so the
    game's pointwise functions stay aligned; v must therefore be a
    coarsening of the kernel's partition.
    """
    if not isinstance(spec.kernel, BlockKernel):
        raise ShapeError("discretize_game needs a block kernel")
    coarse = discretize_kernel(spec.kernel, v)
    if not set(np.round(np.asarray(v.breakpoints), 12)) <= set(
        np.round(np.asarray(spec.kernel.partition.breakpoints), 12)
    ):
        raise ShapeError("partition must coarsen the kernel's partition")
    lifted = refine_block(coarse, spec.kernel.partition)
    return replace(spec, kernel=lifted)


def reduce_to_unitype(spec: GameSpec, tol: float = 1e-12) -> tuple[GameSpec, float]:
    """Swap the kernel for its uni-type consensus density.

    Returns the reduced game and the payoff-gap bound from the geometric
    envelope (alpha = 2, rho = 1 - gamma): (1-d) * 2 d rho / (1 - d rho).
    """
    gamma = gamma_mixing(spec.kernel)
    if gamma <= 0:
        raise NotApplicableError("reduction needs a gamma-mixing kernel (gamma > 0)")
    if _is_unitype(spec.kernel):
        return spec, 0.0
    sd = stationary_density(spec.kernel, tol=tol)
    h = np.tile(sd.density, (sd.density.size, 1))
    if isinstance(spec.kernel, BlockKernel):
        uni = BlockKernel(spec.kernel.partition, h, bound=max(float(h.max()), 1 + 1e-9))
    else:
        uni = GridKernel(spec.kernel.n, h, bound=max(float(h.max()), 1 + 1e-9))
    rho = 1.0 - gamma
    d = spec.delta
    gap = (1.0 - d) * 2.0 * d * rho / (1.0 - d * rho)
    return replace(spec, kernel=uni), gap
