"""Automation-side trajectory planning from a weighted cost function.

The planner minimizes a convex finite-difference objective over sample
positions:

    w_jerk * sum ||d3 p / dt^3||^2  +  w_effort * sum ||d2 p / dt^2||^2
    + w_goal * ||p_end - goal||^2   (+ w_time * T)

The start state (position, velocity, acceleration) is clamped through
the first three samples and the final three samples are tied together,
so the planned motion comes to rest at its endpoint; the terminal
position itself is pulled toward the goal by w_goal. With w_jerk only
and w_goal large this reproduces the classical minimum-jerk quintic.

A positive w_time triggers an outer golden-section search for the
execution time on the dt grid, bounded above by the configured horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .trajectory import (
    BoundaryState,
    Trajectory,
    golden_section_min,
    _check_divisible,
)

__all__ = ["CostSpec", "PlannerOutput", "plan", "evaluate_cost"]

_MIN_SAMPLES = 8  # 3 clamped start samples + 3 tied end samples + slack


@dataclass(frozen=True)
class CostSpec:
    """Weights and targets of the automation's planning objective."""

    goal: tuple[float, float]
    horizon: float
    w_jerk: float = 1.0
    w_goal: float = 1e6
    w_effort: float = 0.0
    w_time: float = 0.0

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        for name in ("w_jerk", "w_goal", "w_effort", "w_time"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.w_jerk == 0 and self.w_goal == 0 and self.w_effort == 0 and self.w_time == 0:
            raise ValueError("at least one weight must be positive")

    def to_dict(self) -> dict:
        return {
            "goal": [float(self.goal[0]), float(self.goal[1])],
            "horizon": self.horizon,
            "w_jerk": self.w_jerk,
            "w_goal": self.w_goal,
            "w_effort": self.w_effort,
            "w_time": self.w_time,
        }

    @staticmethod
    def from_dict(data: dict) -> "CostSpec":
        return CostSpec(
            goal=tuple(data["goal"]),
            horizon=float(data["horizon"]),
            w_jerk=float(data.get("w_jerk", 1.0)),
            w_goal=float(data.get("w_goal", 1e6)),
            w_effort=float(data.get("w_effort", 0.0)),
            w_time=float(data.get("w_time", 0.0)),
        )


@dataclass(frozen=True)
class PlannerOutput:
    trajectory: Trajectory
    cost: float


def _difference_matrix(n: int, order: int) -> np.ndarray:
    """Rows of order-th finite differences over n samples."""
    d = np.eye(n)
    for _ in range(order):
        d = d[1:] - d[:-1]
    return d


def _assemble(cost: CostSpec, start: BoundaryState, dt: float, n: int):
    """Quadratic form (Q, lin) over all n samples and the free-variable map.

    Returns (Q, lin, M, b) with positions p = M z + b per axis, where z
    holds the free interior samples plus the common terminal value.
    """
    d3 = _difference_matrix(n, 3) / dt**3
    d2 = _difference_matrix(n, 2) / dt**2
    # dt factors approximate the time integrals of squared jerk/acceleration,
    # keeping the weights meaningful independently of the sample resolution
    Q = cost.w_jerk * dt * (d3.T @ d3) + cost.w_effort * dt * (d2.T @ d2)
    Q[-1, -1] += cost.w_goal

    n_free = n - 6  # samples 3 .. n-4 plus the tied terminal value
    M = np.zeros((n, n_free + 1))
    for i in range(n_free):
        M[3 + i, i] = 1.0
    M[n - 3 :, n_free] = 1.0  # p[-3] = p[-2] = p[-1]: rest at the end
    return Q, M


def _fixed_prefix(start: BoundaryState, dt: float) -> np.ndarray:
    """First three samples encoding the clamped start state (per axis rows)."""
    p0 = start.p
    p1 = start.p + start.v * dt + 0.5 * start.a * dt * dt
    p2 = start.p + 2 * start.v * dt + 2.0 * start.a * dt * dt
    return np.stack([p0, p1, p2])


def _solve_axis(Q, M, b_full, goal_ax, w_goal):
    lin = np.zeros(Q.shape[0])
    lin[-1] = -2.0 * w_goal * goal_ax
    A = M.T @ Q @ M
    rhs = -M.T @ (Q @ b_full + 0.5 * lin)
    try:
        z = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("planning system is singular; add a smoothness weight") from exc
    scale = max(1.0, float(np.max(np.abs(rhs))))
    residual = float(np.max(np.abs(A @ z - rhs))) / scale
    return M @ z + b_full, residual


def _plan_fixed_horizon(start: BoundaryState, cost: CostSpec, dt: float, T: float) -> Trajectory:
    n = _check_divisible(T, dt) + 1
    if n < _MIN_SAMPLES:
        raise ValueError(f"horizon {T} too short for dt={dt}: needs >= {_MIN_SAMPLES} samples")
    if cost.w_jerk == 0 and cost.w_effort == 0:
        raise ValueError("planning system is singular; add a smoothness weight")
    Q, M = _assemble(cost, start, dt, n)
    prefix = _fixed_prefix(start, dt)
    pos = np.empty((n, 2))
    for ax in range(2):
        b_full = np.zeros(n)
        b_full[:3] = prefix[:, ax]
        p, _ = _solve_axis(Q, M, b_full, cost.goal[ax], cost.w_goal)
        pos[:, ax] = p
    vel = np.empty_like(pos)
    vel[0] = start.v
    vel[-1] = 0.0
    vel[1:-1] = (pos[2:] - pos[:-2]) / (2.0 * dt)
    return Trajectory(dt, pos, vel)


def optimality_residual(start: BoundaryState, cost: CostSpec, dt: float) -> float:
    """Max normalized residual of the normal equations at the planned solution."""
    n = _check_divisible(cost.horizon, dt) + 1
    Q, M = _assemble(cost, start, dt, n)
    prefix = _fixed_prefix(start, dt)
    worst = 0.0
    for ax in range(2):
        b_full = np.zeros(n)
        b_full[:3] = prefix[:, ax]
        _, res = _solve_axis(Q, M, b_full, cost.goal[ax], cost.w_goal)
        worst = max(worst, res)
    return worst


def evaluate_cost(t: Trajectory, cost: CostSpec) -> float:
    """Value of the planning objective on an arbitrary trajectory.

    Additive in the weight terms; jerk and acceleration come from finite
    differences of the position samples, so this is exactly the function
    the planner minimizes (plus the w_time term, linear in duration).
    """
    dt = t.dt
    p = t.positions
    total = 0.0
    if cost.w_jerk > 0:
        jerk = (p[3:] - 3 * p[2:-1] + 3 * p[1:-2] - p[:-3]) / dt**3
        total += cost.w_jerk * dt * float(np.sum(jerk * jerk))
    if cost.w_effort > 0:
        acc = (p[2:] - 2 * p[1:-1] + p[:-2]) / dt**2
        total += cost.w_effort * dt * float(np.sum(acc * acc))
    if cost.w_goal > 0:
        dg = p[-1] - np.asarray(cost.goal, dtype=float)
        total += cost.w_goal * float(dg @ dg)
    total += cost.w_time * t.duration
    return total


def plan(
    start: BoundaryState,
    cost: CostSpec,
    dt: float,
    t_bounds: Optional[tuple[float, float]] = None,
) -> PlannerOutput:
    """Plan the automation's desired trajectory for the configured horizon.

    With w_time == 0 the horizon is used as-is and the convex problem is
    solved by a single linear solve. With w_time > 0 the execution time
    is chosen by golden-section search over the dt grid within t_bounds
    (default [8*dt, horizon]).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if cost.w_time == 0:
        traj = _plan_fixed_horizon(start, cost, dt, cost.horizon)
        return PlannerOutput(traj, evaluate_cost(traj, cost))

    lo, hi = t_bounds if t_bounds is not None else (_MIN_SAMPLES * dt, cost.horizon)
    lo = max(lo, _MIN_SAMPLES * dt)
    if hi < lo:
        raise ValueError(f"horizon {cost.horizon} too short for a timed search")
    cache: dict[int, float] = {}

    def cost_at(T_raw: float) -> float:
        n_int = max(_MIN_SAMPLES - 1, round(T_raw / dt))
        if n_int not in cache:
            traj = _plan_fixed_horizon(start, cost, dt, n_int * dt)
            cache[n_int] = evaluate_cost(traj, cost)
        return cache[n_int]

    t_best = golden_section_min(cost_at, lo, hi, tol=dt)
    n_best = max(_MIN_SAMPLES - 1, round(t_best / dt))
    best = min(cache.items(), key=lambda kv: (kv[1], abs(kv[0] - n_best)))
    traj = _plan_fixed_horizon(start, cost, dt, best[0] * dt)
    return PlannerOutput(traj, evaluate_cost(traj, cost))
