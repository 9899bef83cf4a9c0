"""Simulated human agent and the estimator of their trajectory desire.

The simulated human forms a rest-to-rest quintic desire toward a goal
position; that desire stays internal and reaches the automation only
through observed motion (the estimator) or through negotiation offers.
The estimator fits (goal, duration) of the quintic family to a window
of observations by separable least squares: for a candidate duration
the goal follows from a linear fit, and the duration itself is found by
a bracketed 1-D search on the residual.

The deformation desire is the trajectory-shaped expression of a push:
a smooth displacement bump, zero at both horizon ends, pointing along
the applied force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .trajectory import (
    BoundaryState,
    DisplacementDesire,
    Trajectory,
    golden_section_min,
    quintic_point_to_point,
    quintic_to_horizon,
)

__all__ = [
    "HumanProfile",
    "Observation",
    "EstimatedDesire",
    "human_desire",
    "estimate_desire",
    "deformation_desire",
    "DesireEstimator",
]

_SMOOTHSTEP = lambda s: 10 * s**3 - 15 * s**4 + 6 * s**5  # noqa: E731
_DEGENERATE_SPEED = 1e-6  # m/s


@dataclass(frozen=True)
class HumanProfile:
    """Ground-truth parameters of the simulated human."""

    desired_goal: tuple[float, float]
    desired_duration: float
    compliance: float = 0.5
    noise_std: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.compliance <= 1.0:
            raise ValueError(f"compliance must be in [0, 1], got {self.compliance}")
        if self.desired_duration <= 0:
            raise ValueError("desired_duration must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    def to_dict(self) -> dict:
        return {
            "desired_goal": [float(self.desired_goal[0]), float(self.desired_goal[1])],
            "desired_duration": self.desired_duration,
            "compliance": self.compliance,
            "noise_std": self.noise_std,
        }

    @staticmethod
    def from_dict(data: dict) -> "HumanProfile":
        return HumanProfile(
            desired_goal=tuple(data["desired_goal"]),
            desired_duration=float(data["desired_duration"]),
            compliance=float(data.get("compliance", 0.5)),
            noise_std=float(data.get("noise_std", 0.0)),
        )


@dataclass(frozen=True)
class Observation:
    """One measured sample of the human's behavior."""

    time: float
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    control: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class EstimatedDesire:
    """Estimator output: the reconstructed desire in the planner's family."""

    trajectory: Trajectory
    goal_estimate: tuple[float, float]
    residual: float
    duration_estimate: float
    degenerate: bool = False


def human_desire(profile: HumanProfile, start: BoundaryState, dt: float) -> Trajectory:
    """Ground-truth desire: rest-to-rest quintic to the profile's goal.

    The grid extends to the next dt multiple at or past the desired
    duration, resting at the goal for any remainder.
    """
    horizon = max(2, math.ceil(profile.desired_duration / dt - 1e-9)) * dt
    return quintic_to_horizon(
        start, profile.desired_goal, profile.desired_duration, dt, horizon
    )


def _window_arrays(window: Sequence[Observation]):
    times = np.array([o.time for o in window], dtype=float)
    pos = np.array([o.position for o in window], dtype=float)
    vel = np.array([o.velocity for o in window], dtype=float)
    if len(window) >= 2:
        steps = np.diff(times)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, steps[0]):
            raise ValueError("observation window must be uniformly sampled in time")
    return times, pos, vel


def _fit_goal_for_duration(rel_t: np.ndarray, rel_p: np.ndarray, duration: float):
    """Linear goal fit given the duration; returns (offset per axis, residual)."""
    s = _SMOOTHSTEP(np.clip(rel_t / duration, 0.0, 1.0))
    ss = float(s @ s)
    if ss < 1e-12:
        return None, float(np.sum(rel_p * rel_p))
    beta = (s @ rel_p) / ss
    err = rel_p - np.outer(s, beta)
    return beta, float(np.sum(err * err))


def estimate_desire(
    window: Sequence[Observation],
    dt: float,
    assumed_duration_range: tuple[float, float],
) -> EstimatedDesire:
    """Reconstruct (goal, duration) of a quintic desire from observed motion.

    The window is assumed to start at the onset of the motion, so the
    fitted quintic is anchored at the first observation and starts at
    rest. A window without measurable motion yields a degenerate
    constant estimate at the current position.
    """
    if len(window) < 6:
        raise ValueError(f"observation window needs >= 6 samples, got {len(window)}")
    lo, hi = assumed_duration_range
    if not (0 < lo < hi):
        raise ValueError(f"invalid duration range ({lo}, {hi})")
    times, pos, vel = _window_arrays(window)

    speeds = np.linalg.norm(vel, axis=1)
    travel = np.linalg.norm(pos - pos[0], axis=1)
    if np.all(speeds < _DEGENERATE_SPEED) and np.all(travel < _DEGENERATE_SPEED):
        anchor = tuple(float(x) for x in pos[-1])
        horizon = max(2, round(hi / dt)) * dt
        traj = quintic_to_horizon(BoundaryState(anchor), anchor, hi, dt, horizon)
        return EstimatedDesire(traj, anchor, 0.0, hi, degenerate=True)

    rel_t = times - times[0]
    rel_p = pos - pos[0]

    # coarse grid to land in the right basin, then golden-section refinement
    grid = np.linspace(lo, hi, 129)
    residuals = [_fit_goal_for_duration(rel_t, rel_p, d)[1] for d in grid]
    i_best = int(np.argmin(residuals))
    bracket_lo = grid[max(0, i_best - 1)]
    bracket_hi = grid[min(len(grid) - 1, i_best + 1)]
    d_hat = golden_section_min(
        lambda d: _fit_goal_for_duration(rel_t, rel_p, d)[1],
        bracket_lo,
        bracket_hi,
        tol=1e-12 * max(1.0, hi),
    )
    beta, sq_err = _fit_goal_for_duration(rel_t, rel_p, d_hat)
    if beta is None:
        beta = np.zeros(2)
    goal = tuple(float(x) for x in (pos[0] + beta))
    residual = math.sqrt(sq_err / len(window))

    horizon = max(2, math.ceil(d_hat / dt - 1e-9)) * dt
    traj = quintic_to_horizon(
        BoundaryState(tuple(pos[0])), goal, d_hat, dt, horizon
    )
    return EstimatedDesire(traj, goal, residual, float(d_hat))


class DesireEstimator:
    """Sliding-window online wrapper around :func:`estimate_desire`.

    Push observations as they arrive and re-fit each tick. One writer
    per session; separate sessions use separate instances.
    """

    def __init__(self, dt: float, assumed_duration_range: tuple[float, float],
                 window_size: int = 30):
        if window_size < 6:
            raise ValueError("window_size must be >= 6")
        self.dt = dt
        self.assumed_duration_range = assumed_duration_range
        self.window_size = window_size
        self._window: list[Observation] = []

    def push(self, obs: Observation) -> None:
        self._window.append(obs)
        if len(self._window) > self.window_size:
            self._window.pop(0)

    @property
    def ready(self) -> bool:
        return len(self._window) >= 6

    def estimate(self) -> EstimatedDesire:
        if not self.ready:
            raise ValueError("not enough observations yet")
        return estimate_desire(self._window, self.dt, self.assumed_duration_range)


def deformation_desire(current_ref: Trajectory, force, at_index: int) -> DisplacementDesire:
    """Displacement desire caused by a push at one sample of the reference.

    Returns a compatible trajectory of displacements: exactly zero at
    both horizon ends and rising smoothly to `force` (a 2-vector,
    meters of displacement at unit gain) at `at_index`. Linear in the
    force, so pushes superpose.
    """
    force = np.asarray(force, dtype=float).reshape(2)
    n = current_ref.n_samples
    if not 0 < at_index < n - 1:
        raise ValueError(f"at_index must be interior (0 < i < {n - 1}), got {at_index}")
    dt = current_ref.dt
    t_peak = at_index * dt
    t_end = (n - 1) * dt
    t = np.arange(n) * dt
    bump = np.empty(n)
    rising = t <= t_peak
    bump[rising] = _SMOOTHSTEP(t[rising] / t_peak)
    bump[~rising] = _SMOOTHSTEP((t_end - t[~rising]) / (t_end - t_peak))
    pos = np.outer(bump, force)
    vel = np.gradient(pos, dt, axis=0)
    vel[0] = 0.0
    vel[-1] = 0.0
    return DisplacementDesire(dt, pos, vel)
