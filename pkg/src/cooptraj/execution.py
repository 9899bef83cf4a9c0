"""Coupled-plant execution of two (possibly differing) references.

The plant is a planar double integrator driven by the sum of both
agents' control inputs. Each agent runs a PD tracking controller
against its own reference trajectory; once a reference ends its final
sample is held, so a persistent reference mismatch settles into a
stationary tug-of-war where the inputs cancel: the plant rests at the
midpoint of the references while both agents keep pushing.

The per-tick conflict metric is max(0, -u_H . u_A): zero whenever the
inputs do not oppose, and equal to ||u||^2 at perfect opposition.
Integration is semi-implicit Euler (velocity first), so equal inputs
and equal references reproduce bit-identical traces across runs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SimulationDiverged
from .trajectory import Trajectory

__all__ = ["Plant", "Controller", "ExecutionTrace", "simulate", "conflict_report"]

_CSV_HEADER = "t,px,py,vx,vy,uHx,uHy,uAx,uAy,conflict"


@dataclass(frozen=True)
class Plant:
    """Double integrator: acceleration equals the summed control inputs."""

    position: tuple[float, float] = (0.0, 0.0)
    velocity: tuple[float, float] = (0.0, 0.0)
    dt_sim: float = 0.01

    def __post_init__(self):
        if self.dt_sim <= 0:
            raise ValueError("dt_sim must be positive")


@dataclass(frozen=True)
class Controller:
    """PD tracker: u = -kp (p - p_ref(t)) - kd (v - v_ref(t))."""

    kp: float
    kd: float
    reference: Trajectory
    u_max: Optional[float] = None

    def __post_init__(self):
        if self.kp <= 0 or self.kd <= 0:
            raise ValueError("controller gains must be positive")
        if self.u_max is not None and self.u_max <= 0:
            raise ValueError("u_max must be positive when set")

    def control(self, t: float, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        p_ref, v_ref = self.reference.state_at(t)
        u = -self.kp * (p - p_ref) - self.kd * (v - v_ref)
        if self.u_max is not None:
            norm = float(np.linalg.norm(u))
            if norm > self.u_max:
                u = u * (self.u_max / norm)
        return u


@dataclass
class ExecutionTrace:
    """Per-tick record of state, inputs and conflict, plus aggregates."""

    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    u_h: np.ndarray
    u_a: np.ndarray
    conflict: np.ndarray
    ref_h: np.ndarray
    ref_a: np.ndarray
    dt_sim: float

    @property
    def n_ticks(self) -> int:
        return len(self.t)

    def steady_state_slice(self) -> slice:
        """The trailing 10% of ticks (at least one)."""
        tail = max(1, self.n_ticks // 10)
        return slice(self.n_ticks - tail, self.n_ticks)

    def to_csv(self) -> str:
        """Fixed-header CSV; floats use shortest round-trip formatting."""
        out = io.StringIO()
        out.write(_CSV_HEADER + "\n")
        for k in range(self.n_ticks):
            row = (
                self.t[k],
                self.positions[k, 0], self.positions[k, 1],
                self.velocities[k, 0], self.velocities[k, 1],
                self.u_h[k, 0], self.u_h[k, 1],
                self.u_a[k, 0], self.u_a[k, 1],
                self.conflict[k],
            )
            out.write(",".join(repr(float(x)) for x in row) + "\n")
        return out.getvalue()


def simulate(
    plant: Plant, ctrl_h: Controller, ctrl_a: Controller, duration: float
) -> ExecutionTrace:
    """Run both controllers on the shared plant for `duration` seconds.

    The trace records the state and inputs at every tick including t=0;
    a non-finite state aborts with the failing tick index.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    dt = plant.dt_sim
    n = round(duration / dt) + 1
    t = np.arange(n) * dt
    pos = np.empty((n, 2))
    vel = np.empty((n, 2))
    u_h = np.empty((n, 2))
    u_a = np.empty((n, 2))
    conflict = np.empty(n)
    ref_h = np.empty((n, 2))
    ref_a = np.empty((n, 2))

    p = np.array(plant.position, dtype=float)
    v = np.array(plant.velocity, dtype=float)
    for k in range(n):
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise SimulationDiverged(k)
        uh = ctrl_h.control(t[k], p, v)
        ua = ctrl_a.control(t[k], p, v)
        pos[k], vel[k] = p, v
        u_h[k], u_a[k] = uh, ua
        conflict[k] = max(0.0, -float(uh @ ua))
        ref_h[k] = ctrl_h.reference.state_at(t[k])[0]
        ref_a[k] = ctrl_a.reference.state_at(t[k])[0]
        # semi-implicit Euler, velocity first
        v = v + dt * (uh + ua)
        p = p + dt * v
    return ExecutionTrace(t, pos, vel, u_h, u_a, conflict, ref_h, ref_a, dt)


def conflict_report(trace: ExecutionTrace) -> dict:
    """Aggregate conflict, control energy and tracking quality."""
    ss = trace.steady_state_slice()
    dt = trace.dt_sim
    report = {
        "mean_conflict": float(np.mean(trace.conflict)),
        "max_conflict": float(np.max(trace.conflict)),
        "steady_state_conflict": float(np.mean(trace.conflict[ss])),
        "energy_h": float(np.sum(trace.u_h * trace.u_h) * dt),
        "energy_a": float(np.sum(trace.u_a * trace.u_a) * dt),
        "tracking_rms_h": float(
            np.sqrt(np.mean(np.sum((trace.positions - trace.ref_h) ** 2, axis=1)))
        ),
        "tracking_rms_a": float(
            np.sqrt(np.mean(np.sum((trace.positions - trace.ref_a) ** 2, axis=1)))
        ),
        "final_position": [float(trace.positions[-1, 0]), float(trace.positions[-1, 1])],
        "steady_state_u_h": [float(x) for x in np.mean(trace.u_h[ss], axis=0)],
        "steady_state_u_a": [float(x) for x in np.mean(trace.u_a[ss], axis=0)],
    }
    return report
