"""Planar trajectory representation and generation primitives.

A trajectory is a uniformly sampled sequence of 2-D position/velocity
states. It is the interchange format between the planner, the human
model, arbitration, agreement and the execution simulator. Two
trajectories are *compatible* (usable in pointwise operations) iff they
share the sample count and the sample spacing; :func:`resample` is the
explicit adapter between grids.

Generation is built on quintic polynomials: :class:`QuinticSegment`
satisfies full position/velocity/acceleration boundary conditions, and
:func:`quintic_point_to_point` samples it onto a uniform grid. The
rest-to-rest profile follows s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityError

__all__ = [
    "BoundaryState",
    "Trajectory",
    "DisplacementDesire",
    "QuinticSegment",
    "TrajectoryMetric",
    "quintic_point_to_point",
    "quintic_to_horizon",
    "constant_trajectory",
    "distance",
    "resample",
    "affine_combination",
    "hold_to_duration",
    "trajectory_to_dict",
    "trajectory_from_dict",
    "golden_section_min",
]

_GRID_SNAP = 1e-9


def _as_vec2(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (2,):
        raise ValueError(f"{name} must be a 2-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class BoundaryState:
    """Position, velocity and acceleration at a trajectory endpoint."""

    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    acceleration: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(_as_vec2(self.position, "position")))
        object.__setattr__(self, "velocity", tuple(_as_vec2(self.velocity, "velocity")))
        object.__setattr__(
            self, "acceleration", tuple(_as_vec2(self.acceleration, "acceleration"))
        )

    @property
    def p(self) -> np.ndarray:
        return np.array(self.position)

    @property
    def v(self) -> np.ndarray:
        return np.array(self.velocity)

    @property
    def a(self) -> np.ndarray:
        return np.array(self.acceleration)


class Trajectory:
    """Uniformly sampled planar trajectory.

    Immutable after construction; the backing arrays are marked
    read-only so instances can be shared freely across threads.

    Attributes:
        dt: seconds per sample, > 0.
        positions: (N, 2) float array, N >= 2.
        velocities: (N, 2) float array.
    """

    __slots__ = ("dt", "positions", "velocities")

    def __init__(self, dt: float, positions, velocities):
        dt = float(dt)
        if not math.isfinite(dt) or dt <= 0:
            raise ValueError(f"dt must be positive and finite, got {dt}")
        pos = np.array(positions, dtype=float)
        vel = np.array(velocities, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"positions must have shape (N, 2), got {pos.shape}")
        if vel.shape != pos.shape:
            raise ValueError(
                f"velocities shape {vel.shape} does not match positions {pos.shape}"
            )
        if pos.shape[0] < 2:
            raise ValueError("a trajectory needs at least 2 samples")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("trajectory samples must be finite")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    def __setattr__(self, name, value):
        raise AttributeError("Trajectory is immutable")

    @property
    def n_samples(self) -> int:
        return self.positions.shape[0]

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    def is_compatible(self, other: "Trajectory") -> bool:
        return self.n_samples == other.n_samples and math.isclose(
            self.dt, other.dt, rel_tol=1e-9, abs_tol=0.0
        )

    def require_compatible(self, other: "Trajectory") -> None:
        if not self.is_compatible(other):
            raise CompatibilityError(
                f"incompatible trajectories: N={self.n_samples}/dt={self.dt} vs "
                f"N={other.n_samples}/dt={other.dt}"
            )

    def state_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Linearly interpolated (position, velocity) at time t.

        Before t=0 the first sample is returned; after the end the final
        sample is held (regulation mode for tracking controllers).
        """
        if t <= 0.0:
            return self.positions[0].copy(), self.velocities[0].copy()
        u = t / self.dt
        i = int(math.floor(u + _GRID_SNAP))
        if i >= self.n_samples - 1:
            return self.positions[-1].copy(), self.velocities[-1].copy()
        frac = u - i
        if frac < _GRID_SNAP:
            return self.positions[i].copy(), self.velocities[i].copy()
        # this lerp form is exact when both endpoints are equal (hold tails)
        p = self.positions[i] + frac * (self.positions[i + 1] - self.positions[i])
        v = self.velocities[i] + frac * (self.velocities[i + 1] - self.velocities[i])
        return p, v

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.dt == other.dt
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.velocities, other.velocities)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Trajectory(n={self.n_samples}, dt={self.dt}, "
            f"start={self.positions[0].tolist()}, end={self.positions[-1].tolist()})"
        )


class DisplacementDesire(Trajectory):
    """A trajectory of displacements (a desire to deviate, not a path).

    Same representation as :class:`Trajectory`, but tagged so that
    arbitration can reject a displacement fed to a policy that expects
    an absolute desire, and vice versa.
    """

    __slots__ = ()


@dataclass(frozen=True)
class TrajectoryMetric:
    """Scalar separation between two compatible trajectories.

    kind 'max-pointwise-distance' is in meters; 'mean-squared-distance'
    in meters squared. Positions only; velocity profiles are not compared.
    """

    kind: str
    value: float


@dataclass(frozen=True)
class QuinticSegment:
    """Quintic polynomial in 2-D satisfying six boundary conditions per axis.

    Coefficients are stored per axis as c[0] + c[1] t + ... + c[5] t^5.
    """

    start: BoundaryState
    goal: BoundaryState
    duration: float
    coeffs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be positive, got {self.duration}")
        object.__setattr__(self, "coeffs", self._solve_coeffs())
        self.coeffs.setflags(write=False)

    def _solve_coeffs(self) -> np.ndarray:
        T = self.duration
        c = np.zeros((2, 6))
        for ax in range(2):
            p0, v0, a0 = self.start.p[ax], self.start.v[ax], self.start.a[ax]
            p1, v1, a1 = self.goal.p[ax], self.goal.v[ax], self.goal.a[ax]
            dp = p1 - p0 - v0 * T - 0.5 * a0 * T * T
            dv = (v1 - v0 - a0 * T) * T
            da = (a1 - a0) * T * T
            c[ax, 0] = p0
            c[ax, 1] = v0
            c[ax, 2] = 0.5 * a0
            c[ax, 3] = (20 * dp - 8 * dv + da) / (2 * T**3)
            c[ax, 4] = (-30 * dp + 14 * dv - 2 * da) / (2 * T**4)
            c[ax, 5] = (12 * dp - 6 * dv + da) / (2 * T**5)
        return c

    def position(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        powers = np.stack([t**k for k in range(6)], axis=-1)
        return powers @ self.coeffs.T

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        dcoef = self.coeffs[:, 1:] * np.arange(1, 6)
        powers = np.stack([t**k for k in range(5)], axis=-1)
        return powers @ dcoef.T

    def acceleration(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d2 = self.coeffs[:, 2:] * np.array([2, 6, 12, 20])
        powers = np.stack([t**k for k in range(4)], axis=-1)
        return powers @ d2.T

    def boundary_residual(self) -> float:
        """Max absolute violation of the six boundary conditions per axis."""
        r = [
            self.position(0.0) - self.start.p,
            self.velocity(0.0) - self.start.v,
            self.acceleration(0.0) - self.start.a,
            self.position(self.duration) - self.goal.p,
            self.velocity(self.duration) - self.goal.v,
            self.acceleration(self.duration) - self.goal.a,
        ]
        return float(max(np.max(np.abs(x)) for x in r))


def _check_divisible(T: float, dt: float) -> int:
    """Number of intervals T/dt, requiring near-exact divisibility."""
    ratio = T / dt
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-6 * max(1.0, ratio):
        raise ValueError(f"T={T} is not a multiple of dt={dt}")
    return n


def quintic_point_to_point(
    start: BoundaryState, goal: BoundaryState, T: float, dt: float
) -> Trajectory:
    """Sample the quintic joining two boundary states onto a uniform grid.

    T must be (nearly) a multiple of dt and at least 2*dt. The first and
    last samples meet the boundary states exactly; a rest-to-rest motion
    follows the smooth-step profile 10 tau^3 - 15 tau^4 + 6 tau^5.
    """
    if not (math.isfinite(T) and T > 0):
        raise ValueError(f"T must be positive, got {T}")
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")
    if T < 2 * dt:
        raise ValueError(f"T={T} must be at least 2*dt={2 * dt}")
    n_int = _check_divisible(T, dt)
    seg = QuinticSegment(start, goal, T)
    t = np.arange(n_int + 1) * dt
    t[-1] = T  # pin the final sample to the exact horizon
    return Trajectory(dt, seg.position(t), seg.velocity(t))


def quintic_to_horizon(
    start: BoundaryState,
    goal_position,
    move_duration: float,
    dt: float,
    horizon: float,
) -> Trajectory:
    """Rest-to-rest quintic toward goal_position, held at the goal afterwards.

    The motion takes move_duration seconds (any positive value, not
    necessarily grid-aligned); the returned trajectory spans `horizon`
    on the dt grid, resting at the goal once the motion completes. This
    is the canonical materialization of a (goal, duration) offer.
    """
    if move_duration <= 0:
        raise ValueError(f"move_duration must be positive, got {move_duration}")
    n_int = _check_divisible(horizon, dt)
    if n_int < 1:
        raise ValueError("horizon too short")
    g = _as_vec2(goal_position, "goal_position")
    seg = QuinticSegment(start, BoundaryState(tuple(g)), move_duration)
    t = np.arange(n_int + 1) * dt
    moving = t < move_duration
    pos = np.empty((n_int + 1, 2))
    vel = np.zeros((n_int + 1, 2))
    pos[~moving] = g
    if np.any(moving):
        pos[moving] = seg.position(t[moving])
        vel[moving] = seg.velocity(t[moving])
    return Trajectory(dt, pos, vel)


def constant_trajectory(position, n_samples: int, dt: float) -> Trajectory:
    """Trajectory resting at a fixed position."""
    p = _as_vec2(position, "position")
    pos = np.tile(p, (n_samples, 1))
    vel = np.zeros((n_samples, 2))
    return Trajectory(dt, pos, vel)


def distance(a: Trajectory, b: Trajectory, kind: str = "max-pointwise-distance") -> TrajectoryMetric:
    """Pointwise position separation between two compatible trajectories."""
    a.require_compatible(b)
    d = np.linalg.norm(a.positions - b.positions, axis=1)
    if kind == "max-pointwise-distance":
        value = float(np.max(d))
    elif kind == "mean-squared-distance":
        value = float(np.mean(d * d))
    else:
        raise ValueError(f"unknown metric kind: {kind!r}")
    return TrajectoryMetric(kind, value)


def max_distance(a: Trajectory, b: Trajectory) -> float:
    return distance(a, b, "max-pointwise-distance").value


def resample(t: Trajectory, dt_new: float) -> Trajectory:
    """Re-grid a trajectory by linear interpolation of position and velocity.

    Endpoints are preserved exactly; the duration is preserved to within
    dt_new. dt_new must be positive and smaller than the duration.
    """
    if not (math.isfinite(dt_new) and dt_new > 0):
        raise ValueError(f"dt_new must be positive, got {dt_new}")
    if dt_new >= t.duration:
        raise ValueError(
            f"dt_new={dt_new} must be smaller than the duration {t.duration}"
        )
    if dt_new == t.dt:
        return t
    n_new = max(2, round(t.duration / dt_new) + 1)
    pos = np.empty((n_new, 2))
    vel = np.empty((n_new, 2))
    for k in range(n_new):
        pos[k], vel[k] = t.state_at(k * dt_new)
    pos[0], vel[0] = t.positions[0], t.velocities[0]
    pos[-1], vel[-1] = t.positions[-1], t.velocities[-1]
    return Trajectory(dt_new, pos, vel)


def affine_combination(a: Trajectory, b: Trajectory, weight_a: float) -> Trajectory:
    """weight_a * a + (1 - weight_a) * b, sample-wise on positions and velocities.

    weight_a 1.0 and 0.0 return the respective input unchanged (bit-exact).
    """
    a.require_compatible(b)
    if weight_a == 1.0:
        return a
    if weight_a == 0.0:
        return b
    w = float(weight_a)
    return Trajectory(
        a.dt,
        w * a.positions + (1.0 - w) * b.positions,
        w * a.velocities + (1.0 - w) * b.velocities,
    )


def hold_to_duration(t: Trajectory, duration: float) -> Trajectory:
    """Extend a trajectory to `duration` by resting at its final position."""
    n_int = _check_divisible(duration, t.dt)
    n_new = n_int + 1
    if n_new < t.n_samples:
        raise ValueError(
            f"duration {duration} is shorter than the trajectory ({t.duration})"
        )
    if n_new == t.n_samples:
        return t
    pos = np.vstack([t.positions, np.tile(t.positions[-1], (n_new - t.n_samples, 1))])
    vel = np.vstack([t.velocities, np.zeros((n_new - t.n_samples, 2))])
    return Trajectory(t.dt, pos, vel)


# --- serialization ------------------------------------------------------

def trajectory_to_dict(t: Trajectory) -> dict:
    """JSON form: {dt, samples: [{p: [x, y], v: [vx, vy]}, ...]}."""
    return {
        "dt": t.dt,
        "samples": [
            {"p": [float(p[0]), float(p[1])], "v": [float(v[0]), float(v[1])]}
            for p, v in zip(t.positions, t.velocities)
        ],
    }


def trajectory_from_dict(data: dict) -> Trajectory:
    samples = data["samples"]
    pos = [s["p"] for s in samples]
    vel = [s["v"] for s in samples]
    return Trajectory(float(data["dt"]), pos, vel)


def trajectory_to_json(t: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(t))


def trajectory_from_json(text: str) -> Trajectory:
    return trajectory_from_dict(json.loads(text))


# --- small numeric utility ----------------------------------------------

def golden_section_min(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section search for the minimizer of f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
