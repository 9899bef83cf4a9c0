"""Fusion of the automation's and the human's trajectory desires.

Five interchangeable fusion structures are provided:

* leader-follower: the human's estimated desire is adopted wholesale;
* superimposed: the human's desire is executed unless it violates the
  safety envelope, in which case a projection correction fires;
* additive controlled: attention-weighted linear blend of both desires;
* additive deforming: the automation's desire plus an amplified
  displacement desire;
* agreement: delegation to the agreement process (iterative best
  response or negotiation), which yields one joint trajectory.

Safety is a corridor band plus obstacle discs; a trajectory is safe iff
its minimum clearance over all samples is non-negative.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .trajectory import DisplacementDesire, Trajectory, affine_combination

__all__ = [
    "SigmaSource",
    "SafetyEnvelope",
    "LeaderFollower",
    "Superimposed",
    "AdditiveControlled",
    "AdditiveDeforming",
    "Agreement",
    "ArbitrationPolicy",
    "FusionResult",
    "check_safety",
    "arbitrate",
]


@dataclass(frozen=True)
class SigmaSource:
    """Attention weight source: a constant or a scripted time series.

    Emitted values are always clamped checks into [0, 1]; a scripted
    source holds the last scheduled value between breakpoints
    (zero-order hold) and is sampled at arbitration time.
    """

    constant: Optional[float] = None
    schedule: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        if (self.constant is None) == (self.schedule is None):
            raise ValueError("exactly one of constant or schedule must be given")
        if self.constant is not None and not 0.0 <= self.constant <= 1.0:
            raise ValueError(f"sigma must be in [0, 1], got {self.constant}")
        if self.schedule is not None:
            sched = tuple((float(t), float(s)) for t, s in self.schedule)
            if not sched:
                raise ValueError("schedule must be non-empty")
            times = [t for t, _ in sched]
            if sorted(times) != times:
                raise ValueError("schedule times must be non-decreasing")
            if any(not 0.0 <= s <= 1.0 for _, s in sched):
                raise ValueError("scheduled sigma values must be in [0, 1]")
            object.__setattr__(self, "schedule", sched)

    def sample(self, t: float = 0.0) -> float:
        if self.constant is not None:
            return self.constant
        times = [tt for tt, _ in self.schedule]
        i = bisect.bisect_right(times, t) - 1
        return self.schedule[max(0, i)][1]

    def to_dict(self) -> dict:
        if self.constant is not None:
            return {"sigma": self.constant}
        return {"sigma_schedule": [list(pair) for pair in self.schedule]}


@dataclass(frozen=True)
class SafetyEnvelope:
    """Corridor band |y - center_y| <= width/2 plus obstacle discs."""

    corridor_center_y: float = 0.0
    corridor_width: float = math.inf
    obstacles: tuple[tuple[tuple[float, float], float], ...] = ()

    def __post_init__(self):
        if self.corridor_width <= 0:
            raise ValueError("corridor width must be positive")
        obs = tuple(((float(c[0]), float(c[1])), float(r)) for c, r in self.obstacles)
        if any(r <= 0 for _, r in obs):
            raise ValueError("obstacle radii must be positive")
        object.__setattr__(self, "obstacles", obs)

    def to_dict(self) -> dict:
        d: dict = {
            "corridor": {"center_y": self.corridor_center_y, "width": self.corridor_width}
        }
        d["obstacles"] = [
            {"center": [c[0], c[1]], "radius": r} for c, r in self.obstacles
        ]
        return d

    @staticmethod
    def from_dict(data: dict) -> "SafetyEnvelope":
        corridor = data.get("corridor", {})
        return SafetyEnvelope(
            corridor_center_y=float(corridor.get("center_y", 0.0)),
            corridor_width=float(corridor.get("width", math.inf)),
            obstacles=tuple(
                (tuple(o["center"]), float(o["radius"]))
                for o in data.get("obstacles", [])
            ),
        )


@dataclass(frozen=True)
class LeaderFollower:
    kind = "leader_follower"


@dataclass(frozen=True)
class Superimposed:
    envelope: SafetyEnvelope
    kind = "superimposed"


@dataclass(frozen=True)
class AdditiveControlled:
    sigma_source: SigmaSource
    kind = "additive_controlled"


@dataclass(frozen=True)
class AdditiveDeforming:
    mu: float
    kind = "additive_deforming"

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")


@dataclass(frozen=True)
class Agreement:
    # AgreementConfig; typed loosely to avoid a circular import
    config: object
    kind = "agreement"


ArbitrationPolicy = Union[
    LeaderFollower, Superimposed, AdditiveControlled, AdditiveDeforming, Agreement
]


@dataclass(frozen=True)
class FusionResult:
    """Arbitration output: the trajectory the automation will track."""

    trajectory: Trajectory
    safe: bool
    trigger: bool = False
    min_clearance: float = math.inf
    details: Optional[object] = None  # scheme-specific record (e.g. a session)


def check_safety(t: Trajectory, envelope: SafetyEnvelope) -> tuple[bool, float]:
    """Minimum clearance of a trajectory against corridor and obstacles.

    Clearance is the smaller of the corridor margin and the distance to
    the nearest obstacle surface, minimized over samples. Safe iff the
    minimum clearance is >= 0.
    """
    pos = t.positions
    clearance = np.full(pos.shape[0], np.inf)
    if math.isfinite(envelope.corridor_width):
        margin = envelope.corridor_width / 2.0 - np.abs(pos[:, 1] - envelope.corridor_center_y)
        clearance = np.minimum(clearance, margin)
    for center, radius in envelope.obstacles:
        d = np.linalg.norm(pos - np.asarray(center), axis=1) - radius
        clearance = np.minimum(clearance, d)
    min_clearance = float(np.min(clearance)) if np.all(np.isfinite(clearance)) else math.inf
    return min_clearance >= 0.0, min_clearance


def _project_to_corridor(t: Trajectory, envelope: SafetyEnvelope) -> Trajectory:
    """Clamp sample positions into the corridor; velocities re-derived."""
    pos = t.positions.copy()
    half = envelope.corridor_width / 2.0
    if math.isfinite(half):
        pos[:, 1] = np.clip(
            pos[:, 1],
            envelope.corridor_center_y - half,
            envelope.corridor_center_y + half,
        )
    vel = np.gradient(pos, t.dt, axis=0)
    return Trajectory(t.dt, pos, vel)


def arbitrate(
    policy: ArbitrationPolicy,
    t_auto: Trajectory,
    t_human: Trajectory,
    *,
    envelope: Optional[SafetyEnvelope] = None,
    t: float = 0.0,
    agreement_inputs: Optional[dict] = None,
) -> FusionResult:
    """Fuse the automation desire and the human-side desire into one reference.

    `t_human` is the estimated human desire, except for the deforming
    policy where it must be a displacement desire (zero at both ends).
    `envelope` (defaulting to a superimposed policy's own envelope) is
    used to report the safety of the fused output. `agreement_inputs`
    carries the agreement scheme's extra arguments (see
    :func:`cooptraj.agreement.run_agreement`).
    """
    t_auto.require_compatible(t_human)
    if isinstance(t_human, DisplacementDesire) and not isinstance(policy, AdditiveDeforming):
        raise ValueError(
            f"displacement desire supplied to the {policy.kind} policy; "
            "only additive_deforming consumes displacements"
        )

    trigger = False
    details = None
    if isinstance(policy, LeaderFollower):
        fused = t_human
    elif isinstance(policy, AdditiveControlled):
        sigma = policy.sigma_source.sample(t)
        fused = affine_combination(t_human, t_auto, sigma)
    elif isinstance(policy, AdditiveDeforming):
        if not isinstance(t_human, DisplacementDesire):
            raise ValueError(
                "additive_deforming expects a displacement desire "
                "(see deformation_desire)"
            )
        if policy.mu == 0.0:
            fused = t_auto
        else:
            fused = Trajectory(
                t_auto.dt,
                t_auto.positions + policy.mu * t_human.positions,
                t_auto.velocities + policy.mu * t_human.velocities,
            )
    elif isinstance(policy, Superimposed):
        safe_in, _ = check_safety(t_human, policy.envelope)
        if safe_in:
            fused = t_human
        else:
            trigger = True
            fused = _project_to_corridor(t_human, policy.envelope)
        envelope = envelope or policy.envelope
    elif isinstance(policy, Agreement):
        from .agreement import run_agreement  # late import; agreement uses trajectory only

        outcome = run_agreement(policy.config, t_auto, t_human, agreement_inputs)
        fused = outcome.joint if outcome.joint is not None else t_auto
        details = outcome
    else:
        raise ValueError(f"unknown arbitration policy: {policy!r}")

    if envelope is not None:
        safe, clearance = check_safety(fused, envelope)
    else:
        safe, clearance = True, math.inf
    return FusionResult(fused, safe, trigger, clearance, details)