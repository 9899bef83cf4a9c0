"""Emancipated agreement on a joint trajectory.

Two interchangeable schemes produce the joint reference that both
agents then track:

* Iterative best response, lifted to trajectory space. Each agent
  alternately re-optimizes ``||T - desire||^2 + coupling * ||T -
  other||^2`` against the other's latest trajectory, which has the
  sample-wise closed form ``(desire + coupling * other) / (1 +
  coupling)``. The pair contracts toward a fixed point; the joint
  trajectory is the midpoint of the converged pair.

* Monotone-concession negotiation over the offer parameters theta =
  (goal, duration). Each round both agents hold an offer; an agent
  accepts when the opponent's offer is at least as good (up to a slack)
  as its own next concession, otherwise the agent with the lower
  Zeuthen risk concedes one step toward the opponent. Equal risks make
  both concede, which keeps the protocol symmetric under an agent swap.

Both schemes treat the agents identically: swapping desires, costs and
compliance and re-running yields the same joint trajectory.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .planner import CostSpec
from .human import HumanProfile
from .trajectory import (
    BoundaryState,
    Trajectory,
    affine_combination,
    max_distance,
    quintic_to_horizon,
)

__all__ = [
    "AgreementConfig",
    "BestResponseState",
    "IBRResult",
    "Theta",
    "OfferPolicy",
    "human_offer_policy",
    "automation_offer_policy",
    "NegotiationRound",
    "NegotiationSession",
    "best_response",
    "run_ibr",
    "ibr_fixed_point",
    "negotiate",
    "negotiation_horizon",
    "verify_agreement",
    "run_agreement",
    "AgreementOutcome",
]

_TINY = 1e-12


@dataclass(frozen=True)
class AgreementConfig:
    """Parameters governing both agreement schemes."""

    scheme: str = "ibr"  # "ibr" | "negotiation"
    coupling: float = 1.0
    epsilon: float = 0.05
    max_rounds: int = 100
    concession_step: float = 0.25
    acceptance_slack: float = 0.0
    fallback: str = "midpoint"  # "midpoint" | "status_quo"
    automation_compliance: float = 1.0

    def __post_init__(self):
        if self.scheme not in ("ibr", "negotiation"):
            raise ValueError(f"unknown agreement scheme {self.scheme!r}")
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not 0.0 < self.concession_step <= 1.0:
            raise ValueError("concession_step must be in (0, 1]")
        if self.acceptance_slack < 0:
            raise ValueError("acceptance_slack must be >= 0")
        if self.fallback not in ("midpoint", "status_quo"):
            raise ValueError(f"unknown fallback {self.fallback!r}")

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "coupling": self.coupling,
            "epsilon": self.epsilon,
            "max_rounds": self.max_rounds,
            "concession_step": self.concession_step,
            "acceptance_slack": self.acceptance_slack,
            "fallback": self.fallback,
            "automation_compliance": self.automation_compliance,
        }

    @staticmethod
    def from_dict(data: dict) -> "AgreementConfig":
        return AgreementConfig(
            scheme=data.get("scheme", "ibr"),
            coupling=float(data.get("coupling", 1.0)),
            epsilon=float(data.get("epsilon", 0.05)),
            max_rounds=int(data.get("max_rounds", 100)),
            concession_step=float(data.get("concession_step", 0.25)),
            acceptance_slack=float(data.get("acceptance_slack", 0.0)),
            fallback=data.get("fallback", "midpoint"),
            automation_compliance=float(data.get("automation_compliance", 1.0)),
        )


# --- iterative best response ---------------------------------------------

def best_response(own_desire: Trajectory, other_current: Trajectory, coupling: float) -> Trajectory:
    """Sample-wise minimizer of ||T - own||^2 + coupling * ||T - other||^2."""
    if coupling <= 0:
        raise ValueError("coupling must be positive")
    return affine_combination(own_desire, other_current, 1.0 / (1.0 + coupling))


@dataclass
class BestResponseState:
    """Final iterates and per-round gap history of an IBR run."""

    t_human: Trajectory
    t_auto: Trajectory
    round: int
    gap: float
    gap_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class IBRResult:
    state: BestResponseState
    joint: Trajectory
    config: AgreementConfig


def run_ibr(desire_h: Trajectory, desire_a: Trajectory, config: AgreementConfig) -> IBRResult:
    """Alternate best responses until the gap closes or rounds run out.

    One round updates the human side against the automation's latest
    iterate, then the automation against the fresh human iterate. The
    excess gap above its limit contracts by (coupling/(1+coupling))^2
    per round. The joint trajectory is the midpoint of the final pair.
    """
    desire_h.require_compatible(desire_a)
    lam = config.coupling
    t_h, t_a = desire_h, desire_a
    gaps = [max_distance(t_h, t_a)]
    rounds = 0
    for k in range(1, config.max_rounds + 1):
        t_h = best_response(desire_h, t_a, lam)
        t_a = best_response(desire_a, t_h, lam)
        gap = max_distance(t_h, t_a)
        gaps.append(gap)
        rounds = k
        if gap <= config.epsilon:
            break
    joint = affine_combination(t_h, t_a, 0.5)
    state = BestResponseState(t_h, t_a, rounds, gaps[-1], gaps)
    return IBRResult(state, joint, config)


def ibr_fixed_point(desire_h: Trajectory, desire_a: Trajectory, coupling: float):
    """Closed-form limit of the alternating best responses (per sample)."""
    lam = coupling
    w = (1.0 + lam) / (1.0 + 2.0 * lam)
    t_h_inf = affine_combination(desire_h, desire_a, w)
    t_a_inf = affine_combination(desire_a, desire_h, w)
    return t_h_inf, t_a_inf


# --- negotiation over (goal, duration) ------------------------------------

@dataclass(frozen=True)
class Theta:
    """Offer parameters: target position and motion duration."""

    goal: tuple[float, float]
    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("offer duration must be positive")
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))

    def toward(self, other: "Theta", fraction: float) -> "Theta":
        """Concede by `fraction` of the way toward the other offer."""
        if fraction == 0.0:
            return self
        g = (
            self.goal[0] + fraction * (other.goal[0] - self.goal[0]),
            self.goal[1] + fraction * (other.goal[1] - self.goal[1]),
        )
        d = self.duration + fraction * (other.duration - self.duration)
        return Theta(g, d)

    def midpoint(self, other: "Theta") -> "Theta":
        return Theta(
            (0.5 * (self.goal[0] + other.goal[0]), 0.5 * (self.goal[1] + other.goal[1])),
            0.5 * (self.duration + other.duration),
        )

    def to_dict(self) -> dict:
        return {"goal": [self.goal[0], self.goal[1]], "duration": self.duration}

    @staticmethod
    def from_dict(data: dict) -> "Theta":
        return Theta(tuple(data["goal"]), float(data["duration"]))


@dataclass(frozen=True)
class OfferPolicy:
    """One negotiating agent: an initial offer, a utility, a compliance."""

    initial: Theta
    utility: Callable[[Theta], float]
    compliance: float

    def __post_init__(self):
        if not 0.0 <= self.compliance <= 1.0:
            raise ValueError("compliance must be in [0, 1]")


def human_offer_policy(profile: HumanProfile, duration_weight: float = 1.0) -> OfferPolicy:
    """The simulated human values offers by squared deviation from its desire."""
    goal = np.asarray(profile.desired_goal, dtype=float)
    dur = profile.desired_duration

    def utility(theta: Theta) -> float:
        dg = np.asarray(theta.goal) - goal
        return -(float(dg @ dg) + duration_weight * (theta.duration - dur) ** 2)

    return OfferPolicy(Theta(tuple(goal), dur), utility, profile.compliance)


def automation_offer_policy(
    cost: CostSpec, start: BoundaryState, compliance: float = 1.0
) -> OfferPolicy:
    """The automation values offers by its planning cost of the offered quintic.

    The rest-to-rest quintic admits closed forms for the integrated
    squared jerk (720 |dp|^2 / T^5) and acceleration (120/7 |dp|^2 /
    T^3), so the utility is exact and cheap.
    """
    p0 = start.p
    goal = np.asarray(cost.goal, dtype=float)

    def utility(theta: Theta) -> float:
        dp = np.asarray(theta.goal) - p0
        travel = float(dp @ dp)
        d = theta.duration
        total = cost.w_jerk * 720.0 * travel / d**5
        total += cost.w_effort * (120.0 / 7.0) * travel / d**3
        dg = np.asarray(theta.goal) - goal
        total += cost.w_goal * float(dg @ dg)
        total += cost.w_time * d
        return -total

    return OfferPolicy(Theta(tuple(goal), cost.horizon), utility, compliance)


@dataclass(frozen=True)
class NegotiationRound:
    round: int
    theta_h: Theta
    theta_a: Theta
    offer_h: Trajectory
    offer_a: Trajectory
    u_hh: float
    u_ha: float
    u_ah: float
    u_aa: float
    risk_h: float
    risk_a: float
    action: str


@dataclass
class NegotiationSession:
    """Full record of a negotiation run."""

    rounds: list[NegotiationRound]
    verdict: str  # "agreed" | "fallback_applied" | "exhausted"
    joint: Optional[Trajectory]
    joint_theta: Optional[Theta]
    agreement_distance: float
    config: AgreementConfig

    def transcript_lines(self) -> list[str]:
        """One JSON line per round: offers, the four utilities, risks, action."""
        lines = []
        for r in self.rounds:
            lines.append(
                json.dumps(
                    {
                        "round": r.round,
                        "offer_H": r.theta_h.to_dict(),
                        "offer_A": r.theta_a.to_dict(),
                        "u_HH": r.u_hh,
                        "u_HA": r.u_ha,
                        "u_AH": r.u_ah,
                        "u_AA": r.u_aa,
                        "risk_H": r.risk_h,
                        "risk_A": r.risk_a,
                        "action": r.action,
                    }
                )
            )
        return lines


def _zeuthen_risk(u_own: float, u_opp: float, u_worst: float) -> float:
    return (u_own - u_opp) / max(u_own - u_worst, _TINY)


@dataclass(frozen=True)
class RoundEval:
    """Pure evaluation of one negotiation round (no state change)."""

    u_hh: float
    u_ha: float
    u_ah: float
    u_aa: float
    risk_h: float
    risk_a: float
    gap: float
    traj_h: Trajectory
    traj_a: Trajectory
    accepts_h: bool
    accepts_a: bool
    next_h: Theta
    next_a: Theta


def _evaluate_round(
    theta_h: Theta,
    theta_a: Theta,
    agent_h: OfferPolicy,
    agent_a: OfferPolicy,
    u_worst_h: float,
    u_worst_a: float,
    config: AgreementConfig,
    materialize: Callable[[Theta], Trajectory],
) -> RoundEval:
    u_hh = agent_h.utility(theta_h)
    u_ha = agent_h.utility(theta_a)
    u_ah = agent_a.utility(theta_h)
    u_aa = agent_a.utility(theta_a)
    traj_h = materialize(theta_h)
    traj_a = materialize(theta_a)
    gap = max_distance(traj_h, traj_a)
    risk_h = _zeuthen_risk(u_hh, u_ha, u_worst_h)
    risk_a = _zeuthen_risk(u_aa, u_ah, u_worst_a)
    next_h = theta_h.toward(theta_a, config.concession_step * agent_h.compliance)
    next_a = theta_a.toward(theta_h, config.concession_step * agent_a.compliance)
    accepts_h = u_ha >= agent_h.utility(next_h) - config.acceptance_slack
    accepts_a = u_ah >= agent_a.utility(next_a) - config.acceptance_slack
    return RoundEval(
        u_hh, u_ha, u_ah, u_aa, risk_h, risk_a, gap,
        traj_h, traj_a, accepts_h, accepts_a, next_h, next_a,
    )


def _theta_materializer(start: BoundaryState, dt: float, horizon: float):
    def materialize(theta: Theta) -> Trajectory:
        return quintic_to_horizon(start, theta.goal, theta.duration, dt, horizon)

    return materialize


def negotiation_horizon(theta_a: Theta, theta_b: Theta, dt: float) -> float:
    """Shared comparison grid: next dt multiple past the longer offer."""
    longest = max(theta_a.duration, theta_b.duration)
    return max(2, math.ceil(longest / dt - 1e-9)) * dt


def negotiate(
    agent_h: OfferPolicy,
    agent_a: OfferPolicy,
    config: AgreementConfig,
    start: BoundaryState,
    dt: float,
) -> NegotiationSession:
    """Run the monotone-concession protocol between two offer policies.

    Each round both offers stand; the run terminates by offer
    trajectories within epsilon, by acceptance (the accepting agent
    adopts the opponent's offer, simultaneous acceptance meets at the
    offer midpoint), or by the configured fallback after max_rounds.
    Concessions only ever move toward the opponent's current offer.
    """
    theta_h = agent_h.initial
    theta_a = agent_a.initial
    materialize = _theta_materializer(
        start, dt, negotiation_horizon(theta_h, theta_a, dt)
    )
    u_worst_h = agent_h.utility(theta_a)  # opponent's opening offer, frozen
    u_worst_a = agent_a.utility(theta_h)

    rounds: list[NegotiationRound] = []
    joint_theta: Optional[Theta] = None
    verdict = None

    for rnd in range(1, config.max_rounds + 1):
        ev = _evaluate_round(
            theta_h, theta_a, agent_h, agent_a, u_worst_h, u_worst_a, config, materialize
        )
        if ev.gap <= config.epsilon:
            action = "agree"
            joint_theta = theta_h.midpoint(theta_a)
            theta_h = theta_a = joint_theta
            verdict = "agreed"
        elif ev.accepts_h and ev.accepts_a:
            action = "accept_both"
            joint_theta = theta_h.midpoint(theta_a)
            theta_h = theta_a = joint_theta
            verdict = "agreed"
        elif ev.accepts_h:
            action = "accept_h"
            joint_theta = theta_a
            theta_h = theta_a
            verdict = "agreed"
        elif ev.accepts_a:
            action = "accept_a"
            joint_theta = theta_h
            theta_a = theta_h
            verdict = "agreed"
        elif ev.risk_h < ev.risk_a:
            action = "concede_h"
        elif ev.risk_a < ev.risk_h:
            action = "concede_a"
        else:
            action = "concede_both"
        rounds.append(
            NegotiationRound(
                rnd, theta_h, theta_a, ev.traj_h, ev.traj_a,
                ev.u_hh, ev.u_ha, ev.u_ah, ev.u_aa, ev.risk_h, ev.risk_a, action,
            )
        )
        if verdict is not None:
            break
        if action in ("concede_h", "concede_both"):
            theta_h = ev.next_h
        if action in ("concede_a", "concede_both"):
            theta_a = ev.next_a

    if verdict is None:
        if config.fallback == "midpoint":
            verdict = "fallback_applied"
            joint_theta = theta_h.midpoint(theta_a)
        else:
            verdict = "exhausted"

    joint = materialize(joint_theta) if joint_theta is not None else None
    final_distance = (
        0.0
        if verdict == "agreed"
        else max_distance(materialize(theta_h), materialize(theta_a))
    )
    return NegotiationSession(rounds, verdict, joint, joint_theta, final_distance, config)


# --- shared entry points ---------------------------------------------------

@dataclass(frozen=True)
class AgreementOutcome:
    scheme: str
    joint: Optional[Trajectory]
    ibr: Optional[IBRResult] = None
    session: Optional[NegotiationSession] = None

    @property
    def rounds(self) -> int:
        if self.ibr is not None:
            return self.ibr.state.round
        return len(self.session.rounds) if self.session is not None else 0


def run_agreement(
    config: AgreementConfig,
    t_auto: Trajectory,
    t_human: Trajectory,
    inputs: Optional[dict] = None,
) -> AgreementOutcome:
    """Dispatch to the configured scheme.

    IBR works directly on the two desire trajectories. Negotiation
    requires offer policies (and the start state / grid) in `inputs`:
    keys agent_h, agent_a, start, dt.
    """
    if config.scheme == "ibr":
        result = run_ibr(t_human, t_auto, config)
        return AgreementOutcome("ibr", result.joint, ibr=result)
    inputs = inputs or {}
    missing = {"agent_h", "agent_a", "start", "dt"} - set(inputs)
    if missing:
        raise ValueError(f"negotiation needs inputs {sorted(missing)}")
    session = negotiate(
        inputs["agent_h"], inputs["agent_a"], config, inputs["start"], inputs["dt"]
    )
    return AgreementOutcome("negotiation", session.joint, session=session)


def verify_agreement(result) -> tuple[bool, Optional[Trajectory], float]:
    """(agreed, joint, distance) for a completed agreement run.

    Agreed uses a closed threshold (distance exactly epsilon counts).
    When agreed, the returned joint is the single shared object both
    downstream references must point at.
    """
    if isinstance(result, IBRResult):
        agreed = result.state.gap <= result.config.epsilon
        return agreed, result.joint, result.state.gap
    if isinstance(result, NegotiationSession):
        agreed = result.verdict == "agreed"
        return agreed, result.joint, result.agreement_distance
    if isinstance(result, AgreementOutcome):
        return verify_agreement(result.ibr if result.ibr is not None else result.session)
    raise TypeError(f"cannot verify {type(result).__name__}")
