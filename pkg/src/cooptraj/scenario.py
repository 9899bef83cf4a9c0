"""Scenario files: one JSON document describing a full experiment.

A scenario fixes the shared start state, the human profile, the
automation's cost, the arbitration policy, an optional safety envelope,
the simulation grid/gains and a seed for every stochastic draw. The
format carries an integer version field so golden files survive
format evolution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .agreement import AgreementConfig
from .arbitration import (
    AdditiveControlled,
    AdditiveDeforming,
    Agreement,
    ArbitrationPolicy,
    LeaderFollower,
    SafetyEnvelope,
    SigmaSource,
    Superimposed,
)
from .human import HumanProfile
from .planner import CostSpec
from .trajectory import BoundaryState

__all__ = ["SimSettings", "EstimationSettings", "Scenario", "load_demo", "DEMO_NAMES"]

SCENARIO_VERSION = 1
DEMO_NAMES = ("tug-of-war", "unsafe-blend", "negotiation-demo")


@dataclass(frozen=True)
class SimSettings:
    dt: float = 0.02
    dt_sim: float = 0.005
    duration: float = 10.0
    kp: float = 4.0
    kd: float = 4.0
    u_max: Optional[float] = None

    def __post_init__(self):
        if self.dt <= 0 or self.dt_sim <= 0 or self.duration <= 0:
            raise ValueError("dt, dt_sim and duration must be positive")
        if self.kp <= 0 or self.kd <= 0:
            raise ValueError("gains must be positive")

    def to_dict(self) -> dict:
        d = {
            "dt": self.dt,
            "dt_sim": self.dt_sim,
            "duration": self.duration,
            "gains": {"kp": self.kp, "kd": self.kd},
        }
        if self.u_max is not None:
            d["gains"]["u_max"] = self.u_max
        return d

    @staticmethod
    def from_dict(data: dict) -> "SimSettings":
        gains = data.get("gains", {})
        return SimSettings(
            dt=float(data.get("dt", 0.02)),
            dt_sim=float(data.get("dt_sim", 0.005)),
            duration=float(data.get("duration", 10.0)),
            kp=float(gains.get("kp", 4.0)),
            kd=float(gains.get("kd", 4.0)),
            u_max=None if gains.get("u_max") is None else float(gains["u_max"]),
        )


@dataclass(frozen=True)
class EstimationSettings:
    """How the harness observes the human before estimating their desire."""

    window: int = 25
    window_span: float = 0.8  # fraction of the human motion observed
    duration_range: tuple[float, float] = (0.3, 6.0)

    def __post_init__(self):
        if self.window < 6:
            raise ValueError("estimation window must be >= 6 samples")
        if not 0.0 < self.window_span <= 1.0:
            raise ValueError("window_span must be in (0, 1]")
        lo, hi = self.duration_range
        if not 0 < lo < hi:
            raise ValueError("invalid duration_range")

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "window_span": self.window_span,
            "duration_range": list(self.duration_range),
        }

    @staticmethod
    def from_dict(data: dict) -> "EstimationSettings":
        return EstimationSettings(
            window=int(data.get("window", 25)),
            window_span=float(data.get("window_span", 0.8)),
            duration_range=tuple(data.get("duration_range", (0.3, 6.0))),
        )


def _policy_to_dict(policy: ArbitrationPolicy) -> dict:
    if isinstance(policy, LeaderFollower):
        return {"kind": "leader_follower"}
    if isinstance(policy, Superimposed):
        return {"kind": "superimposed", "envelope": policy.envelope.to_dict()}
    if isinstance(policy, AdditiveControlled):
        return {"kind": "additive_controlled", **policy.sigma_source.to_dict()}
    if isinstance(policy, AdditiveDeforming):
        return {"kind": "additive_deforming", "mu": policy.mu}
    if isinstance(policy, Agreement):
        return {"kind": "agreement", **policy.config.to_dict()}
    raise ValueError(f"unknown policy {policy!r}")


def _policy_from_dict(data: dict, envelope: Optional[SafetyEnvelope]) -> ArbitrationPolicy:
    kind = data.get("kind")
    if kind == "leader_follower":
        return LeaderFollower()
    if kind == "superimposed":
        env = SafetyEnvelope.from_dict(data["envelope"]) if "envelope" in data else envelope
        if env is None:
            raise ValueError("superimposed arbitration needs a safety envelope")
        return Superimposed(env)
    if kind == "additive_controlled":
        if "sigma" in data:
            source = SigmaSource(constant=float(data["sigma"]))
        elif "sigma_schedule" in data:
            source = SigmaSource(schedule=tuple(tuple(p) for p in data["sigma_schedule"]))
        else:
            raise ValueError("additive_controlled needs sigma or sigma_schedule")
        return AdditiveControlled(source)
    if kind == "additive_deforming":
        return AdditiveDeforming(mu=float(data.get("mu", 1.0)))
    if kind == "agreement":
        return Agreement(AgreementConfig.from_dict(data))
    raise ValueError(f"unknown arbitration kind {kind!r}")


@dataclass(frozen=True)
class Scenario:
    """A reproducible experiment configuration."""

    id: str
    start: BoundaryState
    human: HumanProfile
    automation_cost: CostSpec
    arbitration: ArbitrationPolicy
    sim: SimSettings = SimSettings()
    estimation: EstimationSettings = EstimationSettings()
    envelope: Optional[SafetyEnvelope] = None
    seed: int = 0
    # additive_deforming: the push the human applies (force, sample index)
    deformation_force: tuple[float, float] = (0.0, 0.0)
    deformation_index: Optional[int] = None

    def to_dict(self) -> dict:
        d = {
            "version": SCENARIO_VERSION,
            "id": self.id,
            "seed": self.seed,
            "start": {
                "p": list(self.start.position),
                "v": list(self.start.velocity),
            },
            "human": self.human.to_dict(),
            "automation_cost": self.automation_cost.to_dict(),
            "arbitration": _policy_to_dict(self.arbitration),
            "sim": self.sim.to_dict(),
            "estimation": self.estimation.to_dict(),
        }
        if self.envelope is not None:
            d["envelope"] = self.envelope.to_dict()
        if self.deformation_force != (0.0, 0.0) or self.deformation_index is not None:
            d["deformation"] = {
                "force": list(self.deformation_force),
                "at_index": self.deformation_index,
            }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_dict(data: dict) -> "Scenario":
        version = data.get("version")
        if version != SCENARIO_VERSION:
            raise ValueError(
                f"unsupported scenario version {version!r} (expected {SCENARIO_VERSION})"
            )
        envelope = (
            SafetyEnvelope.from_dict(data["envelope"]) if "envelope" in data else None
        )
        start_raw = data.get("start", {})
        deformation = data.get("deformation", {})
        return Scenario(
            id=str(data.get("id", "unnamed")),
            start=BoundaryState(
                tuple(start_raw.get("p", (0.0, 0.0))),
                tuple(start_raw.get("v", (0.0, 0.0))),
            ),
            human=HumanProfile.from_dict(data["human"]),
            automation_cost=CostSpec.from_dict(data["automation_cost"]),
            arbitration=_policy_from_dict(data["arbitration"], envelope),
            sim=SimSettings.from_dict(data.get("sim", {})),
            estimation=EstimationSettings.from_dict(data.get("estimation", {})),
            envelope=envelope,
            seed=int(data.get("seed", 0)),
            deformation_force=tuple(deformation.get("force", (0.0, 0.0))),
            deformation_index=deformation.get("at_index"),
        )

    @staticmethod
    def from_json(text: str) -> "Scenario":
        return Scenario.from_dict(json.loads(text))

    def with_policy(self, policy: ArbitrationPolicy, id_suffix: str = "") -> "Scenario":
        """Same experiment routed through a different arbitration policy."""
        from dataclasses import replace

        return replace(
            self, arbitration=policy, id=self.id + (id_suffix or f"@{policy.kind}")
        )


def load_demo(name: str) -> Scenario:
    """Load one of the packaged demo scenarios."""
    if name not in DEMO_NAMES:
        raise ValueError(f"unknown demo {name!r}; choose from {DEMO_NAMES}")
    fname = name.replace("-", "_") + ".json"
    text = resources.files("cooptraj.demos").joinpath(fname).read_text("utf-8")
    return Scenario.from_json(text)
