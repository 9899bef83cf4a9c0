"""Scenario runner: wires planning, estimation, arbitration and execution.

One run proceeds through the four-step pipeline: the automation plans
its desire from its cost, the human's motion prefix is observed and
their desire estimated, the two desires are arbitrated into the
automation's reference, and both agents then execute on the shared
plant. For the agreement policy the human's side enters through the
agreement process itself (offers / best responses computed from their
true desire) rather than through the estimator, since agreement is an
explicit information exchange.

Everything downstream of the seed is deterministic, so a report is
reproducible bit-for-bit from (scenario, seed).
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .agreement import (
    Theta,
    automation_offer_policy,
    human_offer_policy,
    verify_agreement,
)
from .arbitration import (
    AdditiveDeforming,
    Agreement,
    ArbitrationPolicy,
    FusionResult,
    arbitrate,
)
from .execution import Controller, ExecutionTrace, Plant, conflict_report, simulate
from .human import (
    EstimatedDesire,
    Observation,
    deformation_desire,
    estimate_desire,
    human_desire,
)
from .planner import plan
from .scenario import Scenario
from .trajectory import (
    BoundaryState,
    QuinticSegment,
    Trajectory,
    hold_to_duration,
    max_distance,
)

__all__ = ["RunReport", "run_scenario", "run_matrix", "matrix_to_csv", "MATRIX_HEADER"]


@dataclass
class RunReport:
    """Everything a run produced; canonical form excludes wall time."""

    scenario_id: str
    policy_kind: str
    seed: int
    arbitration: dict
    execution: dict
    wall_time: float = 0.0
    trace: Optional[ExecutionTrace] = None
    fusion: Optional[FusionResult] = None

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "policy_kind": self.policy_kind,
            "seed": self.seed,
            "arbitration": self.arbitration,
            "execution": self.execution,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _observe_human(scenario: Scenario, rng: np.random.Generator) -> list[Observation]:
    """Sample the human's motion prefix, optionally with position noise."""
    est = scenario.estimation
    profile = scenario.human
    seg = QuinticSegment(
        scenario.start, BoundaryState(profile.desired_goal), profile.desired_duration
    )
    n = est.window
    span = est.window_span * profile.desired_duration
    times = np.arange(n) * (span / (n - 1))
    pos = seg.position(times)
    vel = seg.velocity(times)
    if profile.noise_std > 0:
        pos = pos + rng.normal(scale=profile.noise_std, size=pos.shape)
    return [
        Observation(float(times[i]), tuple(pos[i]), tuple(vel[i])) for i in range(n)
    ]


def _reference_horizon(scenario: Scenario, *trajectories: Trajectory) -> float:
    dt = scenario.sim.dt
    longest = max(t.duration for t in trajectories)
    return max(2, round(longest / dt + 1e-9)) * dt


def run_scenario(scenario: Scenario, seed: Optional[int] = None) -> RunReport:
    """Execute one scenario end to end; deterministic under a fixed seed."""
    t_start = time.perf_counter()
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    dt = scenario.sim.dt

    planned = plan(scenario.start, scenario.automation_cost, dt)
    desire_a = planned.trajectory
    desire_h = human_desire(scenario.human, scenario.start, dt)

    window = _observe_human(scenario, rng)
    estimated = estimate_desire(window, dt, scenario.estimation.duration_range)

    horizon = _reference_horizon(scenario, desire_a, desire_h, estimated.trajectory)
    desire_a = hold_to_duration(desire_a, horizon)
    desire_h = hold_to_duration(desire_h, horizon)
    estimate_ext = hold_to_duration(estimated.trajectory, horizon)

    policy = scenario.arbitration
    arb_info: dict = {
        "estimated_goal": list(estimated.goal_estimate),
        "estimated_duration": estimated.duration_estimate,
        "estimation_residual": estimated.residual,
        "estimation_degenerate": estimated.degenerate,
    }

    if isinstance(policy, Agreement):
        agreement_inputs = None
        if policy.config.scheme == "negotiation":
            agreement_inputs = {
                "agent_h": human_offer_policy(scenario.human),
                "agent_a": automation_offer_policy(
                    scenario.automation_cost,
                    scenario.start,
                    policy.config.automation_compliance,
                ),
                "start": scenario.start,
                "dt": dt,
            }
        fusion = arbitrate(
            policy,
            desire_a,
            desire_h,
            envelope=scenario.envelope,
            agreement_inputs=agreement_inputs,
        )
        outcome = fusion.details
        agreed, joint, distance = verify_agreement(outcome)
        arb_info.update(
            {
                "scheme": outcome.scheme,
                "agreed": agreed,
                "agreement_rounds": outcome.rounds,
                "agreement_distance": distance,
            }
        )
        if outcome.session is not None:
            arb_info["verdict"] = outcome.session.verdict
        if joint is not None:
            joint_ext = hold_to_duration(joint, horizon)
            ref_h = ref_a = joint_ext  # the guarantee: one shared reference
        else:
            ref_h, ref_a = desire_h, desire_a  # status quo: the tug-of-war
    elif isinstance(policy, AdditiveDeforming):
        at_index = (
            scenario.deformation_index
            if scenario.deformation_index is not None
            else desire_a.n_samples // 2
        )
        delta = deformation_desire(desire_a, scenario.deformation_force, at_index)
        fusion = arbitrate(policy, desire_a, delta, envelope=scenario.envelope)
        ref_h, ref_a = desire_h, fusion.trajectory
    else:
        fusion = arbitrate(policy, desire_a, estimate_ext, envelope=scenario.envelope)
        ref_h, ref_a = desire_h, fusion.trajectory

    arb_info.update(
        {
            "safe": fusion.safe,
            "trigger": fusion.trigger,
            "min_clearance": None
            if math.isinf(fusion.min_clearance)
            else fusion.min_clearance,
            "reference_gap": max_distance(ref_h, ref_a)
            if ref_h.is_compatible(ref_a)
            else None,
        }
    )

    plant = Plant(
        position=scenario.start.position,
        velocity=scenario.start.velocity,
        dt_sim=scenario.sim.dt_sim,
    )
    ctrl_h = Controller(scenario.sim.kp, scenario.sim.kd, ref_h, scenario.sim.u_max)
    ctrl_a = Controller(scenario.sim.kp, scenario.sim.kd, ref_a, scenario.sim.u_max)
    trace = simulate(plant, ctrl_h, ctrl_a, scenario.sim.duration)
    execution = conflict_report(trace)

    return RunReport(
        scenario_id=scenario.id,
        policy_kind=policy.kind,
        seed=seed,
        arbitration=arb_info,
        execution=execution,
        wall_time=time.perf_counter() - t_start,
        trace=trace,
        fusion=fusion,
    )


MATRIX_HEADER = (
    "scenario_id,policy,rep,seed,status,agreed,agreement_rounds,"
    "steady_state_conflict,mean_conflict,max_conflict,energy_h,energy_a,"
    "safe,min_clearance,error"
)


def run_matrix(scenarios: Sequence[Scenario], repetitions: int = 1) -> list[dict]:
    """Run every scenario `repetitions` times; failures become rows, not raises.

    Repetition r uses seed + r so repeated rows are independent but
    reproducible. Row order is scenarios-major, deterministic.
    """
    if not scenarios:
        raise ValueError("run_matrix needs at least one scenario")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows: list[dict] = []
    for scenario in scenarios:
        for rep in range(repetitions):
            seed = scenario.seed + rep
            row: dict = {
                "scenario_id": scenario.id,
                "policy": scenario.arbitration.kind,
                "rep": rep,
                "seed": seed,
            }
            try:
                report = run_scenario(scenario, seed=seed)
            except Exception as exc:  # noqa: BLE001 - matrix must continue
                row.update(status="failed", error=str(exc))
            else:
                row.update(
                    status="ok",
                    agreed=report.arbitration.get("agreed", ""),
                    agreement_rounds=report.arbitration.get("agreement_rounds", ""),
                    steady_state_conflict=report.execution["steady_state_conflict"],
                    mean_conflict=report.execution["mean_conflict"],
                    max_conflict=report.execution["max_conflict"],
                    energy_h=report.execution["energy_h"],
                    energy_a=report.execution["energy_a"],
                    safe=report.arbitration["safe"],
                    min_clearance=report.arbitration["min_clearance"],
                    error="",
                )
            rows.append(row)
    return rows


def _csv_cell(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def matrix_to_csv(rows: Sequence[dict]) -> str:
    out = io.StringIO()
    out.write(MATRIX_HEADER + "\n")
    columns = MATRIX_HEADER.split(",")
    for row in rows:
        out.write(",".join(_csv_cell(row.get(c)) for c in columns) + "\n")
    return out.getvalue()
