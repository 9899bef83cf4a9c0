"""Live negotiation sessions: a real human in place of the simulated one.

The engine speaks a JSON message protocol (documented in
docs/protocol.md, version 1): the client opens with hello, supplies a
scenario whose arbitration is negotiation-based agreement, then
exchanges human_offer / automation_counter rounds following exactly the
same concession rules as the batch engine. Acceptance or convergence
yields agreed with the joint trajectory, after which the execution
trace is streamed tick by tick.

The engine is deterministic: given the same scenario and the same
inbound message sequence it emits identical outbound messages, which is
what makes golden-transcript testing and batch/live cross-checks
possible. Wall-clock concerns (idle timeout, resume window, real-time
pacing) live in :class:`SessionService` and the transport layer, keyed
by an injectable clock.
"""

from __future__ import annotations

import itertools
import uuid
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .agreement import (
    AgreementConfig,
    OfferPolicy,
    Theta,
    _evaluate_round,
    _theta_materializer,
    automation_offer_policy,
    human_offer_policy,
    negotiation_horizon,
)
from .arbitration import Agreement
from .execution import Controller, Plant, simulate
from .scenario import Scenario
from .trajectory import Trajectory, trajectory_to_dict

__all__ = ["PROTOCOL_VERSION", "SessionEngine", "SessionService"]

PROTOCOL_VERSION = 1

_CLIENT_KINDS = {"hello", "scenario", "human_offer", "accept"}


class SessionEngine:
    """Protocol state machine for one live session.

    Phases: configuring -> negotiating -> agreed -> executing -> done.
    Out-of-phase or malformed messages produce error replies and leave
    the state unchanged.
    """

    def __init__(self, session_id: str):
        self.session_id = session_id
        self.phase = "configuring"
        self.scenario: Optional[Scenario] = None
        self.config: Optional[AgreementConfig] = None
        self.joint: Optional[Trajectory] = None
        self.joint_theta: Optional[Theta] = None
        self.round = 0
        self.outbound_log: list[dict] = []
        self._out_seq = itertools.count(1)
        self._last_client_seq: Optional[int] = None
        self._agent_h: Optional[OfferPolicy] = None
        self._agent_a: Optional[OfferPolicy] = None
        self._theta_a: Optional[Theta] = None
        self._theta_h: Optional[Theta] = None
        self._materialize = None
        self._u_worst_h: Optional[float] = None
        self._u_worst_a: Optional[float] = None

    # -- outbound helpers --------------------------------------------------

    def _emit(self, kind: str, **payload) -> dict:
        msg = {"kind": kind, "session": self.session_id, "seq": next(self._out_seq)}
        msg.update(payload)
        self.outbound_log.append(msg)
        return msg

    def _error(self, code: str, detail: str) -> dict:
        return self._emit("error", code=code, detail=detail)

    def replay_after(self, last_seq: int) -> list[dict]:
        """Outbound messages with seq greater than last_seq (for resume)."""
        return [m for m in self.outbound_log if m["seq"] > last_seq]

    # -- inbound dispatch ----------------------------------------------------

    def handle(self, message: dict) -> list[dict]:
        """Process one client message, returning the outbound replies."""
        if not isinstance(message, dict) or "kind" not in message:
            return [self._error("bad_message", "message must be an object with a kind")]
        kind = message["kind"]
        if kind not in _CLIENT_KINDS:
            return [self._error("unknown_kind", f"unknown message kind {kind!r}")]
        seq = message.get("seq")
        if not isinstance(seq, int):
            return [self._error("bad_message", "missing integer seq")]
        if self._last_client_seq is not None and seq <= self._last_client_seq:
            return [
                self._error(
                    "bad_seq",
                    f"sequence number {seq} not greater than {self._last_client_seq}",
                )
            ]
        self._last_client_seq = seq

        handler = getattr(self, f"_on_{kind}")
        return handler(message)

    def _on_hello(self, message: dict) -> list[dict]:
        version = message.get("version")
        if version != PROTOCOL_VERSION:
            return [
                self._error(
                    "bad_version",
                    f"protocol version {version!r} unsupported (server speaks {PROTOCOL_VERSION})",
                )
            ]
        return [self._emit("hello", version=PROTOCOL_VERSION)]

    def _on_scenario(self, message: dict) -> list[dict]:
        if self.phase != "configuring":
            return [self._error("out_of_phase", f"scenario not accepted in {self.phase}")]
        try:
            scenario = Scenario.from_dict(message["scenario"])
        except (KeyError, TypeError, ValueError) as exc:
            return [self._error("bad_scenario", str(exc))]
        policy = scenario.arbitration
        if not isinstance(policy, Agreement) or policy.config.scheme != "negotiation":
            return [
                self._error(
                    "live_requires_negotiation",
                    "live sessions need an agreement policy with the negotiation scheme",
                )
            ]
        self.scenario = scenario
        self.config = policy.config
        self._agent_h = human_offer_policy(scenario.human)
        self._agent_a = automation_offer_policy(
            scenario.automation_cost, scenario.start, self.config.automation_compliance
        )
        self._theta_a = self._agent_a.initial
        self.phase = "negotiating"
        return [
            self._emit(
                "scenario",
                scenario=scenario.to_dict(),
                automation_desire=self._desire_payload(),
            )
        ]

    def _desire_payload(self) -> dict:
        # the automation reveals its opening desire up front (configurable
        # off by omitting it from the UI, not by hiding it here)
        horizon = negotiation_horizon(self._theta_a, self._theta_a, self.scenario.sim.dt)
        mat = _theta_materializer(self.scenario.start, self.scenario.sim.dt, horizon)
        return {
            "theta": self._theta_a.to_dict(),
            "trajectory": trajectory_to_dict(mat(self._theta_a)),
        }

    def _ensure_session_grid(self, first_theta_h: Theta) -> None:
        if self._materialize is not None:
            return
        horizon = negotiation_horizon(first_theta_h, self._theta_a, self.scenario.sim.dt)
        self._materialize = _theta_materializer(
            self.scenario.start, self.scenario.sim.dt, horizon
        )
        # worst-case utilities freeze at the first exchanged pair
        self._u_worst_h = self._agent_h.utility(self._theta_a)
        self._u_worst_a = self._agent_a.utility(first_theta_h)

    def _on_human_offer(self, message: dict) -> list[dict]:
        if self.phase != "negotiating":
            return [self._error("out_of_phase", f"human_offer not accepted in {self.phase}")]
        try:
            theta_h = Theta.from_dict(message["theta"])
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            return [self._error("bad_offer", f"malformed theta: {exc}")]
        self._ensure_session_grid(theta_h)
        self._theta_h = theta_h
        self.round += 1

        ev = _evaluate_round(
            theta_h,
            self._theta_a,
            self._agent_h,
            self._agent_a,
            self._u_worst_h,
            self._u_worst_a,
            self.config,
            self._materialize,
        )
        if ev.gap <= self.config.epsilon:
            return self._agree(theta_h.midpoint(self._theta_a))
        if ev.accepts_a:
            return self._agree(theta_h)
        if self.round >= self.config.max_rounds:
            if self.config.fallback == "midpoint":
                return self._agree(theta_h.midpoint(self._theta_a))
            msgs = [self._error("exhausted", "negotiation exhausted without agreement")]
            self.phase = "done"
            return msgs
        # Zeuthen rule: the automation concedes when its risk is not higher
        if ev.risk_a <= ev.risk_h:
            self._theta_a = ev.next_a
        counter_traj = self._materialize(self._theta_a)
        return [
            self._emit(
                "automation_counter",
                round=self.round,
                theta=self._theta_a.to_dict(),
                trajectory=trajectory_to_dict(counter_traj),
                utility=self._agent_a.utility(self._theta_a),
                risk=ev.risk_a,
                human_theta=theta_h.to_dict(),
                human_trajectory=trajectory_to_dict(ev.traj_h),
            )
        ]

    def _on_accept(self, message: dict) -> list[dict]:
        if self.phase != "negotiating":
            return [self._error("out_of_phase", f"accept not accepted in {self.phase}")]
        if self._theta_a is None:
            return [self._error("bad_message", "nothing to accept yet")]
        self._ensure_session_grid(self._theta_a)
        return self._agree(self._theta_a)

    def _agree(self, joint_theta: Theta) -> list[dict]:
        self.joint_theta = joint_theta
        self.joint = self._materialize(joint_theta)
        self.phase = "agreed"
        return [
            self._emit(
                "agreed",
                round=self.round,
                theta=joint_theta.to_dict(),
                joint=trajectory_to_dict(self.joint),
            )
        ]

    # -- execution streaming -------------------------------------------------

    def execution_ticks(self) -> Iterator[dict]:
        """Stream the post-agreement execution; valid only once agreed.

        Both controllers track the identical joint trajectory, so the
        conflict stays identically zero. The final tick carries
        final=true and moves the session to done.
        """
        if self.phase != "agreed":
            raise ValueError(f"execution requires the agreed phase, not {self.phase}")
        self.phase = "executing"
        sim = self.scenario.sim
        ref = self.joint
        plant = Plant(
            position=self.scenario.start.position,
            velocity=self.scenario.start.velocity,
            dt_sim=sim.dt_sim,
        )
        ctrl = Controller(sim.kp, sim.kd, ref, sim.u_max)
        trace = simulate(plant, ctrl, ctrl, sim.duration)
        n = trace.n_ticks
        for k in range(n):
            yield self._emit(
                "execution_tick",
                t=float(trace.t[k]),
                x={
                    "p": [float(trace.positions[k, 0]), float(trace.positions[k, 1])],
                    "v": [float(trace.velocities[k, 0]), float(trace.velocities[k, 1])],
                },
                u_H=[float(trace.u_h[k, 0]), float(trace.u_h[k, 1])],
                u_A=[float(trace.u_a[k, 0]), float(trace.u_a[k, 1])],
                conflict=float(trace.conflict[k]),
                final=k == n - 1,
            )
        self.phase = "done"


@dataclass
class _SessionSlot:
    engine: SessionEngine
    last_activity: float
    disconnected_at: Optional[float] = None


class SessionService:
    """Registry of concurrent sessions with timeout and resume handling.

    Time enters only through the injected clock, so tests drive it
    manually. Each session processes its messages strictly in arrival
    order; there is no state shared across sessions.
    """

    def __init__(
        self,
        clock: Callable[[], float],
        idle_timeout: float = 300.0,
        resume_window: float = 60.0,
    ):
        self._clock = clock
        self.idle_timeout = idle_timeout
        self.resume_window = resume_window
        self._sessions: dict[str, _SessionSlot] = {}

    def open_session(self) -> SessionEngine:
        session_id = uuid.uuid4().hex
        engine = SessionEngine(session_id)
        self._sessions[session_id] = _SessionSlot(engine, self._clock())
        return engine

    def get(self, session_id: str) -> Optional[SessionEngine]:
        slot = self._sessions.get(session_id)
        return slot.engine if slot else None

    def handle(self, message: dict) -> list[dict]:
        """Route a raw client message: opens, resumes or forwards."""
        self.sweep()
        if not isinstance(message, dict):
            return [_detached_error("bad_message", "message must be a JSON object")]
        if message.get("kind") == "hello" and not message.get("session"):
            engine = self.open_session()
            return engine.handle(message)
        session_id = message.get("session")
        slot = self._sessions.get(session_id)
        if slot is None:
            return [_detached_error("unknown_session", f"no session {session_id!r}")]
        slot.last_activity = self._clock()
        slot.disconnected_at = None
        if message.get("kind") == "hello" and "resume_from" in message:
            return slot.engine.replay_after(int(message["resume_from"]))
        return slot.engine.handle(message)

    def mark_disconnected(self, session_id: str) -> None:
        slot = self._sessions.get(session_id)
        if slot is not None:
            slot.disconnected_at = self._clock()

    def sweep(self) -> list[str]:
        """Discard sessions past their resume window or idle timeout."""
        now = self._clock()
        dead = []
        for sid, slot in self._sessions.items():
            if (
                slot.disconnected_at is not None
                and now - slot.disconnected_at > self.resume_window
            ):
                dead.append(sid)
            elif (
                slot.engine.phase == "negotiating"
                and now - slot.last_activity > self.idle_timeout
            ):
                slot.engine.phase = "done"
                dead.append(sid)
        for sid in dead:
            self._sessions.pop(sid, None)
        return dead


def _detached_error(code: str, detail: str) -> dict:
    return {"kind": "error", "session": None, "seq": 0, "code": code, "detail": detail}
