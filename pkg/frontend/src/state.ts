// Client view state: a pure reducer over server messages. Every number on
// screen (trajectories, utilities, risks, conflict) is a stored payload
// from the last relevant message; resume replays are deduplicated by the
// server sequence number, so an interrupted and an uninterrupted session
// fold to identical states.

import type {
  DesirePayload,
  ExecutionTick,
  ScenarioDoc,
  ServerMessage,
  Theta,
  WireTrajectory,
} from "./protocol.js";
import { expandBounds, type WorldBounds } from "./transform.js";

export type Phase =
  | "connecting"
  | "configuring"
  | "negotiating"
  | "agreed"
  | "executing"
  | "done"
  | "failed";

export interface RoundEntry {
  round: number;
  kind: "counter" | "agreed";
  theta: Theta;
  utility: number | null;
  risk: number | null;
}

export interface ViewState {
  sessionId: string | null;
  phase: Phase;
  scenario: ScenarioDoc | null;
  automationDesire: DesirePayload | null;
  ownOffer: { theta: Theta; trajectory: WireTrajectory } | null;
  automationCounter: {
    theta: Theta;
    trajectory: WireTrajectory;
    utility: number;
    risk: number;
  } | null;
  joint: WireTrajectory | null;
  jointTheta: Theta | null;
  roundLog: RoundEntry[];
  ticks: ExecutionTick[];
  playhead: number; // index into ticks the playback has reached
  lastServerSeq: number;
  lastError: { code: string; detail: string } | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    phase: "connecting",
    scenario: null,
    automationDesire: null,
    ownOffer: null,
    automationCounter: null,
    joint: null,
    jointTheta: null,
    roundLog: [],
    ticks: [],
    playhead: 0,
    lastServerSeq: 0,
    lastError: null,
  };
}

export function applyMessage(state: ViewState, msg: ServerMessage): ViewState {
  if (msg.seq <= state.lastServerSeq) {
    return state; // duplicate from a resume replay
  }
  const next: ViewState = { ...state, lastServerSeq: msg.seq };
  switch (msg.kind) {
    case "hello":
      next.sessionId = msg.session;
      next.phase = "configuring";
      return next;
    case "scenario":
      next.scenario = msg.scenario;
      next.automationDesire = msg.automation_desire;
      next.phase = "negotiating";
      return next;
    case "automation_counter":
      next.automationCounter = {
        theta: msg.theta,
        trajectory: msg.trajectory,
        utility: msg.utility,
        risk: msg.risk,
      };
      next.ownOffer = { theta: msg.human_theta, trajectory: msg.human_trajectory };
      next.roundLog = [
        ...state.roundLog,
        {
          round: msg.round,
          kind: "counter",
          theta: msg.theta,
          utility: msg.utility,
          risk: msg.risk,
        },
      ];
      return next;
    case "agreed":
      next.joint = msg.joint;
      next.jointTheta = msg.theta;
      next.phase = "agreed";
      next.roundLog = [
        ...state.roundLog,
        { round: msg.round, kind: "agreed", theta: msg.theta, utility: null, risk: null },
      ];
      return next;
    case "execution_tick":
      next.phase = msg.final ? "done" : "executing";
      next.ticks = [...state.ticks, msg];
      return next;
    case "error":
      next.lastError = { code: msg.code, detail: msg.detail };
      if (msg.code === "exhausted") {
        next.phase = "failed";
      }
      return next;
    default:
      return next;
  }
}

export function applyAll(state: ViewState, msgs: ServerMessage[]): ViewState {
  return msgs.reduce(applyMessage, state);
}

/** Current conflict value at the playback position (0 before execution). */
export function conflictAtPlayhead(state: ViewState): number {
  if (state.ticks.length === 0) return 0;
  const i = Math.min(state.playhead, state.ticks.length - 1);
  return state.ticks[i].conflict;
}

/** Workspace for offers and rendering, derived from scenario geometry. */
export function workspaceBounds(state: ViewState): WorldBounds {
  const xs: number[] = [];
  const ys: number[] = [];
  const push = (p: readonly [number, number] | undefined) => {
    if (p) {
      xs.push(p[0]);
      ys.push(p[1]);
    }
  };
  const sc = state.scenario;
  if (sc) {
    push(sc.start?.p);
    push(sc.human?.desired_goal);
    push(sc.automation_cost?.goal);
    for (const ob of sc.envelope?.obstacles ?? []) push(ob.center);
    const corridor = sc.envelope?.corridor;
    if (corridor && Number.isFinite(corridor.width)) {
      ys.push(corridor.center_y - corridor.width / 2, corridor.center_y + corridor.width / 2);
    }
  }
  if (state.automationDesire) push(state.automationDesire.theta.goal);
  if (xs.length === 0) {
    return { xmin: -2, xmax: 2, ymin: -2, ymax: 2 };
  }
  return expandBounds(
    {
      xmin: Math.min(...xs),
      xmax: Math.max(...xs),
      ymin: Math.min(...ys),
      ymax: Math.max(...ys),
    },
    0.5,
  );
}
