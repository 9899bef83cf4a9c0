// Deterministic mapping from view state to a drawable scene graph in
// screen coordinates. Trajectory polylines are the received samples
// mapped point-for-point through the viewport; nothing is resampled.

import type { Vec2, WireTrajectory } from "./protocol.js";
import { conflictAtPlayhead, workspaceBounds, type ViewState } from "./state.js";
import { worldToScreen, type Viewport } from "./transform.js";

export interface PolylineNode {
  kind: "polyline";
  style: string;
  points: Vec2[];
}

export interface MarkerNode {
  kind: "marker";
  style: string;
  at: Vec2;
  label?: string;
}

export interface DiscNode {
  kind: "disc";
  style: string;
  center: Vec2;
  radiusPx: number;
}

export interface BandNode {
  kind: "band";
  style: string;
  yTopPx: number;
  yBottomPx: number;
}

export interface GaugeNode {
  kind: "gauge";
  label: string;
  value: number;
}

export interface TextNode {
  kind: "text";
  row: number;
  text: string;
}

export type SceneNode =
  | PolylineNode
  | MarkerNode
  | DiscNode
  | BandNode
  | GaugeNode
  | TextNode;

function polyline(vp: Viewport, t: WireTrajectory, style: string): PolylineNode {
  return {
    kind: "polyline",
    style,
    points: t.samples.map((s) => worldToScreen(vp, s.p)),
  };
}

function fmt(x: number): string {
  return x.toFixed(3);
}

export function roundLogLines(state: ViewState): string[] {
  return state.roundLog.map((r) => {
    if (r.kind === "agreed") {
      return `round ${r.round}: agreed on goal (${fmt(r.theta.goal[0])}, ${fmt(
        r.theta.goal[1],
      )}) in ${fmt(r.theta.duration)} s`;
    }
    return `round ${r.round}: counter goal (${fmt(r.theta.goal[0])}, ${fmt(
      r.theta.goal[1],
    )}) dur ${fmt(r.theta.duration)} s, utility ${fmt(r.utility ?? 0)}, risk ${fmt(
      r.risk ?? 0,
    )}`;
  });
}

export function renderScene(state: ViewState, vp: Viewport): SceneNode[] {
  const nodes: SceneNode[] = [];

  const envelope = state.scenario?.envelope;
  const corridor = envelope?.corridor;
  if (corridor && Number.isFinite(corridor.width)) {
    const top = worldToScreen(vp, [0, corridor.center_y + corridor.width / 2])[1];
    const bottom = worldToScreen(vp, [0, corridor.center_y - corridor.width / 2])[1];
    nodes.push({ kind: "band", style: "corridor", yTopPx: top, yBottomPx: bottom });
  }
  for (const ob of envelope?.obstacles ?? []) {
    nodes.push({
      kind: "disc",
      style: "obstacle",
      center: worldToScreen(vp, ob.center),
      radiusPx: ob.radius * vp.scale,
    });
  }

  if (state.automationDesire) {
    nodes.push(polyline(vp, state.automationDesire.trajectory, "automation-desire"));
    nodes.push({
      kind: "marker",
      style: "automation-desire-goal",
      at: worldToScreen(vp, state.automationDesire.theta.goal),
      label: "automation desire",
    });
  }
  if (state.ownOffer) {
    nodes.push(polyline(vp, state.ownOffer.trajectory, "own-offer"));
    nodes.push({
      kind: "marker",
      style: "own-offer-goal",
      at: worldToScreen(vp, state.ownOffer.theta.goal),
      label: "your offer",
    });
  }
  if (state.automationCounter) {
    nodes.push(polyline(vp, state.automationCounter.trajectory, "automation-counter"));
    nodes.push({
      kind: "marker",
      style: "automation-counter-goal",
      at: worldToScreen(vp, state.automationCounter.theta.goal),
      label: "counteroffer",
    });
  }
  if (state.joint) {
    nodes.push(polyline(vp, state.joint, "joint-agreed"));
  }

  if (state.ticks.length > 0) {
    const upto = Math.min(state.playhead, state.ticks.length - 1);
    const executed: Vec2[] = [];
    for (let i = 0; i <= upto; i++) {
      executed.push(worldToScreen(vp, state.ticks[i].x.p));
    }
    nodes.push({ kind: "polyline", style: "executed-path", points: executed });
    nodes.push({
      kind: "marker",
      style: "playhead",
      at: executed[executed.length - 1],
      label: `t=${state.ticks[upto].t.toFixed(2)}s`,
    });
  }
  nodes.push({ kind: "gauge", label: "conflict", value: conflictAtPlayhead(state) });

  roundLogLines(state).forEach((text, row) => {
    nodes.push({ kind: "text", row, text });
  });
  return nodes;
}

export function sceneViewportBounds(state: ViewState) {
  return workspaceBounds(state);
}
