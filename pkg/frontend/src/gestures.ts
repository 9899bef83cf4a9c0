// Turning a drag gesture into a human_offer message: the drop point maps
// through the inverse world transform and is clamped to the scenario
// workspace (clamped drops are flagged for a visual cue, never dropped).

import type { HumanOffer, Theta } from "./protocol.js";
import { workspaceBounds, type ViewState } from "./state.js";
import { clampToBounds, screenToWorld, type Viewport } from "./transform.js";

export interface Drag {
  toPx: [number, number];
}

export interface GestureOffer {
  message: HumanOffer;
  clamped: boolean;
}

export function offerFromGesture(
  state: ViewState,
  vp: Viewport,
  drag: Drag,
  duration: number,
  seq: number,
): GestureOffer {
  if (state.phase !== "negotiating") {
    throw new Error(`offers require the negotiating phase, not ${state.phase}`);
  }
  const world = screenToWorld(vp, drag.toPx);
  const { point, clamped } = clampToBounds(world, workspaceBounds(state));
  const theta: Theta = { goal: point, duration };
  return {
    message: {
      kind: "human_offer",
      session: state.sessionId,
      seq,
      theta,
    },
    clamped,
  };
}
