// World <-> screen mapping. Pure and exactly invertible: the screen is a
// uniform scale of the world with a y-flip (screen y grows downward).

import type { Vec2 } from "./protocol.js";

export interface WorldBounds {
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
}

export interface Viewport {
  scale: number; // pixels per meter
  originX: number; // screen x of world (0, ?)
  originY: number; // screen y of world (?, 0)
  width: number;
  height: number;
}

export function fitViewport(
  bounds: WorldBounds,
  width: number,
  height: number,
  marginPx = 24,
): Viewport {
  const spanX = Math.max(bounds.xmax - bounds.xmin, 1e-9);
  const spanY = Math.max(bounds.ymax - bounds.ymin, 1e-9);
  const scale = Math.min(
    (width - 2 * marginPx) / spanX,
    (height - 2 * marginPx) / spanY,
  );
  const centerX = 0.5 * (bounds.xmin + bounds.xmax);
  const centerY = 0.5 * (bounds.ymin + bounds.ymax);
  return {
    scale,
    originX: width / 2 - centerX * scale,
    originY: height / 2 + centerY * scale,
    width,
    height,
  };
}

export function worldToScreen(vp: Viewport, p: Vec2): Vec2 {
  return [vp.originX + p[0] * vp.scale, vp.originY - p[1] * vp.scale];
}

export function screenToWorld(vp: Viewport, q: Vec2): Vec2 {
  return [(q[0] - vp.originX) / vp.scale, (vp.originY - q[1]) / vp.scale];
}

export function clampToBounds(p: Vec2, bounds: WorldBounds): { point: Vec2; clamped: boolean } {
  const x = Math.min(Math.max(p[0], bounds.xmin), bounds.xmax);
  const y = Math.min(Math.max(p[1], bounds.ymin), bounds.ymax);
  return { point: [x, y], clamped: x !== p[0] || y !== p[1] };
}

export function expandBounds(bounds: WorldBounds, pad: number): WorldBounds {
  return {
    xmin: bounds.xmin - pad,
    xmax: bounds.xmax + pad,
    ymin: bounds.ymin - pad,
    ymax: bounds.ymax + pad,
  };
}
