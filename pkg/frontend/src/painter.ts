// Thin canvas painter for the scene graph. All geometry arrives in screen
// coordinates; this file only maps styles to strokes and fills.

import type { SceneNode } from "./scene.js";

const STROKES: Record<string, string> = {
  "automation-desire": "#7a5cff",
  "automation-counter": "#b05cff",
  "own-offer": "#1f8ef1",
  "joint-agreed": "#11b981",
  "executed-path": "#f59e0b",
};

const WIDTHS: Record<string, number> = {
  "joint-agreed": 3.5,
  "executed-path": 2.5,
};

export function paint(
  ctx: CanvasRenderingContext2D,
  nodes: SceneNode[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#0d1117";
  ctx.fillRect(0, 0, width, height);

  for (const node of nodes) {
    switch (node.kind) {
      case "band":
        ctx.fillStyle = "rgba(80, 120, 80, 0.15)";
        ctx.fillRect(0, node.yTopPx, width, node.yBottomPx - node.yTopPx);
        break;
      case "disc":
        ctx.beginPath();
        ctx.arc(node.center[0], node.center[1], node.radiusPx, 0, 2 * Math.PI);
        ctx.fillStyle = "rgba(220, 70, 70, 0.45)";
        ctx.fill();
        break;
      case "polyline": {
        if (node.points.length < 2) break;
        ctx.beginPath();
        ctx.moveTo(node.points[0][0], node.points[0][1]);
        for (const [x, y] of node.points.slice(1)) ctx.lineTo(x, y);
        ctx.strokeStyle = STROKES[node.style] ?? "#8b949e";
        ctx.lineWidth = WIDTHS[node.style] ?? 1.5;
        ctx.setLineDash(node.style === "automation-desire" ? [6, 4] : []);
        ctx.stroke();
        ctx.setLineDash([]);
        break;
      }
      case "marker":
        ctx.beginPath();
        ctx.arc(node.at[0], node.at[1], 5, 0, 2 * Math.PI);
        ctx.fillStyle = STROKES[node.style.replace(/-goal$/, "")] ?? "#e6edf3";
        ctx.fill();
        if (node.label) {
          ctx.fillStyle = "#e6edf3";
          ctx.font = "11px sans-serif";
          ctx.fillText(node.label, node.at[0] + 8, node.at[1] - 6);
        }
        break;
      case "gauge": {
        const w = 160;
        const frac = Math.min(node.value / 16.0, 1.0);
        ctx.fillStyle = "#30363d";
        ctx.fillRect(width - w - 16, 12, w, 12);
        ctx.fillStyle = frac > 0.01 ? "#f85149" : "#11b981";
        ctx.fillRect(width - w - 16, 12, w * frac, 12);
        ctx.fillStyle = "#e6edf3";
        ctx.font = "11px sans-serif";
        ctx.fillText(`${node.label}: ${node.value.toFixed(4)}`, width - w - 16, 38);
        break;
      }
      case "text":
        // round log is painted into the DOM list, not the canvas
        break;
    }
  }
}
