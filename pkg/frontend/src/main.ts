// Browser entry point: WebSocket wiring, drag handling, playback control.

import { SessionClient } from "./client.js";
import { offerFromGesture } from "./gestures.js";
import type { ClientMessage, ScenarioDoc } from "./protocol.js";
import { renderScene, roundLogLines, sceneViewportBounds } from "./scene.js";
import { paint } from "./painter.js";
import { fitViewport } from "./transform.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const logEl = document.getElementById("round-log") as HTMLUListElement;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const acceptBtn = document.getElementById("accept") as HTMLButtonElement;
const speedEl = document.getElementById("speed") as HTMLInputElement;
const durationEl = document.getElementById("duration") as HTMLInputElement;
const scenarioEl = document.getElementById("scenario-json") as HTMLTextAreaElement;
const startBtn = document.getElementById("start") as HTMLButtonElement;
const clampCue = document.getElementById("clamp-cue") as HTMLSpanElement;

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
let ws = new WebSocket(wsUrl);

const client = new SessionClient(send, redraw);

function send(message: ClientMessage): void {
  ws.send(JSON.stringify(message));
}

function connect(resume: boolean): void {
  ws = new WebSocket(wsUrl);
  ws.onopen = () => (resume ? client.resume() : client.hello());
  ws.onmessage = (ev) => client.receive(ev.data as string);
  ws.onclose = () => {
    statusEl.textContent = "disconnected; retrying";
    setTimeout(() => connect(true), 1000);
  };
}

ws.onopen = () => client.hello();
ws.onmessage = (ev) => client.receive(ev.data as string);
ws.onclose = () => setTimeout(() => connect(true), 1000);

startBtn.onclick = () => {
  const doc = JSON.parse(scenarioEl.value) as ScenarioDoc;
  client.sendScenario(doc);
};

acceptBtn.onclick = () => client.accept();

canvas.addEventListener("pointerup", (ev) => {
  if (client.state.phase !== "negotiating") return;
  const rect = canvas.getBoundingClientRect();
  const vp = fitViewport(sceneViewportBounds(client.state), canvas.width, canvas.height);
  const result = offerFromGesture(
    client.state,
    vp,
    { toPx: [ev.clientX - rect.left, ev.clientY - rect.top] },
    Number(durationEl.value) || 2.0,
    client.nextSeq(),
  );
  clampCue.textContent = result.clamped ? "offer clamped to workspace" : "";
  send(result.message);
});

// client-side playback: the server streams ticks once; the playhead
// advances at the selected speed over the buffered trace
let lastFrame = performance.now();
let carry = 0;
function tickPlayback(now: number): void {
  const dtWall = (now - lastFrame) / 1000;
  lastFrame = now;
  const state = client.state;
  if (state.ticks.length > 0 && state.playhead < state.ticks.length - 1) {
    const dtSim = state.scenario?.sim?.dt_sim ?? 0.01;
    carry += (dtWall * Number(speedEl.value)) / dtSim;
    const steps = Math.floor(carry);
    if (steps > 0) {
      carry -= steps;
      state.playhead = Math.min(state.playhead + steps, state.ticks.length - 1);
      redraw();
    }
  }
  requestAnimationFrame(tickPlayback);
}
requestAnimationFrame(tickPlayback);

function redraw(): void {
  const state = client.state;
  statusEl.textContent = state.lastError
    ? `${state.phase} (${state.lastError.code})`
    : state.phase;
  const vp = fitViewport(sceneViewportBounds(state), canvas.width, canvas.height);
  paint(ctx, renderScene(state, vp), canvas.width, canvas.height);
  logEl.replaceChildren(
    ...roundLogLines(state).map((line) => {
      const li = document.createElement("li");
      li.textContent = line;
      return li;
    }),
  );
}

redraw();
