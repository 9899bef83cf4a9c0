// Golden transcript replay and the reconnect/resume invariant: the
// round log a human sees must not depend on connection luck.

import { describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import type { ClientMessage } from "../src/protocol.js";
import { roundLogLines } from "../src/scene.js";
import { applyAll, initialState } from "../src/state.js";
import { loadTranscript } from "./fixtures.js";

const TRANSCRIPT = loadTranscript("session_outbound.jsonl");

describe("golden transcript replay", () => {
  it("renders an identical round log on every replay", () => {
    const first = roundLogLines(applyAll(initialState(), TRANSCRIPT));
    const second = roundLogLines(applyAll(initialState(), TRANSCRIPT));
    expect(first).toEqual(second);
    expect(first.length).toBeGreaterThan(0);
    expect(first[first.length - 1]).toContain("agreed");
  });

  it("round log equals the per-message payload record", () => {
    const state = applyAll(initialState(), TRANSCRIPT);
    const expected = TRANSCRIPT.filter(
      (m) => m.kind === "automation_counter" || m.kind === "agreed",
    ).map((m) => ("round" in m ? m.round : -1));
    expect(state.roundLog.map((e) => e.round)).toEqual(expected);
  });

  it("reconnect with resume reproduces the uninterrupted round log", () => {
    // uninterrupted client
    const sentA: ClientMessage[] = [];
    const full = new SessionClient((m) => sentA.push(m));
    for (const msg of TRANSCRIPT) full.receive(msg);

    // interrupted client: drops after message k, then resumes with the
    // replay the server would send (everything after the last seen seq)
    const k = 7;
    const sentB: ClientMessage[] = [];
    const resumed = new SessionClient((m) => sentB.push(m));
    for (const msg of TRANSCRIPT.slice(0, k)) resumed.receive(msg);
    resumed.resume();
    const helloResume = sentB[sentB.length - 1];
    expect(helloResume.kind).toBe("hello");
    if (helloResume.kind === "hello") {
      expect(helloResume.resume_from).toBe(resumed.state.lastServerSeq);
      const replay = TRANSCRIPT.filter((m) => m.seq > helloResume.resume_from!);
      for (const msg of replay) resumed.receive(msg);
    }

    expect(roundLogLines(resumed.state)).toEqual(roundLogLines(full.state));
    expect(JSON.stringify(resumed.state)).toBe(JSON.stringify(full.state));
  });

  it("overlapping resume replay does not duplicate rounds", () => {
    const client = new SessionClient(() => {});
    for (const msg of TRANSCRIPT) client.receive(msg);
    const before = client.state.roundLog.length;
    // server replays a window that overlaps what we already saw
    for (const msg of TRANSCRIPT.slice(3)) client.receive(msg);
    expect(client.state.roundLog.length).toBe(before);
  });
});
