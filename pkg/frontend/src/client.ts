// Session client: owns the view state, numbers outbound messages and
// folds inbound ones. Transport is injected so tests can script it; the
// browser entry point wires in a WebSocket and the resume handshake.

import type {
  ClientMessage,
  ScenarioDoc,
  ServerMessage,
  Theta,
} from "./protocol.js";
import { PROTOCOL_VERSION, parseServerMessage } from "./protocol.js";
import { applyMessage, initialState, type ViewState } from "./state.js";

export type SendFn = (message: ClientMessage) => void;

export class SessionClient {
  state: ViewState = initialState();
  private clientSeq = 0;
  private readonly send: SendFn;
  private readonly onChange: (state: ViewState) => void;

  constructor(send: SendFn, onChange: (state: ViewState) => void = () => {}) {
    this.send = send;
    this.onChange = onChange;
  }

  nextSeq(): number {
    this.clientSeq += 1;
    return this.clientSeq;
  }

  hello(): void {
    this.send({
      kind: "hello",
      session: this.state.sessionId,
      seq: this.nextSeq(),
      version: PROTOCOL_VERSION,
    });
  }

  /** Reconnect handshake: replays everything after the last seen seq. */
  resume(): void {
    if (this.state.sessionId === null) {
      this.hello();
      return;
    }
    this.send({
      kind: "hello",
      session: this.state.sessionId,
      seq: this.nextSeq(),
      version: PROTOCOL_VERSION,
      resume_from: this.state.lastServerSeq,
    });
  }

  sendScenario(scenario: ScenarioDoc): void {
    this.send({
      kind: "scenario",
      session: this.state.sessionId,
      seq: this.nextSeq(),
      scenario,
    });
  }

  sendOffer(theta: Theta): void {
    this.send({
      kind: "human_offer",
      session: this.state.sessionId,
      seq: this.nextSeq(),
      theta,
    });
  }

  accept(): void {
    this.send({ kind: "accept", session: this.state.sessionId, seq: this.nextSeq() });
  }

  receive(raw: string | ServerMessage): void {
    const msg = typeof raw === "string" ? parseServerMessage(raw) : raw;
    const next = applyMessage(this.state, msg);
    if (next !== this.state) {
      this.state = next;
      this.onChange(next);
    }
  }
}
