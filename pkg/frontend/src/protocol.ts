// Wire types for the live session protocol (docs/protocol.md, version 1).
// The client renders exactly these payloads and never recomputes
// trajectory or utility semantics locally.

export const PROTOCOL_VERSION = 1;

export type Vec2 = [number, number];

export interface WireSample {
  p: Vec2;
  v: Vec2;
}

export interface WireTrajectory {
  dt: number;
  samples: WireSample[];
}

export interface Theta {
  goal: Vec2;
  duration: number;
}

export interface ObstacleDoc {
  center: Vec2;
  radius: number;
}

export interface EnvelopeDoc {
  corridor?: { center_y: number; width: number };
  obstacles?: ObstacleDoc[];
}

// scenario documents are produced and validated server-side; the client
// only reads the handful of fields it renders
export interface ScenarioDoc {
  id?: string;
  start?: { p: Vec2; v: Vec2 };
  human?: { desired_goal: Vec2; desired_duration: number };
  automation_cost?: { goal: Vec2; horizon: number };
  envelope?: EnvelopeDoc;
  sim?: { duration?: number; dt_sim?: number };
  [key: string]: unknown;
}

interface MessageBase {
  kind: string;
  session: string | null;
  seq: number;
}

export interface HelloReply extends MessageBase {
  kind: "hello";
  version: number;
}

export interface DesirePayload {
  theta: Theta;
  trajectory: WireTrajectory;
}

export interface ScenarioEcho extends MessageBase {
  kind: "scenario";
  scenario: ScenarioDoc;
  automation_desire: DesirePayload;
}

export interface AutomationCounter extends MessageBase {
  kind: "automation_counter";
  round: number;
  theta: Theta;
  trajectory: WireTrajectory;
  utility: number;
  risk: number;
  human_theta: Theta;
  human_trajectory: WireTrajectory;
}

export interface AgreedMessage extends MessageBase {
  kind: "agreed";
  round: number;
  theta: Theta;
  joint: WireTrajectory;
}

export interface ExecutionTick extends MessageBase {
  kind: "execution_tick";
  t: number;
  x: { p: Vec2; v: Vec2 };
  u_H: Vec2;
  u_A: Vec2;
  conflict: number;
  final: boolean;
}

export interface ErrorMessage extends MessageBase {
  kind: "error";
  code: string;
  detail: string;
}

export type ServerMessage =
  | HelloReply
  | ScenarioEcho
  | AutomationCounter
  | AgreedMessage
  | ExecutionTick
  | ErrorMessage;

export interface ClientHello extends MessageBase {
  kind: "hello";
  version: number;
  resume_from?: number;
}

export interface ClientScenario extends MessageBase {
  kind: "scenario";
  scenario: ScenarioDoc;
}

export interface HumanOffer extends MessageBase {
  kind: "human_offer";
  theta: Theta;
}

export interface ClientAccept extends MessageBase {
  kind: "accept";
}

export type ClientMessage = ClientHello | ClientScenario | HumanOffer | ClientAccept;

export function parseServerMessage(raw: string): ServerMessage {
  return JSON.parse(raw) as ServerMessage;
}
