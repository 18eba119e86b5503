/**
 * Wire protocol of the live session service: JSON text frames, one
 * tagged message per frame.
 *
 * Client → server: hello, set_ped_speed, set_intention, pause, resume, reset.
 * Server → client: tick, ended, error.
 */

export interface Hello {
  type: "hello";
  controller?: string;
  seed?: number;
  scenario?: Record<string, unknown>;
  config?: Record<string, unknown>;
  start_paused?: boolean;
}

export interface SetPedSpeed {
  type: "set_ped_speed";
  vy: number;
}

export interface SetIntention {
  type: "set_intention";
  intention: number;
}

export interface Pause {
  type: "pause";
}

export interface Resume {
  type: "resume";
}

export interface Reset {
  type: "reset";
  seed: number;
}

export type ClientMessage = Hello | SetPedSpeed | SetIntention | Pause | Resume | Reset;

export interface Tick {
  type: "tick";
  t: number;
  step: number;
  vehicle: { x: number; v: number };
  pedestrian: { x: number; y: number; vy: number; intention: number };
  u: number;
  ttc: number;
  zone: string;
  score_so_far: number;
}

export interface Ended {
  type: "ended";
  reason: "collision" | "passed" | "timeout";
  metrics: {
    ttc_min: number | null;
    t_total: number;
    a_max: number;
    collided: boolean;
    timed_out: boolean;
    score: number;
  };
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage = Tick | Ended | ErrorMessage;

const SERVER_TYPES = new Set(["tick", "ended", "error"]);

/** Parse one inbound frame; returns null for frames we do not understand. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return data as ServerMessage;
}

export function encode(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
