/**
 * Session state as seen by the renderer. The view model never simulates:
 * scene state changes only when a tick arrives, so a stalled server
 * leaves the picture frozen. Outbound control messages for the
 * continuous inputs (pedestrian speed, intention) are rate limited to
 * one per arriving tick; pause/resume/reset are immediate.
 */
import { ClientMessage, Ended, ServerMessage, Tick } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed" | "error";

export const VY_STEP = 0.1;

export interface HistoryPoint {
  t: number;
  vVehicle: number;
  vyPedestrian: number;
  intention: number;
}

export class SessionViewModel {
  status: ConnectionStatus = "connecting";
  tick: Tick | null = null;
  summary: Ended | null = null;
  lastError: string | null = null;
  paused = false;

  /** Operator-commanded pedestrian state. */
  vyCommand: number;
  intentionCommand: number;

  /** Strip-chart history of the episode so far. */
  history: HistoryPoint[] = [];

  private outbox: ClientMessage[] = [];
  private vyTokens = 1;
  private intentionTokens = 1;
  private vyPending = false;
  private intentionPending = false;
  private upHeld = false;
  private downHeld = false;

  constructor(initialVy = 0.0, initialIntention = 0.5) {
    this.vyCommand = initialVy;
    this.intentionCommand = initialIntention;
  }

  /** Messages queued since the last call; caller sends them. */
  drainOutbox(): ClientMessage[] {
    const out = this.outbox;
    this.outbox = [];
    return out;
  }

  applyServerMessage(msg: ServerMessage): void {
    if (msg.type === "tick") {
      this.tick = msg;
      this.history.push({
        t: msg.t,
        vVehicle: msg.vehicle.v,
        vyPedestrian: msg.pedestrian.vy,
        intention: msg.pedestrian.intention,
      });
      this.refillAndFlush();
    } else if (msg.type === "ended") {
      this.summary = msg;
    } else {
      this.lastError = `${msg.code}: ${msg.message}`;
    }
  }

  /** One discrete bump of the pedestrian speed (from a key press). */
  bumpVy(direction: 1 | -1): void {
    this.vyCommand = Math.max(0, this.vyCommand + direction * VY_STEP);
    this.sendVy();
  }

  /** Key held down: repeat one bump per arriving tick. */
  setVyKeyHeld(direction: 1 | -1, held: boolean): void {
    if (direction === 1) this.upHeld = held;
    else this.downHeld = held;
  }

  setIntention(value: number): void {
    this.intentionCommand = Math.min(1, Math.max(0, value));
    if (this.intentionTokens > 0) {
      this.intentionTokens -= 1;
      this.outbox.push({ type: "set_intention", intention: this.intentionCommand });
    } else {
      this.intentionPending = true;
    }
  }

  togglePause(): void {
    this.paused = !this.paused;
    this.outbox.push({ type: this.paused ? "pause" : "resume" });
  }

  reset(seed: number): void {
    this.summary = null;
    this.history = [];
    this.outbox.push({ type: "reset", seed });
  }

  private sendVy(): void {
    if (this.vyTokens > 0) {
      this.vyTokens -= 1;
      this.outbox.push({ type: "set_ped_speed", vy: round1(this.vyCommand) });
    } else {
      this.vyPending = true;
    }
  }

  private refillAndFlush(): void {
    this.vyTokens = 1;
    this.intentionTokens = 1;
    if (this.upHeld !== this.downHeld) {
      this.vyCommand = Math.max(0, this.vyCommand + (this.upHeld ? VY_STEP : -VY_STEP));
      this.vyPending = true;
    }
    if (this.vyPending) {
      this.vyPending = false;
      this.vyTokens -= 1;
      this.outbox.push({ type: "set_ped_speed", vy: round1(this.vyCommand) });
    }
    if (this.intentionPending) {
      this.intentionPending = false;
      this.intentionTokens -= 1;
      this.outbox.push({ type: "set_intention", intention: this.intentionCommand });
    }
  }
}

/** Keep 1.4 + 0.1 at one decimal so commands read as the operator expects. */
function round1(x: number): number {
  return Math.round(x * 10) / 10;
}
