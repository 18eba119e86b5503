import { ClientMessage, Tick } from "../src/protocol.js";
import { SocketLike } from "../src/client.js";
import { Canvas2D } from "../src/scene.js";

/** In-memory stand-in for the session server: records what the client sends. */
export class MockServer {
  sent: ClientMessage[] = [];
  socket: SocketLike;

  constructor() {
    this.socket = {
      send: (data: string) => this.sent.push(JSON.parse(data)),
      close: () => this.socket.onclose?.(),
      onopen: null,
      onmessage: null,
      onclose: null,
      onerror: null,
    };
  }

  open(): void {
    this.socket.onopen?.();
  }

  push(msg: unknown): void {
    this.socket.onmessage?.({ data: JSON.stringify(msg) });
  }

  /** Messages sent since the last call. */
  drain(): ClientMessage[] {
    const out = this.sent;
    this.sent = [];
    return out;
  }
}

export function makeTick(overrides: Partial<Tick> = {}): Tick {
  return {
    type: "tick",
    t: 0.0,
    step: 0,
    vehicle: { x: -12.5, v: 6.0 },
    pedestrian: { x: 0.0, y: -3.5, vy: 1.4, intention: 0.5 },
    u: 0.0,
    ttc: 1.5,
    zone: "safe",
    score_so_far: 0.0,
    ...overrides,
  };
}

/** Canvas stub that records draw calls so tests can diff rendered output. */
export function recordingCanvas(): { ctx: Canvas2D; calls: string[] } {
  const calls: string[] = [];
  const record = (name: string) => (...args: unknown[]) => {
    calls.push(`${name}(${args.map((a) => JSON.stringify(a)).join(",")})`);
  };
  const ctx = {
    fillStyle: "",
    strokeStyle: "",
    lineWidth: 0,
    font: "",
    clearRect: record("clearRect"),
    fillRect: record("fillRect"),
    strokeRect: record("strokeRect"),
    beginPath: record("beginPath"),
    moveTo: record("moveTo"),
    lineTo: record("lineTo"),
    arc: record("arc"),
    stroke: record("stroke"),
    fill: record("fill"),
    fillText: record("fillText"),
  } as Canvas2D;
  return { ctx, calls };
}
