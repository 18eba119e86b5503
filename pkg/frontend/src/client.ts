/**
 * WebSocket plumbing: connects, sends the hello, forwards server frames
 * into the view model, and flushes the view model's outbox after every
 * state change. Offers reconnection after a drop.
 */
import { encode, Hello, parseServerMessage } from "./protocol.js";
import { SessionViewModel } from "./viewmodel.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class SessionClient {
  private socket: SocketLike | null = null;

  constructor(
    readonly vm: SessionViewModel,
    private makeSocket: SocketFactory,
    private onChange: () => void = () => {},
  ) {}

  connect(url: string, hello: Omit<Hello, "type">): void {
    this.vm.status = "connecting";
    this.onChange();
    let socket: SocketLike;
    try {
      socket = this.makeSocket(url);
    } catch {
      this.vm.status = "error";
      this.vm.lastError = `cannot open ${url}`;
      this.onChange();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.vm.status = "open";
      socket.send(encode({ type: "hello", ...hello }));
      this.flush();
      this.onChange();
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(String(ev.data));
      if (msg) {
        this.vm.applyServerMessage(msg);
        this.flush();
        this.onChange();
      }
    };
    socket.onclose = () => {
      this.vm.status = "closed";
      this.onChange();
    };
    socket.onerror = () => {
      this.vm.status = "error";
      this.vm.lastError = `connection to ${url} failed`;
      this.onChange();
    };
  }

  /** Send everything the view model queued (call after any input). */
  flush(): void {
    if (!this.socket || this.vm.status !== "open") return;
    for (const msg of this.vm.drainOutbox()) this.socket.send(encode(msg));
  }

  close(): void {
    this.socket?.close();
  }
}
