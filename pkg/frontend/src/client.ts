/** WebSocket client: reconnect with backoff, latest-frame slot.
 *
 * Rendering reads only the newest frame; older frames are dropped, never
 * queued. The socket factory and timer hooks are injectable so the whole
 * state machine is unit-testable without a browser.
 */

import { FrameMessage, parseFrame } from "./protocol.js";

export type ConnectionStatus = "idle" | "connecting" | "live" | "retrying" | "error";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
}

export interface ClientOptions {
  socketFactory?: (url: string) => SocketLike;
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
  maxBackoffMs?: number;
}

export class TrackerClient {
  status: ConnectionStatus = "idle";
  latest: FrameMessage | null = null;
  framesReceived = 0;
  onStatus: ((status: ConnectionStatus) => void) | null = null;

  private url = "";
  private socket: SocketLike | null = null;
  private backoffMs = 250;
  private readonly maxBackoffMs: number;
  private retryHandle: unknown = null;
  private stopped = true;
  private readonly makeSocket: (url: string) => SocketLike;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;
  private readonly clearTimer: (handle: unknown) => void;

  constructor(options: ClientOptions = {}) {
    this.makeSocket = options.socketFactory ??
      ((url) => new WebSocket(url) as unknown as SocketLike);
    this.setTimer = options.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimer = options.clearTimer ?? ((h) => clearTimeout(h as number));
    this.maxBackoffMs = options.maxBackoffMs ?? 4000;
  }

  connect(address: string, port: number | string): void {
    this.url = `ws://${address}:${port}/ws`;
    this.stopped = false;
    this.backoffMs = 250;
    this.open();
  }

  disconnect(): void {
    this.stopped = true;
    if (this.retryHandle !== null) {
      this.clearTimer(this.retryHandle);
      this.retryHandle = null;
    }
    this.socket?.close();
    this.socket = null;
    this.setStatus("idle");
  }

  send(data: string): void {
    if (this.status === "live" && this.socket) this.socket.send(data);
  }

  /** Take the newest frame, leaving the slot in place for re-reads. */
  latestFrame(): FrameMessage | null {
    return this.latest;
  }

  private open(): void {
    this.setStatus(this.framesReceived ? "retrying" : "connecting");
    let socket: SocketLike;
    try {
      socket = this.makeSocket(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = 250;
      this.setStatus("live");
    };
    socket.onmessage = (event) => {
      try {
        this.latest = parseFrame(event.data);
        this.framesReceived++;
      } catch {
        // non-frame payloads (e.g. error notices) leave the slot untouched
      }
    };
    socket.onerror = () => {
      if (this.status === "connecting") this.setStatus("error");
    };
    socket.onclose = () => {
      this.socket = null;
      if (!this.stopped) this.scheduleRetry();
    };
  }

  private scheduleRetry(): void {
    this.setStatus("retrying");
    this.retryHandle = this.setTimer(() => {
      this.retryHandle = null;
      if (!this.stopped) this.open();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
  }

  private setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.onStatus?.(status);
  }
}
