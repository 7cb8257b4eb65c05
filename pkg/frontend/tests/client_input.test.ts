import { describe, expect, it } from "vitest";

import { SocketLike, TrackerClient } from "../src/client.js";
import { hudState } from "../src/hud.js";
import { InputLoop } from "../src/input.js";
import { fixtureFrame } from "./fixtures.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;

  send(data: string): void { this.sent.push(data); }
  close(): void {
    this.closed = true;
    this.onclose?.();
  }
  frame(payload: unknown): void {
    this.onmessage?.({ data: JSON.stringify(payload) });
  }
}

interface Timer { fn: () => void; ms: number; }

function makeClient() {
  const sockets: FakeSocket[] = [];
  const timers: Timer[] = [];
  const client = new TrackerClient({
    socketFactory: () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    setTimer: (fn, ms) => {
      timers.push({ fn, ms });
      return timers.length - 1;
    },
    clearTimer: () => undefined,
  });
  return { client, sockets, timers };
}

describe("TrackerClient", () => {
  it("goes live and keeps only the newest frame", () => {
    const { client, sockets } = makeClient();
    client.connect("127.0.0.1", 8765);
    sockets[0].onopen?.();
    expect(client.status).toBe("live");
    sockets[0].frame({ ...fixtureFrame(), seq: 1 });
    sockets[0].frame({ ...fixtureFrame(), seq: 2 });
    sockets[0].frame({ ...fixtureFrame(), seq: 3 });
    expect(client.latestFrame()?.seq).toBe(3);   // old frames dropped
    expect(client.framesReceived).toBe(3);
  });

  it("ignores non-frame payloads", () => {
    const { client, sockets } = makeClient();
    client.connect("127.0.0.1", 8765);
    sockets[0].onopen?.();
    sockets[0].frame({ ...fixtureFrame(), seq: 9 });
    sockets[0].frame({ type: "error", message: "nope" });
    expect(client.latestFrame()?.seq).toBe(9);
  });

  it("retries with exponential backoff after drops", () => {
    const { client, sockets, timers } = makeClient();
    client.connect("127.0.0.1", 8765);
    sockets[0].onopen?.();
    sockets[0].close();                   // server went away
    expect(client.status).toBe("retrying");
    expect(timers).toHaveLength(1);
    timers[0].fn();                       // first retry
    expect(sockets).toHaveLength(2);
    sockets[1].close();
    timers[1].fn();
    expect(sockets).toHaveLength(3);
    expect(timers[1].ms).toBeGreaterThan(timers[0].ms);
    sockets[2].onopen?.();
    expect(client.status).toBe("live");
  });

  it("stops retrying after disconnect()", () => {
    const { client, sockets, timers } = makeClient();
    client.connect("127.0.0.1", 8765);
    sockets[0].onopen?.();
    client.disconnect();
    expect(sockets[0].closed).toBe(true);
    expect(client.status).toBe("idle");
    const before = sockets.length;
    for (const t of timers) t.fn();
    expect(sockets.length).toBe(before);
  });

  it("only sends while live", () => {
    const { client, sockets } = makeClient();
    client.connect("127.0.0.1", 8765);
    client.send("dropped");
    sockets[0].onopen?.();
    client.send("delivered");
    expect(sockets[0].sent).toEqual(["delivered"]);
  });
});

describe("InputLoop", () => {
  it("emits rates while held and a single zero on release", () => {
    const sent: string[] = [];
    const loop = new InputLoop((d) => sent.push(d));
    loop.tick();
    expect(sent).toHaveLength(0);         // no input -> no traffic
    loop.keyDown("KeyW");
    loop.tick();
    loop.tick();
    expect(sent).toHaveLength(2);
    expect(JSON.parse(sent[0]).rates.insertion_mm_s).toBe(10);
    loop.keyUp("KeyW");
    loop.tick();
    loop.tick();
    loop.tick();
    expect(sent).toHaveLength(3);         // exactly one zero-rate message
    const last = JSON.parse(sent[2]).rates;
    expect(Object.values(last).every((v) => v === 0)).toBe(true);
  });

  it("combines simultaneous bindings additively", () => {
    const sent: string[] = [];
    const loop = new InputLoop((d) => sent.push(d));
    loop.keyDown("KeyW");
    loop.keyDown("ArrowLeft");
    loop.tick();
    const rates = JSON.parse(sent[0]).rates;
    expect(rates.insertion_mm_s).toBe(10);
    expect(rates.roll_deg_s).toBe(60);
  });

  it("ignores unbound keys", () => {
    const loop = new InputLoop(() => undefined);
    expect(loop.keyDown("KeyZ")).toBe(false);
    expect(loop.keyUp("F13")).toBe(false);
  });
});

describe("hudState", () => {
  it("mirrors the latest frame only", () => {
    const hud = hudState(fixtureFrame(), "live");
    expect(hud.status).toBe("LIVE");
    expect(hud.target).toBe("T3");
    expect(hud.distance).toBe("3.8 mm");
    expect(hud.reached).toBe("2");
    expect(hud.tracking).toBe("ok");
  });

  it("handles the disconnected state", () => {
    const hud = hudState(null, "retrying");
    expect(hud.status).toBe("RETRYING");
    expect(hud.distance).toBe("--");
  });

  it("2D and 3D modes share the same numbers by construction", () => {
    // hud state is derived from the frame alone; the mode never enters
    const a = hudState(fixtureFrame(), "live");
    const b = hudState(fixtureFrame(), "live");
    expect(a).toEqual(b);
  });
});
