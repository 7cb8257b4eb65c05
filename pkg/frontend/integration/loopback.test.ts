/** End-to-end checks against a live tracking server.
 *
 * Spawns `cathtrack serve` (the Python package must be installed), drives
 * it through the same client/input-loop code the browser uses, and checks
 * the control loopback and session continuity. Run via `npm run
 * test:integration`.
 */

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { SocketLike, TrackerClient } from "../src/client.js";
import { InputLoop } from "../src/input.js";
import { encodeSession } from "../src/protocol.js";

const PORT = 18000 + Math.floor(Math.random() * 20000);
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

function wsFactory(url: string): SocketLike {
  const ws = new WebSocket(url);
  const like: SocketLike = {
    send: (d) => ws.send(d),
    close: () => ws.close(),
    onopen: null, onclose: null, onerror: null, onmessage: null,
  };
  ws.on("open", () => like.onopen?.());
  ws.on("close", () => like.onclose?.());
  ws.on("error", () => like.onerror?.());
  ws.on("message", (data) => like.onmessage?.({ data: String(data) }));
  return like;
}

function connectedClient(): Promise<TrackerClient> {
  const client = new TrackerClient({ socketFactory: wsFactory });
  client.connect("127.0.0.1", PORT);
  return waitFor(() => client.status === "live", 5000).then(() => client);
}

async function waitFor(cond: () => boolean, timeoutMs: number): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > timeoutMs) throw new Error("timeout");
    await new Promise((r) => setTimeout(r, 20));
  }
}

async function nextFrame(client: TrackerClient) {
  const seen = client.latestFrame()?.seq ?? -1;
  await waitFor(() => (client.latestFrame()?.seq ?? -1) > seen, 5000);
  return client.latestFrame()!;
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "cathtrack.cli", "serve",
                             "--bind", `127.0.0.1:${PORT}`, "--rate", "30",
                             "--assets", "/tmp/cathtrack-it-assets"],
                 { stdio: "ignore" });
  const t0 = Date.now();
  for (;;) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) break;
    } catch { /* not up yet */ }
    if (Date.now() - t0 > 30000) throw new Error("server did not start");
    await new Promise((r) => setTimeout(r, 200));
  }
}, 40000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("live server loopback", () => {
  it("serves the scene assets", async () => {
    const scene = await (await fetch(`${BASE}/assets/scene.json`)).json();
    expect(scene.targets).toHaveLength(6);
    const obj = await (await fetch(`${BASE}/assets/heart.obj`)).text();
    expect(obj).toMatch(/^v /m);
  }, 20000);

  it("holding the insertion key for 1 s advances the tip ~10 mm", async () => {
    const client = await connectedClient();
    const input = new InputLoop((d) => client.send(d), 50);
    const before = await nextFrame(client);
    const x0 = before.points[0][0];

    input.keyDown("KeyW");                 // +10 mm/s insertion
    const ticker = setInterval(() => input.tick(), input.tickMs);
    await new Promise((r) => setTimeout(r, 1000));
    input.keyUp("KeyW");
    await new Promise((r) => setTimeout(r, 150));
    clearInterval(ticker);
    input.tick();                          // the release zero-rate message

    await new Promise((r) => setTimeout(r, 400));
    const after = await nextFrame(client);
    const moved = after.points[0][0] - x0;
    // one server tick of rate quantization + input tick + tracker noise
    expect(Math.abs(moved - 10.0)).toBeLessThanOrEqual(10 * 3 * (1 / 30) + 0.7);
    client.disconnect();
  }, 20000);

  it("killing and reconnecting the client leaves the session running", async () => {
    const first = await connectedClient();
    first.send(encodeSession("start"));
    await waitFor(() => (first.latestFrame()?.metrics.t_s ?? 0) > 0.2, 5000);
    const tBefore = first.latestFrame()!.metrics.t_s;
    const nBefore = first.latestFrame()!.metrics.n_reached;
    first.disconnect();                    // hard client drop

    await new Promise((r) => setTimeout(r, 500));
    const second = await connectedClient();
    const frame = await nextFrame(second);
    expect(frame.metrics.n_reached).toBe(nBefore);
    expect(frame.metrics.t_s).toBeGreaterThan(tBefore);  // clock never reset
    second.send(encodeSession("reset"));
    second.disconnect();
  }, 20000);
});
