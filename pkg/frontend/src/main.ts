/** Browser entry: wires the client, input loop, renderers and HUD. */

import { TrackerClient } from "./client.js";
import { Framebuffer } from "./framebuffer.js";
import { applyHud, hudState } from "./hud.js";
import { InputLoop } from "./input.js";
import { Mesh, parseObj } from "./mesh.js";
import { DEFAULT_ORBIT, OrbitState } from "./camera.js";
import { encodeMode, encodeSession, ViewMode } from "./protocol.js";
import { render2d } from "./render2d.js";
import { render3d } from "./render3d.js";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const fb = new Framebuffer(canvas.width, canvas.height);

const client = new TrackerClient();
const input = new InputLoop((data) => client.send(data));
let mode: ViewMode = "3D";
let mesh: Mesh | null = null;
const orbit: OrbitState = { ...DEFAULT_ORBIT };

function setMode(next: ViewMode): void {
  if (mode === next) return;
  mode = next;
  client.send(encodeMode(next));
  for (const id of ["mode-2d", "mode-3d"]) {
    document.getElementById(id)?.classList.toggle(
      "active", (id === "mode-3d") === (next === "3D"));
  }
}

async function loadMesh(address: string, port: string): Promise<void> {
  try {
    const res = await fetch(`http://${address}:${port}/assets/heart.obj`);
    if (res.ok) mesh = parseObj(await res.text());
  } catch {
    mesh = null;  // render without the anatomy shell
  }
}

document.getElementById("connect")!.addEventListener("click", () => {
  const address = (document.getElementById("address") as HTMLInputElement).value;
  const port = (document.getElementById("port") as HTMLInputElement).value;
  client.connect(address, port);
  client.send(encodeMode(mode));
  void loadMesh(address, port);
});
document.getElementById("session-start")!.addEventListener("click",
  () => client.send(encodeSession("start")));
document.getElementById("session-reset")!.addEventListener("click",
  () => client.send(encodeSession("reset")));
document.getElementById("mode-2d")!.addEventListener("click", () => setMode("2D"));
document.getElementById("mode-3d")!.addEventListener("click", () => setMode("3D"));

window.addEventListener("keydown", (e) => {
  if (input.keyDown(e.code)) e.preventDefault();
  if (e.code === "KeyV") setMode(mode === "2D" ? "3D" : "2D");
});
window.addEventListener("keyup", (e) => {
  if (input.keyUp(e.code)) e.preventDefault();
});
window.addEventListener("blur", () => input.releaseAll());

// orbit with pointer drag (3D mode only); the view never touches the model
let dragging = false;
let lastX = 0, lastY = 0;
canvas.addEventListener("pointerdown", (e) => {
  dragging = true;
  lastX = e.clientX;
  lastY = e.clientY;
});
window.addEventListener("pointerup", () => { dragging = false; });
window.addEventListener("pointermove", (e) => {
  if (!dragging || mode !== "3D") return;
  orbit.yawDeg -= (e.clientX - lastX) * 0.5;
  orbit.pitchDeg = Math.max(-80, Math.min(80, orbit.pitchDeg + (e.clientY - lastY) * 0.4));
  lastX = e.clientX;
  lastY = e.clientY;
});
canvas.addEventListener("wheel", (e) => {
  orbit.distance = Math.max(120, Math.min(900, orbit.distance + e.deltaY * 0.4));
  e.preventDefault();
});

setInterval(() => input.tick(), input.tickMs);

function draw(): void {
  const frame = client.latestFrame();
  if (frame) {
    if (mode === "2D") {
      render2d(fb, frame, mesh);
    } else {
      render3d(fb, frame, mesh, orbit);
    }
    ctx.putImageData(new ImageData(fb.data, fb.width, fb.height), 0, 0);
  }
  applyHud(hudState(frame, client.status), document);
  requestAnimationFrame(draw);
}
requestAnimationFrame(draw);
