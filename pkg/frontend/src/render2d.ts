/** Biplane 2D mode: two orthographic panes, top (X,Y) and front (X,Z). */

import { Framebuffer, Color } from "./framebuffer.js";
import { Mesh, meshEdges } from "./mesh.js";
import type { FrameMessage, Vec3 } from "./protocol.js";

const BG: Color = [16, 20, 26, 255];
const PANE_EDGE: Color = [60, 68, 80, 255];
const MESH_EDGE: Color = [52, 88, 112, 90];
const TRACK: Color = [255, 214, 64, 255];
const TIP: Color = [255, 96, 64, 255];
const BEAM: Color = [96, 200, 255, 160];
const TARGET: Color = [120, 255, 140, 220];

export interface Viewport2D {
  x: number;
  y: number;
  width: number;
  height: number;
  axes: [number, number];  // world axis index mapped to pane (u, v)
  scale: number;           // px per mm
  center: Vec3;            // world point at the pane center
}

export function paneLayout(width: number, height: number): [Viewport2D, Viewport2D] {
  const paneW = Math.floor(width / 2);
  const scale = Math.min(paneW / 190, height / 150);
  const center: Vec3 = [70, 0, 0];
  return [
    { x: 0, y: 0, width: paneW, height, axes: [0, 1], scale, center },
    { x: paneW, y: 0, width: width - paneW, height, axes: [0, 2], scale, center },
  ];
}

function toPane(p: Vec3, vp: Viewport2D): [number, number] {
  const u = p[vp.axes[0]] - vp.center[vp.axes[0]];
  const v = p[vp.axes[1]] - vp.center[vp.axes[1]];
  return [vp.x + vp.width / 2 + u * vp.scale, vp.y + vp.height / 2 + v * vp.scale];
}

function drawPane(fb: Framebuffer, frame: FrameMessage, mesh: Mesh | null,
                  vp: Viewport2D): void {
  // pane frame
  fb.line(vp.x, vp.y, vp.x + vp.width - 1, vp.y, PANE_EDGE);
  fb.line(vp.x, vp.y + vp.height - 1, vp.x + vp.width - 1, vp.y + vp.height - 1, PANE_EDGE);
  fb.line(vp.x, vp.y, vp.x, vp.y + vp.height - 1, PANE_EDGE);
  fb.line(vp.x + vp.width - 1, vp.y, vp.x + vp.width - 1, vp.y + vp.height - 1, PANE_EDGE);

  if (mesh) {
    for (const [i, j] of meshEdges(mesh)) {
      const [x0, y0] = toPane(mesh.vertices[i], vp);
      const [x1, y1] = toPane(mesh.vertices[j], vp);
      fb.line(Math.round(x0), Math.round(y0), Math.round(x1), Math.round(y1), MESH_EDGE);
    }
  }

  if (frame.beam) {
    const quad = frame.beam.vertices.map((v) => toPane(v, vp));
    for (let i = 0; i < 4; i++) {
      const [x0, y0] = quad[i];
      const [x1, y1] = quad[(i + 1) % 4];
      fb.line(Math.round(x0), Math.round(y0), Math.round(x1), Math.round(y1), BEAM);
    }
    const [ex, ey] = toPane(frame.beam.end, vp);
    fb.circle(ex, ey, 2, BEAM, true);
  }

  if (frame.target) {
    const [tx, ty] = toPane(frame.target.center, vp);
    fb.circle(tx, ty, frame.target.radius_mm * vp.scale, TARGET);
    fb.circle(tx, ty, 1.2, TARGET, true);
  }

  if (frame.points.length > 1) {
    const pts = frame.points.map((p) => toPane(p, vp))
      .map(([x, y]) => [Math.round(x), Math.round(y)] as [number, number]);
    fb.polyline(pts, TRACK, 3);
    fb.circle(pts[0][0], pts[0][1], 3, TIP, true);
  }
}

export function render2d(fb: Framebuffer, frame: FrameMessage,
                         mesh: Mesh | null): void {
  fb.clear(BG);
  for (const vp of paneLayout(fb.width, fb.height)) {
    drawPane(fb, frame, mesh, vp);
  }
}
