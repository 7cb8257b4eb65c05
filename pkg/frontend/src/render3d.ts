/** 3D mode: translucent heart mesh, catheter tube, beam fan and targets,
 * painter-sorted and drawn into the software framebuffer. */

import { Framebuffer, Color } from "./framebuffer.js";
import { Mesh } from "./mesh.js";
import { OrbitState, Projected, orbitBasis, project } from "./camera.js";
import type { FrameMessage, Vec3 } from "./protocol.js";

const BG: Color = [12, 14, 20, 255];
const TRACK: Color = [255, 214, 64, 255];
const TIP: Color = [255, 96, 64, 255];
const BEAM: Color = [96, 200, 255, 110];
const BEAM_EDGE: Color = [140, 220, 255, 200];
const TARGET: Color = [120, 255, 140, 200];

interface Paintable {
  depth: number;
  draw: (fb: Framebuffer) => void;
}

function shade(base: [number, number, number], normalZ: number,
               alpha: number): Color {
  const light = 0.45 + 0.55 * Math.abs(normalZ);
  return [base[0] * light, base[1] * light, base[2] * light, alpha];
}

function faceNormalZ(a: Vec3, b: Vec3, c: Vec3, view: { right: Vec3; up: Vec3; forward: Vec3 }): number {
  const u: Vec3 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
  const v: Vec3 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
  const n: Vec3 = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                   u[0] * v[1] - u[1] * v[0]];
  const len = Math.hypot(n[0], n[1], n[2]) || 1;
  const f = view.forward;
  return (n[0] * f[0] + n[1] * f[1] + n[2] * f[2]) / len;
}

export function render3d(fb: Framebuffer, frame: FrameMessage,
                         mesh: Mesh | null, orbit: OrbitState): void {
  fb.clear(BG);
  const view = orbitBasis(orbit);
  const proj = (p: Vec3): Projected => project(p, orbit, fb.width, fb.height);
  const items: Paintable[] = [];

  if (mesh) {
    for (const [a, b, c] of mesh.faces) {
      const pa = proj(mesh.vertices[a]);
      const pb = proj(mesh.vertices[b]);
      const pc = proj(mesh.vertices[c]);
      if (!pa.visible || !pb.visible || !pc.visible) continue;
      const nz = faceNormalZ(mesh.vertices[a], mesh.vertices[b],
                             mesh.vertices[c], view);
      const color = shade([40, 90, 130], nz, 34);
      items.push({
        depth: (pa.depth + pb.depth + pc.depth) / 3,
        draw: (f) => f.triangle(pa.x, pa.y, pb.x, pb.y, pc.x, pc.y, color),
      });
    }
  }

  if (frame.beam) {
    const q = frame.beam.vertices.map(proj);
    if (q.every((p) => p.visible)) {
      const depth = q.reduce((s, p) => s + p.depth, 0) / 4;
      items.push({
        depth,
        draw: (f) => {
          f.triangle(q[0].x, q[0].y, q[1].x, q[1].y, q[2].x, q[2].y, BEAM);
          f.triangle(q[0].x, q[0].y, q[2].x, q[2].y, q[3].x, q[3].y, BEAM);
          for (let i = 0; i < 4; i++) {
            const a = q[i], b = q[(i + 1) % 4];
            f.line(Math.round(a.x), Math.round(a.y), Math.round(b.x),
                   Math.round(b.y), BEAM_EDGE);
          }
        },
      });
    }
  }

  if (frame.target) {
    const c = proj(frame.target.center);
    if (c.visible) {
      const radiusPx = Math.max(2, (frame.target.radius_mm * 420) / c.depth);
      items.push({
        depth: c.depth,
        draw: (f) => {
          f.circle(c.x, c.y, radiusPx, [TARGET[0], TARGET[1], TARGET[2], 70], true);
          f.circle(c.x, c.y, radiusPx, TARGET);
        },
      });
    }
  }

  if (frame.points.length > 1) {
    for (let i = 1; i < frame.points.length; i++) {
      const a = proj(frame.points[i - 1]);
      const b = proj(frame.points[i]);
      if (!a.visible || !b.visible) continue;
      const width = i === 1 ? 4 : 3;  // slightly thicker at the tip
      items.push({
        depth: (a.depth + b.depth) / 2,
        draw: (f) => f.line(Math.round(a.x), Math.round(a.y), Math.round(b.x),
                            Math.round(b.y), TRACK, width),
      });
    }
    const tip = proj(frame.points[0]);
    if (tip.visible) {
      items.push({
        depth: tip.depth - 0.01,
        draw: (f) => f.circle(tip.x, tip.y, 4, TIP, true),
      });
    }
  }

  items.sort((a, b) => b.depth - a.depth);  // far to near
  for (const item of items) item.draw(fb);
}
