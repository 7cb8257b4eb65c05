import { describe, expect, it } from "vitest";

import { DEFAULT_ORBIT, project } from "../src/camera.js";
import { Framebuffer } from "../src/framebuffer.js";
import { meshEdges, parseObj } from "../src/mesh.js";
import { render2d, paneLayout } from "../src/render2d.js";
import { render3d } from "../src/render3d.js";
import { fixtureFrame, fixtureMesh } from "./fixtures.js";

// frozen hashes of the fixture renders; any renderer change that alters
// pixels must update these on purpose
const GOLDEN_2D = "d9ed0d76";
const GOLDEN_3D = "bedaf8f9";

describe("framebuffer", () => {
  it("is deterministic", () => {
    const a = new Framebuffer(64, 48);
    const b = new Framebuffer(64, 48);
    for (const fb of [a, b]) {
      fb.clear([10, 20, 30, 255]);
      fb.line(2, 2, 60, 40, [200, 100, 50, 255], 3);
      fb.circle(30, 24, 10, [50, 200, 100, 128]);
      fb.triangle(5, 40, 60, 44, 30, 10, [90, 90, 220, 90]);
    }
    expect(a.hash()).toBe(b.hash());
  });

  it("clips outside the viewport", () => {
    const fb = new Framebuffer(16, 16);
    fb.clear([0, 0, 0, 255]);
    fb.line(-40, -40, 60, 60, [255, 255, 255, 255]);
    fb.circle(-5, -5, 3, [255, 0, 0, 255], true);
    expect(fb.data[0 * 4]).toBe(255); // the in-bounds diagonal start
  });
});

describe("2D renderer", () => {
  it("matches the golden hash on the fixture frame", () => {
    const fb = new Framebuffer(420, 280);
    render2d(fb, fixtureFrame(), fixtureMesh());
    expect(fb.hash()).toBe(GOLDEN_2D);
  });

  it("draws the straight track as a horizontal line in both panes", () => {
    const fb = new Framebuffer(420, 280);
    const frame = fixtureFrame();
    frame.points = Array.from({ length: 8 },
      (_, i) => [100 - (100 / 7) * i, 0, 0] as [number, number, number]);
    frame.beam = null;
    frame.target = null;
    render2d(fb, frame, null);
    const [left, right] = paneLayout(fb.width, fb.height);
    for (const vp of [left, right]) {
      const rowY = Math.round(vp.y + vp.height / 2);
      let lit = 0;
      for (let x = vp.x + 4; x < vp.x + vp.width - 4; x++) {
        const i = (rowY * fb.width + x) * 4;
        if (fb.data[i] > 150) lit++;
      }
      expect(lit).toBeGreaterThan(30);
    }
  });

  it("renders a no-catheter frame without artifacts", () => {
    const fb = new Framebuffer(420, 280);
    const frame = { ...fixtureFrame(), points: [], beam: null, feedback: null };
    render2d(fb, frame, fixtureMesh());
    expect(fb.hash()).not.toBe("00000000");
  });
});

describe("3D renderer", () => {
  it("matches the golden hash on the fixture frame", () => {
    const fb = new Framebuffer(420, 280);
    render3d(fb, fixtureFrame(), fixtureMesh(), DEFAULT_ORBIT);
    expect(fb.hash()).toBe(GOLDEN_3D);
  });

  it("orbiting the camera changes pixels but not the data", () => {
    const frame = fixtureFrame();
    const a = new Framebuffer(420, 280);
    const b = new Framebuffer(420, 280);
    render3d(a, frame, fixtureMesh(), DEFAULT_ORBIT);
    render3d(b, frame, fixtureMesh(),
             { ...DEFAULT_ORBIT, yawDeg: DEFAULT_ORBIT.yawDeg + 40 });
    expect(a.hash()).not.toBe(b.hash());
    expect(frame).toEqual(fixtureFrame()); // renderer never mutates the frame
  });

  it("projects the orbit target to the viewport center", () => {
    const p = project(DEFAULT_ORBIT.target, DEFAULT_ORBIT, 420, 280);
    expect(p.visible).toBe(true);
    expect(p.x).toBeCloseTo(210, 6);
    expect(p.y).toBeCloseTo(140, 6);
  });

  it("track knots project onto the drawn tube", () => {
    const fb = new Framebuffer(420, 280);
    const frame = fixtureFrame();
    render3d(fb, frame, null, DEFAULT_ORBIT);
    for (const knot of frame.points) {
      const p = project(knot, DEFAULT_ORBIT, fb.width, fb.height);
      // a track-colored pixel within 2 px of every projected knot
      let found = false;
      for (let dy = -2; dy <= 2 && !found; dy++) {
        for (let dx = -2; dx <= 2 && !found; dx++) {
          const x = Math.round(p.x) + dx;
          const y = Math.round(p.y) + dy;
          const i = (y * fb.width + x) * 4;
          if (fb.data[i] > 180 && fb.data[i + 1] > 120) found = true;
        }
      }
      expect(found).toBe(true);
    }
  });
});

describe("mesh", () => {
  it("parses OBJ text and extracts unique edges", () => {
    const mesh = parseObj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    expect(mesh.vertices).toHaveLength(3);
    expect(mesh.faces).toEqual([[0, 1, 2]]);
    expect(meshEdges(mesh)).toHaveLength(3);
    expect(meshEdges(fixtureMesh())).toHaveLength(12);
  });
});
