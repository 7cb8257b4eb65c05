import type { FrameMessage } from "../src/protocol.js";
import { Mesh } from "../src/mesh.js";

/** Deterministic mid-task frame used by the golden render tests. */
export function fixtureFrame(): FrameMessage {
  const points: Array<[number, number, number]> = [];
  for (let i = 0; i < 12; i++) {
    const t = 1 - i / 11;
    points.push([95 * t, 18 * Math.sin(2.2 * t), 0 - 10 * t * t]);
  }
  return {
    type: "frame",
    seq: 41,
    timestamp_ms: 1366,
    points,
    roll_deg: 30.0,
    consistency_mm: 0.11,
    beam: {
      vertices: [[95, -2, 0], [95, 2, 0], [131, 14, -8], [131, -10, -8]],
      end: [131, 2, -4],
    },
    target: { id: "T3", center: [128, 4, -5], radius_mm: 5 },
    feedback: { distance_mm: 3.8, angle_deg: 2.6 },
    metrics: { t_s: 14.2, n_reached: 2, t_per_target_s: 5.4 },
  };
}

/** Tiny deterministic mesh (octahedron scaled to the working volume). */
export function fixtureMesh(): Mesh {
  return {
    vertices: [
      [130, 0, 0], [10, 0, 0], [70, 55, 0], [70, -55, 0],
      [70, 0, 50], [70, 0, -50],
    ],
    faces: [
      [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
      [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5],
    ],
  };
}
