/** Orbit camera and perspective projection for the 3D view. */

import type { Vec3 } from "./protocol.js";

export interface OrbitState {
  yawDeg: number;
  pitchDeg: number;
  distance: number;
  target: Vec3;
}

export const DEFAULT_ORBIT: OrbitState = {
  yawDeg: -35,
  pitchDeg: 22,
  distance: 330,
  target: [70, 0, 0],
};

export interface Projected {
  x: number;
  y: number;
  depth: number;  // camera-space distance, for painter sorting
  visible: boolean;
}

const DEG = Math.PI / 180;

/** Camera-space basis vectors for an orbit state (right, up, forward). */
export function orbitBasis(orbit: OrbitState): { eye: Vec3; right: Vec3; up: Vec3; forward: Vec3 } {
  const yaw = orbit.yawDeg * DEG;
  const pitch = orbit.pitchDeg * DEG;
  const cp = Math.cos(pitch);
  const dir: Vec3 = [cp * Math.cos(yaw), cp * Math.sin(yaw), Math.sin(pitch)];
  const eye: Vec3 = [
    orbit.target[0] + dir[0] * orbit.distance,
    orbit.target[1] + dir[1] * orbit.distance,
    orbit.target[2] + dir[2] * orbit.distance,
  ];
  const forward: Vec3 = [-dir[0], -dir[1], -dir[2]];
  const worldUp: Vec3 = [0, 0, 1];
  const right = normalize(cross(forward, worldUp));
  const up = cross(right, forward);
  return { eye, right, up, forward };
}

export function project(point: Vec3, orbit: OrbitState, width: number,
                        height: number, focalPx = 420): Projected {
  const { eye, right, up, forward } = orbitBasis(orbit);
  const rel: Vec3 = [point[0] - eye[0], point[1] - eye[1], point[2] - eye[2]];
  const z = dot(rel, forward);
  if (z <= 1.0) {
    return { x: 0, y: 0, depth: z, visible: false };
  }
  const x = dot(rel, right);
  const y = dot(rel, up);
  return {
    x: width / 2 + (focalPx * x) / z,
    y: height / 2 - (focalPx * y) / z,
    depth: z,
    visible: true,
  };
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function normalize(v: Vec3): Vec3 {
  const n = Math.hypot(v[0], v[1], v[2]) || 1;
  return [v[0] / n, v[1] / n, v[2] / n];
}
