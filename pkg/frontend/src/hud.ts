/** HUD text derived from the latest frame only (no extrapolation). */

import type { ConnectionStatus } from "./client.js";
import type { FrameMessage } from "./protocol.js";

export interface HudState {
  status: string;
  target: string;
  distance: string;
  angle: string;
  roll: string;
  time: string;
  reached: string;
  perTarget: string;
  tracking: string;
}

export function hudState(frame: FrameMessage | null,
                         status: ConnectionStatus): HudState {
  const fmt = (v: number | null | undefined, unit: string, digits = 1) =>
    v === null || v === undefined ? "--" : `${v.toFixed(digits)}${unit}`;
  if (!frame) {
    return { status: status.toUpperCase(), target: "--", distance: "--",
             angle: "--", roll: "--", time: "--", reached: "--",
             perTarget: "--", tracking: "--" };
  }
  return {
    status: status.toUpperCase(),
    target: frame.target ? frame.target.id : "done",
    distance: fmt(frame.feedback?.distance_mm, " mm"),
    angle: fmt(frame.feedback?.angle_deg, "°"),
    roll: fmt(frame.roll_deg, "°"),
    time: fmt(frame.metrics.t_s, " s"),
    reached: `${frame.metrics.n_reached}`,
    perTarget: fmt(frame.metrics.t_per_target_s, " s", 2),
    tracking: frame.points.length ? "ok" : "no catheter",
  };
}

export function applyHud(state: HudState, root: Document): void {
  for (const [key, value] of Object.entries(state)) {
    const el = root.getElementById(`hud-${key}`);
    if (el) el.textContent = value;
  }
}
