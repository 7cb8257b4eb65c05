/** Wire types shared with the tracking server (JSON text frames). */

export type Vec3 = [number, number, number];

export interface BeamInfo {
  vertices: Vec3[];
  end: Vec3;
}

export interface TargetInfo {
  id: string;
  center: Vec3;
  radius_mm: number;
}

export interface FeedbackInfo {
  distance_mm: number;
  angle_deg: number;
}

export interface MetricsInfo {
  t_s: number;
  n_reached: number;
  t_per_target_s: number | null;
}

export interface FrameMessage {
  type: "frame";
  seq: number;
  timestamp_ms: number;
  points: Vec3[];
  roll_deg: number;
  consistency_mm: number;
  beam: BeamInfo | null;
  target: TargetInfo | null;
  feedback: FeedbackInfo | null;
  metrics: MetricsInfo;
}

export interface Rates {
  insertion_mm_s?: number;
  knob1_deg_s?: number;
  knob2_deg_s?: number;
  roll_deg_s?: number;
}

export type ViewMode = "2D" | "3D";

function isVec3(value: unknown): value is Vec3 {
  return Array.isArray(value) && value.length === 3 &&
    value.every((v) => typeof v === "number" && Number.isFinite(v));
}

/** Parse and validate one server frame; throws on structural problems. */
export function parseFrame(text: string): FrameMessage {
  const raw = JSON.parse(text) as Record<string, unknown>;
  if (raw.type !== "frame") {
    throw new Error(`expected frame message, got ${String(raw.type)}`);
  }
  if (typeof raw.seq !== "number" || typeof raw.timestamp_ms !== "number") {
    throw new Error("frame missing seq/timestamp_ms");
  }
  if (!Array.isArray(raw.points) || !raw.points.every(isVec3)) {
    throw new Error("frame points must be [x,y,z] rows");
  }
  if (typeof raw.roll_deg !== "number" || !Number.isFinite(raw.roll_deg)) {
    throw new Error("frame roll_deg must be finite");
  }
  const metrics = raw.metrics as MetricsInfo | undefined;
  if (!metrics || typeof metrics.n_reached !== "number") {
    throw new Error("frame metrics missing");
  }
  return raw as unknown as FrameMessage;
}

export function encodeControl(rates: Rates): string {
  return JSON.stringify({ type: "control", rates });
}

export function encodeSession(action: "start" | "reset"): string {
  return JSON.stringify({ type: "session", action });
}

export function encodeMode(view: ViewMode): string {
  return JSON.stringify({ type: "mode", view });
}
