/** Keyboard control loop.
 *
 * Held keys produce actuation rates that are sent on a fixed tick while
 * anything is held; releasing everything emits one zero-rate message and
 * then goes quiet, so an idle client generates no control traffic.
 */

import { Rates, encodeControl } from "./protocol.js";

export const DEFAULT_BINDINGS: Record<string, Partial<Rates>> = {
  KeyW: { insertion_mm_s: 10 },
  KeyS: { insertion_mm_s: -10 },
  KeyA: { knob1_deg_s: 45 },
  KeyD: { knob1_deg_s: -45 },
  KeyQ: { knob2_deg_s: 30 },
  KeyE: { knob2_deg_s: -30 },
  ArrowLeft: { roll_deg_s: 60 },
  ArrowRight: { roll_deg_s: -60 },
};

const ZERO: Required<Rates> = {
  insertion_mm_s: 0, knob1_deg_s: 0, knob2_deg_s: 0, roll_deg_s: 0,
};

export class InputLoop {
  readonly tickMs: number;
  private readonly held = new Set<string>();
  private readonly send: (data: string) => void;
  private readonly bindings: Record<string, Partial<Rates>>;
  private quiet = true;

  constructor(send: (data: string) => void, tickMs = 50,
              bindings: Record<string, Partial<Rates>> = DEFAULT_BINDINGS) {
    this.send = send;
    this.tickMs = tickMs;
    this.bindings = bindings;
  }

  keyDown(code: string): boolean {
    if (!(code in this.bindings)) return false;
    this.held.add(code);
    return true;
  }

  keyUp(code: string): boolean {
    if (!(code in this.bindings)) return false;
    this.held.delete(code);
    return true;
  }

  releaseAll(): void {
    this.held.clear();
  }

  currentRates(): Required<Rates> {
    const rates = { ...ZERO };
    for (const code of this.held) {
      const binding = this.bindings[code];
      for (const key of Object.keys(binding) as Array<keyof Rates>) {
        rates[key] += binding[key] ?? 0;
      }
    }
    return rates;
  }

  /** Called on every UI tick; sends rates while active plus one zero. */
  tick(): void {
    const rates = this.currentRates();
    const active = Object.values(rates).some((v) => v !== 0);
    if (active) {
      this.send(encodeControl(rates));
      this.quiet = false;
    } else if (!this.quiet) {
      this.send(encodeControl(rates));
      this.quiet = true;
    }
  }
}
