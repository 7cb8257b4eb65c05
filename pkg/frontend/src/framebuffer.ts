/** Software RGBA framebuffer.
 *
 * All drawing happens in plain typed arrays so the exact same renderer runs
 * in the browser (blitted via putImageData) and in Node tests, where golden
 * pixel hashes stay deterministic.
 */

export type Color = [number, number, number, number]; // RGBA 0..255

export class Framebuffer {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8ClampedArray<ArrayBuffer>;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.data = new Uint8ClampedArray(width * height * 4);
  }

  clear(color: Color): void {
    const [r, g, b, a] = color;
    const d = this.data;
    for (let i = 0; i < d.length; i += 4) {
      d[i] = r; d[i + 1] = g; d[i + 2] = b; d[i + 3] = a;
    }
  }

  blend(x: number, y: number, color: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    const a = color[3] / 255;
    const d = this.data;
    d[i] = color[0] * a + d[i] * (1 - a);
    d[i + 1] = color[1] * a + d[i + 1] * (1 - a);
    d[i + 2] = color[2] * a + d[i + 2] * (1 - a);
    d[i + 3] = Math.max(d[i + 3], color[3]);
  }

  /** Solid or alpha-blended line, integer DDA stepping. */
  line(x0: number, y0: number, x1: number, y1: number, color: Color,
       width = 1): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1);
    const r = Math.max(0, Math.floor(width / 2));
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      const cx = Math.round(x0 + (x1 - x0) * t);
      const cy = Math.round(y0 + (y1 - y0) * t);
      for (let dy = -r; dy <= r; dy++) {
        for (let dx = -r; dx <= r; dx++) {
          if (dx * dx + dy * dy <= r * r + 0.25) this.blend(cx + dx, cy + dy, color);
        }
      }
    }
  }

  polyline(points: Array<[number, number]>, color: Color, width = 1): void {
    for (let i = 1; i < points.length; i++) {
      this.line(points[i - 1][0], points[i - 1][1], points[i][0], points[i][1],
                color, width);
    }
  }

  circle(cx: number, cy: number, radius: number, color: Color,
         fill = false): void {
    const r2out = (radius + 0.5) * (radius + 0.5);
    const r2in = (radius - 0.5) * (radius - 0.5);
    const lo = Math.floor(-radius - 1);
    const hi = Math.ceil(radius + 1);
    for (let dy = lo; dy <= hi; dy++) {
      for (let dx = lo; dx <= hi; dx++) {
        const d2 = dx * dx + dy * dy;
        if (d2 <= r2out && (fill || d2 >= r2in)) {
          this.blend(Math.round(cx + dx), Math.round(cy + dy), color);
        }
      }
    }
  }

  /** Scanline-filled triangle with alpha blending. */
  triangle(ax: number, ay: number, bx: number, by: number,
           cx: number, cy: number, color: Color): void {
    const minY = Math.max(0, Math.ceil(Math.min(ay, by, cy)));
    const maxY = Math.min(this.height - 1, Math.floor(Math.max(ay, by, cy)));
    const area = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
    if (Math.abs(area) < 1e-9) return;
    for (let y = minY; y <= maxY; y++) {
      const xs: number[] = [];
      collectEdge(ax, ay, bx, by, y, xs);
      collectEdge(bx, by, cx, cy, y, xs);
      collectEdge(cx, cy, ax, ay, y, xs);
      if (xs.length < 2) continue;
      xs.sort((p, q) => p - q);
      const x0 = Math.max(0, Math.ceil(xs[0]));
      const x1 = Math.min(this.width - 1, Math.floor(xs[xs.length - 1]));
      for (let x = x0; x <= x1; x++) this.blend(x, y, color);
    }
  }

  hash(): string {
    return fnv1a(this.data);
  }
}

function collectEdge(x0: number, y0: number, x1: number, y1: number,
                     y: number, out: number[]): void {
  if ((y0 <= y && y1 > y) || (y1 <= y && y0 > y)) {
    out.push(x0 + ((y - y0) / (y1 - y0)) * (x1 - x0));
  }
}

/** FNV-1a over the raw pixel bytes, as an 8-hex-digit string. */
export function fnv1a(data: Uint8ClampedArray): string {
  let h = 0x811c9dc5;
  for (let i = 0; i < data.length; i++) {
    h ^= data[i];
    h = Math.imul(h, 0x01000193);
  }
  return (h >>> 0).toString(16).padStart(8, "0");
}
