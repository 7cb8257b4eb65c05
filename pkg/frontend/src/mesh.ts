/** ASCII triangle-mesh parsing (OBJ subset: `v x y z`, `f i j k`). */

import type { Vec3 } from "./protocol.js";

export interface Mesh {
  vertices: Vec3[];
  faces: Array<[number, number, number]>;
}

export function parseObj(text: string): Mesh {
  const vertices: Vec3[] = [];
  const faces: Array<[number, number, number]> = [];
  for (const line of text.split("\n")) {
    const parts = line.trim().split(/\s+/);
    if (parts[0] === "v" && parts.length >= 4) {
      vertices.push([Number(parts[1]), Number(parts[2]), Number(parts[3])]);
    } else if (parts[0] === "f" && parts.length >= 4) {
      const idx = parts.slice(1, 4).map((p) => Number(p.split("/")[0]) - 1);
      faces.push([idx[0], idx[1], idx[2]]);
    }
  }
  return { vertices, faces };
}

/** Unique undirected edges, for silhouette-style 2D rendering. */
export function meshEdges(mesh: Mesh): Array<[number, number]> {
  const seen = new Set<number>();
  const edges: Array<[number, number]> = [];
  const n = mesh.vertices.length;
  for (const [a, b, c] of mesh.faces) {
    for (const [i, j] of [[a, b], [b, c], [c, a]] as const) {
      const key = i < j ? i * n + j : j * n + i;
      if (!seen.has(key)) {
        seen.add(key);
        edges.push(i < j ? [i, j] : [j, i]);
      }
    }
  }
  return edges;
}
