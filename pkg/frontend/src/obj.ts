import type { Vec3 } from "./types.js";

export interface ParsedMesh {
  vertices: Vec3[];
  /** vertex index triples */
  triangles: [number, number, number][];
  /** group (o) name per triangle, "" when untagged */
  groups: string[];
  /** texture coordinates, when the OBJ carries vt lines */
  uvs: [number, number][];
  /** per-triangle vt index triples aligned with `triangles`, or null */
  triangleUvs: ([number, number, number] | null)[];
}

/** Parse the OBJ subset the service emits: v / vt / f / o / usemtl. */
export function parseObj(text: string): ParsedMesh {
  const vertices: Vec3[] = [];
  const uvs: [number, number][] = [];
  const triangles: [number, number, number][] = [];
  const groups: string[] = [];
  const triangleUvs: ([number, number, number] | null)[] = [];
  let currentGroup = "";
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    switch (parts[0]) {
      case "v":
        vertices.push([Number(parts[1]), Number(parts[2]), Number(parts[3])]);
        break;
      case "vt":
        uvs.push([Number(parts[1]), Number(parts[2])]);
        break;
      case "o":
        currentGroup = parts[1] ?? "";
        break;
      case "f": {
        if (parts.length !== 4) throw new Error(`non-triangular face: ${line}`);
        const v: number[] = [];
        const t: number[] = [];
        for (const part of parts.slice(1)) {
          const pieces = part.split("/");
          v.push(Number(pieces[0]) - 1);
          if (pieces[1]) t.push(Number(pieces[1]) - 1);
        }
        triangles.push([v[0], v[1], v[2]]);
        groups.push(currentGroup);
        triangleUvs.push(t.length === 3 ? [t[0], t[1], t[2]] : null);
        break;
      }
      default:
        break; // mtllib, usemtl, comments: irrelevant to geometry
    }
  }
  return { vertices, triangles, groups, uvs, triangleUvs };
}

export function meshBounds(mesh: ParsedMesh): { min: Vec3; max: Vec3; center: Vec3; radius: number } {
  const min: Vec3 = [Infinity, Infinity, Infinity];
  const max: Vec3 = [-Infinity, -Infinity, -Infinity];
  for (const v of mesh.vertices) {
    for (let i = 0; i < 3; i++) {
      min[i] = Math.min(min[i], v[i]);
      max[i] = Math.max(max[i], v[i]);
    }
  }
  const center: Vec3 = [(min[0] + max[0]) / 2, (min[1] + max[1]) / 2, (min[2] + max[2]) / 2];
  const dx = max[0] - min[0];
  const dy = max[1] - min[1];
  const dz = max[2] - min[2];
  return { min, max, center, radius: Math.sqrt(dx * dx + dy * dy + dz * dz) / 2 || 1 };
}
