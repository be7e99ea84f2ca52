import { OrbitCamera } from "./camera.js";
import type { ParsedMesh } from "./obj.js";
import type { Vec3 } from "./types.js";

interface DrawnTriangle {
  pts: { x: number; y: number }[];
  depth: number;
  shade: number;
  group: string;
  index: number;
}

/**
 * Canvas renderer for the model viewport: painter-sorted flat shading, an
 * optional texture atlas (texture-browse mode), and overlay markers.
 */
export class ModelViewer {
  private textures = new Map<string, { img: CanvasImageSource; width: number; height: number }>();
  private texturedMesh: ParsedMesh | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly camera: OrbitCamera,
  ) {}

  setTextures(mesh: ParsedMesh, images: Map<string, { img: CanvasImageSource; width: number; height: number }>): void {
    this.texturedMesh = mesh;
    this.textures = images;
  }

  clearTextures(): void {
    this.texturedMesh = null;
    this.textures.clear();
  }

  render(mesh: ParsedMesh | null, markers: { p: Vec3; label?: string; color: string }[], textured: boolean): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = "#1b1e23";
    ctx.fillRect(0, 0, width, height);
    const activeMesh = textured && this.texturedMesh ? this.texturedMesh : mesh;
    if (!activeMesh) return;

    const projected: ({ x: number; y: number; depth: number } | null)[] = activeMesh.vertices.map((v) =>
      this.camera.projectToScreen(v, width, height),
    );
    const light = this.camera.basis().forward;
    const drawn: DrawnTriangle[] = [];
    activeMesh.triangles.forEach((tri, i) => {
      const pts = tri.map((vi) => projected[vi]);
      if (pts.some((p) => p === null)) return;
      const [a, b, c] = tri.map((vi) => activeMesh.vertices[vi]);
      const e1: Vec3 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
      const e2: Vec3 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
      const n: Vec3 = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
      ];
      const nl = Math.hypot(n[0], n[1], n[2]) || 1;
      const shade = Math.abs((n[0] * light[0] + n[1] * light[1] + n[2] * light[2]) / nl);
      drawn.push({
        pts: pts as { x: number; y: number }[],
        depth: Math.max(...(pts as { depth: number }[]).map((p) => p.depth)),
        shade,
        group: activeMesh.groups[i],
        index: i,
      });
    });
    drawn.sort((p, q) => q.depth - p.depth);
    for (const t of drawn) {
      const texture = textured ? this.textures.get(t.group) : undefined;
      const uvTri = textured && this.texturedMesh ? this.texturedMesh.triangleUvs[t.index] : null;
      if (texture && uvTri && this.texturedMesh) {
        this.drawTexturedTriangle(ctx, t.pts, uvTri, texture);
      } else {
        const level = Math.round(90 + 130 * t.shade);
        ctx.fillStyle = `rgb(${level},${level},${level + 10})`;
        ctx.strokeStyle = "rgba(0,0,0,0.25)";
        ctx.beginPath();
        ctx.moveTo(t.pts[0].x, t.pts[0].y);
        ctx.lineTo(t.pts[1].x, t.pts[1].y);
        ctx.lineTo(t.pts[2].x, t.pts[2].y);
        ctx.closePath();
        ctx.fill();
        ctx.stroke();
      }
    }
    for (const marker of markers) {
      const p = this.camera.projectToScreen(marker.p, width, height);
      if (!p) continue;
      ctx.fillStyle = marker.color;
      ctx.beginPath();
      ctx.arc(p.x, p.y, 6, 0, Math.PI * 2);
      ctx.fill();
      if (marker.label) {
        ctx.fillStyle = "#ffffff";
        ctx.font = "13px sans-serif";
        ctx.fillText(marker.label, p.x + 8, p.y - 8);
      }
    }
  }

  /** Affine map of one textured triangle (clip + setTransform). */
  private drawTexturedTriangle(
    ctx: CanvasRenderingContext2D,
    pts: { x: number; y: number }[],
    uvTri: [number, number, number],
    texture: { img: CanvasImageSource; width: number; height: number },
  ): void {
    if (!this.texturedMesh) return;
    const uv = uvTri.map((i) => this.texturedMesh!.uvs[i]);
    // texture-space coordinates (OBJ v runs bottom-up)
    const src = uv.map(([u, v]) => ({ x: u * texture.width, y: (1 - v) * texture.height }));
    const [s0, s1, s2] = src;
    const [d0, d1, d2] = pts;
    const det = (s1.x - s0.x) * (s2.y - s0.y) - (s2.x - s0.x) * (s1.y - s0.y);
    if (Math.abs(det) < 1e-9) return;
    const a = ((d1.x - d0.x) * (s2.y - s0.y) - (d2.x - d0.x) * (s1.y - s0.y)) / det;
    const b = ((d1.y - d0.y) * (s2.y - s0.y) - (d2.y - d0.y) * (s1.y - s0.y)) / det;
    const c = ((d2.x - d0.x) * (s1.x - s0.x) - (d1.x - d0.x) * (s2.x - s0.x)) / det;
    const d = ((d2.y - d0.y) * (s1.x - s0.x) - (d1.y - d0.y) * (s2.x - s0.x)) / det;
    const e = d0.x - a * s0.x - c * s0.y;
    const f = d0.y - b * s0.x - d * s0.y;
    ctx.save();
    ctx.beginPath();
    ctx.moveTo(d0.x, d0.y);
    ctx.lineTo(d1.x, d1.y);
    ctx.lineTo(d2.x, d2.y);
    ctx.closePath();
    ctx.clip();
    ctx.setTransform(a, b, c, d, e, f);
    ctx.drawImage(texture.img, 0, 0);
    ctx.restore();
  }
}
