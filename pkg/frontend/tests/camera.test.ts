import { describe, expect, it } from "vitest";

import { OrbitCamera } from "../src/camera.js";
import type { Vec3 } from "../src/types.js";

function pointToRayDistance(p: Vec3, origin: Vec3, dir: Vec3): number {
  const v: Vec3 = [p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]];
  const t = v[0] * dir[0] + v[1] * dir[1] + v[2] * dir[2];
  const closest: Vec3 = [origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]];
  return Math.hypot(p[0] - closest[0], p[1] - closest[1], p[2] - closest[2]);
}

function mulberry32(seed: number): () => number {
  let a = seed;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

describe("OrbitCamera", () => {
  it("ray through a projected point passes through the point", () => {
    const rand = mulberry32(7);
    for (let trial = 0; trial < 200; trial++) {
      const cam = new OrbitCamera(
        [rand() * 10 - 5, rand() * 10 - 5, rand() * 10 - 5],
        2 + rand() * 15,
        rand() * Math.PI * 2,
        (rand() - 0.5) * 2.8,
        Math.PI / 6 + rand() * (Math.PI / 3),
      );
      const p: Vec3 = [rand() * 20 - 10, rand() * 20 - 10, rand() * 20 - 10];
      const screen = cam.projectToScreen(p, 900, 640);
      if (!screen) continue;
      const ray = cam.screenToRay(screen.x, screen.y, 900, 640);
      expect(pointToRayDistance(p, ray.origin, ray.direction)).toBeLessThan(1e-9);
    }
  });

  it("ray origin is the camera position", () => {
    const cam = new OrbitCamera([1, 2, 3], 5, 0.7, 0.2);
    const ray = cam.screenToRay(450, 320, 900, 640);
    expect(ray.origin).toEqual(cam.position());
  });

  it("center pixel looks at the target", () => {
    const cam = new OrbitCamera([2, -1, 4], 8, 1.1, -0.4);
    const ray = cam.screenToRay(450, 320, 900, 640);
    expect(pointToRayDistance(cam.target, ray.origin, ray.direction)).toBeLessThan(1e-9);
  });

  it("direction is unit length", () => {
    const cam = new OrbitCamera();
    const ray = cam.screenToRay(10, 600, 900, 640);
    const n = Math.hypot(...ray.direction);
    expect(Math.abs(n - 1)).toBeLessThan(1e-12);
  });

  it("orbit clamps elevation and zoom stays positive", () => {
    const cam = new OrbitCamera();
    cam.orbit(0, 10);
    expect(cam.elevation).toBeLessThan(Math.PI / 2);
    cam.orbit(0, -20);
    expect(cam.elevation).toBeGreaterThan(-Math.PI / 2);
    for (let i = 0; i < 100; i++) cam.zoom(0.1);
    expect(cam.distance).toBeGreaterThan(0);
  });
});
