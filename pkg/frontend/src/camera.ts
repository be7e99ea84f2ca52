import type { Vec3 } from "./types.js";

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function normalize(a: Vec3): Vec3 {
  const n = Math.hypot(a[0], a[1], a[2]);
  return [a[0] / n, a[1] / n, a[2] / n];
}

export interface ScreenRay {
  origin: Vec3;
  direction: Vec3;
}

/**
 * Free-look orbit camera for the model viewport.
 *
 * This is the one piece of geometry the client owns: constructing the pick
 * ray through a clicked pixel (and the inverse projection used purely for
 * drawing overlays). Everything else is answered by the service.
 */
export class OrbitCamera {
  target: Vec3;
  distance: number;
  azimuth: number; // radians around +y
  elevation: number; // radians above the horizontal plane
  fovY: number; // vertical field of view, radians

  constructor(target: Vec3 = [0, 0, 0], distance = 10, azimuth = 0, elevation = 0, fovY = Math.PI / 4) {
    this.target = target;
    this.distance = distance;
    this.azimuth = azimuth;
    this.elevation = elevation;
    this.fovY = fovY;
  }

  position(): Vec3 {
    const ce = Math.cos(this.elevation);
    return [
      this.target[0] + this.distance * ce * Math.sin(this.azimuth),
      this.target[1] + this.distance * Math.sin(this.elevation),
      this.target[2] + this.distance * ce * Math.cos(this.azimuth),
    ];
  }

  /** forward / right / up unit vectors of the view frame. */
  basis(): { forward: Vec3; right: Vec3; up: Vec3 } {
    const pos = this.position();
    const forward = normalize(sub(this.target, pos));
    const worldUp: Vec3 = Math.abs(forward[1]) > 0.999 ? [0, 0, 1] : [0, 1, 0];
    const right = normalize(cross(forward, worldUp));
    const up = cross(right, forward);
    return { forward, right, up };
  }

  /** Ray through viewport pixel (px, py) of a width x height canvas. */
  screenToRay(px: number, py: number, width: number, height: number): ScreenRay {
    const { forward, right, up } = this.basis();
    const tanHalf = Math.tan(this.fovY / 2);
    const aspect = width / height;
    const sx = (px - width / 2) / (width / 2);
    const sy = (py - height / 2) / (height / 2);
    const direction = normalize([
      forward[0] + right[0] * sx * tanHalf * aspect - up[0] * sy * tanHalf,
      forward[1] + right[1] * sx * tanHalf * aspect - up[1] * sy * tanHalf,
      forward[2] + right[2] * sx * tanHalf * aspect - up[2] * sy * tanHalf,
    ]);
    return { origin: this.position(), direction };
  }

  /**
   * Screen position and view depth of a world point; used only to draw the
   * mesh and overlay markers. Returns null behind the camera.
   */
  projectToScreen(p: Vec3, width: number, height: number): { x: number; y: number; depth: number } | null {
    const { forward, right, up } = this.basis();
    const v = sub(p, this.position());
    const depth = dot(v, forward);
    if (depth <= 1e-9) return null;
    const tanHalf = Math.tan(this.fovY / 2);
    const aspect = width / height;
    const sx = dot(v, right) / (depth * tanHalf * aspect);
    const sy = dot(v, up) / (depth * tanHalf);
    return { x: width / 2 + (sx * width) / 2, y: height / 2 - (sy * height) / 2, depth };
  }

  orbit(dAzimuth: number, dElevation: number): void {
    this.azimuth += dAzimuth;
    const limit = Math.PI / 2 - 0.01;
    this.elevation = Math.max(-limit, Math.min(limit, this.elevation + dElevation));
  }

  zoom(factor: number): void {
    this.distance = Math.max(0.05, this.distance * factor);
  }

  pan(dRight: number, dUp: number): void {
    const { right, up } = this.basis();
    this.target = [
      this.target[0] + right[0] * dRight + up[0] * dUp,
      this.target[1] + right[1] * dRight + up[1] * dUp,
      this.target[2] + right[2] * dRight + up[2] * dUp,
    ];
  }
}
