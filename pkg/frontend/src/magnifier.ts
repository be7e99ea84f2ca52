/** Loupe that follows the cursor over the keyframe image. */
export interface MagnifierConfig {
  zoom: number; // magnification factor
  radiusPx: number; // lens radius on screen
}

export const DEFAULT_MAGNIFIER: MagnifierConfig = { zoom: 4, radiusPx: 80 };

export function validateMagnifier(cfg: MagnifierConfig): MagnifierConfig {
  if (cfg.zoom < 2) throw new Error("magnifier zoom must be at least 2");
  if (cfg.radiusPx <= 0) throw new Error("magnifier radius must be positive");
  return cfg;
}

export interface SourceRect {
  x: number;
  y: number;
  size: number;
}

/**
 * Square source region of the image shown inside the lens when the cursor
 * is at (u, v): centered on the cursor, side 2*radius/zoom.
 */
export function magnifierSourceRect(u: number, v: number, cfg: MagnifierConfig): SourceRect {
  const size = (2 * cfg.radiusPx) / cfg.zoom;
  return { x: u - size / 2, y: v - size / 2, size };
}
