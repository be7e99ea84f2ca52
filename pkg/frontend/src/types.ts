export type Vec3 = [number, number, number];
export type Pixel = [number, number];

export interface StatusInfo {
  registered: boolean;
  aligned: boolean;
  planes: boolean;
  keyframes: number;
  region_of_interest: string[];
}

export interface KeyframeInfo {
  id: number;
  image: string;
  pose: PoseRecord;
  direction: string;
  aligned: boolean;
}

export interface PoseRecord {
  qw: number;
  qx: number;
  qy: number;
  qz: number;
  tx: number;
  ty: number;
  tz: number;
}

export interface PickResult {
  hit: Vec3;
  vertex_index: number;
  vertex: Vec3;
  point_index: number;
  keyframe_id: number;
  image: string;
}

export interface SnapResult {
  hit: Vec3;
  vertex_index: number;
  vertex: Vec3;
}

export interface MeasureResult {
  meters: number;
  scale_used: {
    index: number;
    pixels_per_meter: number;
    window_corners: Pixel[];
  };
}

export interface RegisterResult {
  similarity: PoseRecord & { scale: number };
  residual_m: number;
  registration_consistency: { rotation_rad: number; center_m: number };
}

export interface RegistrationClicks {
  model: Vec3[];
  image: Pixel[];
}
