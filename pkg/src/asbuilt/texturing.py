"""Photorealistic plane texturing.

Registered camera poses make feature-based stitching unnecessary: each
selected keyframe is rectified onto its plane's own metric pixel grid, the
rectified views are blended with viewing-angle weights, and the blend is
texture-mapped onto the plane boundary. Per-plane keyframes are subsampled
to every tenth eligible frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCameraError, DegenerateInputError
from .geometry import (
    CameraIntrinsics,
    PlaneParams,
    RigidPose,
    Vec3,
    point_plane_distance,
    project,
)
from .spatial import Keyframe, SpatialDatabase

EVERY_NTH_DEFAULT = 10
DEFAULT_RESOLUTION_PX_PER_M = 100.0


@dataclass(frozen=True)
class PlaneBoundary:
    """Polygon on a fitted plane delimiting the region to texture."""

    plane: PlaneParams
    polygon: tuple  # ordered Vec3 vertices on the plane
    target_id: str
    plane_index: int | None = None  # index into the database's fitted planes

    def __post_init__(self):
        object.__setattr__(self, "polygon", tuple(self.polygon))
        if len(self.polygon) < 3:
            raise ValueError("boundary polygon needs at least three vertices")
        for v in self.polygon:
            if abs(point_plane_distance(self.plane, v)) > 1e-6:
                raise ValueError(f"polygon vertex {v} is off the boundary plane")


@dataclass(frozen=True)
class OrthoFrame:
    """Metric pixel grid on a plane: origin + (u_axis, v_axis) in meters."""

    origin: Vec3
    u_axis: Vec3
    v_axis: Vec3
    meters_per_pixel: float
    width: int
    height: int

    def __post_init__(self):
        u = self.u_axis.to_array()
        v = self.v_axis.to_array()
        if abs(np.linalg.norm(u) - 1) > 1e-9 or abs(np.linalg.norm(v) - 1) > 1e-9:
            raise ValueError("ortho axes must be unit length")
        if abs(float(u @ v)) > 1e-9:
            raise ValueError("ortho axes must be orthogonal")
        if self.meters_per_pixel <= 0 or self.width < 1 or self.height < 1:
            raise ValueError("invalid ortho raster geometry")

    def normal(self) -> np.ndarray:
        return np.cross(self.u_axis.to_array(), self.v_axis.to_array())

    def plane_points(self) -> np.ndarray:
        """(h, w, 3) world point of every pixel center."""
        cols = (np.arange(self.width) + 0.5) * self.meters_per_pixel
        rows = (np.arange(self.height) + 0.5) * self.meters_per_pixel
        u = self.u_axis.to_array()
        v = self.v_axis.to_array()
        return (
            self.origin.to_array()[None, None, :]
            + cols[None, :, None] * u[None, None, :]
            + rows[:, None, None] * v[None, None, :]
        )


@dataclass(frozen=True)
class Orthophoto:
    """A keyframe rectified onto an ortho frame, with per-pixel weights."""

    frame: OrthoFrame
    raster: np.ndarray  # (h, w, 3) float
    weights: np.ndarray  # (h, w) float, 0 where uncovered


@dataclass(frozen=True)
class TextureAtlas:
    textures: dict  # target_id -> (rgb uint8 (h, w, 3), alpha uint8 (h, w))
    uvs: dict  # target_id -> {vertex_index: (u, v) in [0, 1]}
    frames: dict  # target_id -> OrthoFrame
    zero_coverage: tuple  # target ids with no covered pixel


def frame_for_boundary(boundary: PlaneBoundary,
                       resolution_px_per_m: float = DEFAULT_RESOLUTION_PX_PER_M) -> OrthoFrame:
    """Deterministic ortho frame: u along the polygon's longest edge, v in
    plane, raster covering the polygon's in-plane bounding box."""
    poly = np.array([p.to_array() for p in boundary.polygon])
    n = boundary.plane.normal()
    edges = np.diff(np.vstack([poly, poly[:1]]), axis=0)
    longest = edges[int(np.argmax(np.linalg.norm(edges, axis=1)))]
    u = longest - (longest @ n) * n
    norm_u = np.linalg.norm(u)
    if norm_u < 1e-12:
        raise DegenerateInputError("boundary polygon edge is normal to the plane")
    u = u / norm_u
    v = np.cross(n, u)
    ref = poly[0]
    coords = (poly - ref) @ np.column_stack([u, v])
    umin, vmin = coords.min(axis=0)
    umax, vmax = coords.max(axis=0)
    mpp = 1.0 / resolution_px_per_m
    width = max(1, int(math.ceil((umax - umin) * resolution_px_per_m)))
    height = max(1, int(math.ceil((vmax - vmin) * resolution_px_per_m)))
    origin = ref + umin * u + vmin * v
    return OrthoFrame(
        origin=Vec3.from_array(origin),
        u_axis=Vec3.from_array(u),
        v_axis=Vec3.from_array(v),
        meters_per_pixel=mpp,
        width=width,
        height=height,
    )


def frustum_intersects_polygon(pose: RigidPose, K: CameraIntrinsics, polygon) -> bool:
    """True when some sample of the polygon (vertices, edge midpoints,
    centroid) projects inside the image in front of the camera."""
    pts = [p.to_array() for p in polygon]
    samples = list(pts)
    for a, b in zip(pts, pts[1:] + pts[:1]):
        samples.append(0.5 * (a + b))
    samples.append(np.mean(pts, axis=0))
    w2c = pose.as_world_to_camera()
    for s in samples:
        try:
            px = project(K, w2c, Vec3.from_array(s))
        except BehindCameraError:
            continue
        if 0 <= px.u < K.width and 0 <= px.v < K.height:
            return True
    return False


def _plane_for_boundary(db: SpatialDatabase, boundary: PlaneBoundary):
    if boundary.plane_index is not None:
        if 0 <= boundary.plane_index < len(db.planes):
            return db.planes[boundary.plane_index]
        return None
    best, best_angle = None, math.inf
    for plane in db.planes:
        cosang = abs(float(plane.params.normal() @ boundary.plane.normal()))
        angle = math.acos(min(1.0, cosang))
        if angle < best_angle:
            best, best_angle = plane, angle
    if best is not None and best_angle < math.radians(10.0):
        return best
    return None


def select_keyframes_for_plane(db: SpatialDatabase, boundary: PlaneBoundary,
                               K: CameraIntrinsics,
                               every_nth: int = EVERY_NTH_DEFAULT) -> list[Keyframe]:
    """Keyframes observing the boundary's plane, id-sorted, every tenth.

    Eligible keyframes are the sources of the plane's member points whose
    frustum intersects the boundary polygon; of the id-sorted eligible list,
    positions 0, every_nth, 2*every_nth... are returned.
    """
    plane = _plane_for_boundary(db, boundary)
    if plane is None:
        return []
    members = set(plane.member_indices)
    kf_ids = sorted(
        {p.source_keyframe for p in db.points if p.index in members}
    )
    eligible = [
        db.keyframes[k]
        for k in kf_ids
        if frustum_intersects_polygon(db.keyframes[k].pose, K, boundary.polygon)
    ]
    return eligible[::every_nth]


def rectify_to_plane(pose: RigidPose, image: np.ndarray, K: CameraIntrinsics,
                     frame: OrthoFrame) -> Orthophoto:
    """Resample a keyframe onto the plane's metric pixel grid.

    Every ortho pixel's plane point is projected into the keyframe and
    bilinearly sampled when visible; its weight is the cosine between the
    plane normal and the direction toward the camera (zero for pixels seen
    from behind, outside the image, or behind the camera).
    """
    img = np.asarray(image, dtype=float)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    w2c = pose.as_world_to_camera()
    center = w2c.camera_center().to_array()
    n = frame.normal()
    signed = float((center - frame.origin.to_array()) @ n)
    if abs(signed) < 1e-9:
        raise DegenerateInputError("camera center lies on the texture plane")

    pts = frame.plane_points()  # (h, w, 3)
    h, w = frame.height, frame.width
    R = w2c.rotation_matrix()
    t = w2c.translation.to_array()
    pc = pts @ R.T + t
    z = pc[..., 2]
    visible = z > 1e-9
    zsafe = np.where(visible, z, 1.0)
    u = K.fx * pc[..., 0] / zsafe + K.cx
    v = K.fy * pc[..., 1] / zsafe + K.cy

    # bilinear sample positions relative to pixel centers
    x = u - 0.5
    y = v - 0.5
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    inside = (x0 >= 0) & (y0 >= 0) & (x0 + 1 <= img.shape[1] - 1) & (y0 + 1 <= img.shape[0] - 1)
    ok = visible & inside
    x0c = np.clip(x0, 0, img.shape[1] - 2)
    y0c = np.clip(y0, 0, img.shape[0] - 2)
    fx = (x - x0c)[..., None]
    fy = (y - y0c)[..., None]
    tl = img[y0c, x0c]
    tr = img[y0c, x0c + 1]
    bl = img[y0c + 1, x0c]
    br = img[y0c + 1, x0c + 1]
    raster = (1 - fy) * ((1 - fx) * tl + fx * tr) + fy * ((1 - fx) * bl + fx * br)

    to_cam = center[None, None, :] - pts
    dist = np.linalg.norm(to_cam, axis=2)
    cosang = np.einsum("ijk,k->ij", to_cam, n) / np.maximum(dist, 1e-12)
    weights = np.where(ok, np.maximum(cosang, 0.0), 0.0)
    raster = np.where(weights[..., None] > 0, raster, 0.0)
    return Orthophoto(frame=frame, raster=raster, weights=weights)


def composite(orthos) -> tuple[np.ndarray, np.ndarray]:
    """Weighted per-pixel average of orthophotos on a common frame.

    Returns ``(rgb uint8, alpha uint8)`` with alpha 0 flagging pixels no
    contributor covered.
    """
    orthos = list(orthos)
    if not orthos:
        raise ValueError("composite needs at least one orthophoto")
    frame = orthos[0].frame
    for o in orthos[1:]:
        if o.frame != frame:
            raise ValueError("orthophotos must share a common frame")
    acc = np.zeros((frame.height, frame.width, 3), dtype=float)
    wsum = np.zeros((frame.height, frame.width), dtype=float)
    for o in orthos:
        acc += o.raster * o.weights[..., None]
        wsum += o.weights
    covered = wsum > 0
    rgb = np.zeros_like(acc)
    rgb[covered] = acc[covered] / wsum[covered, None]
    alpha = np.where(covered, 255, 0).astype(np.uint8)
    return np.rint(rgb).clip(0, 255).astype(np.uint8), alpha


def build_textured_model(db: SpatialDatabase, boundaries, K: CameraIntrinsics,
                         image_loader,
                         resolution_px_per_m: float = DEFAULT_RESOLUTION_PX_PER_M,
                         every_nth: int = EVERY_NTH_DEFAULT) -> TextureAtlas:
    """Composite a texture per plane boundary and assign mesh UVs.

    ``image_loader`` maps a keyframe's ``image_ref`` to its raster. Mesh
    vertices referenced by triangles tagged with a boundary's target id get
    UVs from their in-plane coordinates. Deterministic for fixed inputs.
    """
    textures = {}
    uvs = {}
    frames = {}
    zero_coverage = []
    for boundary in boundaries:
        frame = frame_for_boundary(boundary, resolution_px_per_m)
        selected = select_keyframes_for_plane(db, boundary, K, every_nth)
        orthos = [
            rectify_to_plane(kf.pose, image_loader(kf.image_ref), K, frame)
            for kf in selected
        ]
        if orthos:
            rgb, alpha = composite(orthos)
        else:
            rgb = np.zeros((frame.height, frame.width, 3), dtype=np.uint8)
            alpha = np.zeros((frame.height, frame.width), dtype=np.uint8)
        if not alpha.any():
            zero_coverage.append(boundary.target_id)
        textures[boundary.target_id] = (rgb, alpha)
        frames[boundary.target_id] = frame

        tag_uvs = {}
        if db.mesh.plane_tags is not None:
            origin = frame.origin.to_array()
            u_axis = frame.u_axis.to_array()
            v_axis = frame.v_axis.to_array()
            span_u = frame.width * frame.meters_per_pixel
            span_v = frame.height * frame.meters_per_pixel
            for tri_idx, tag in enumerate(db.mesh.plane_tags):
                if tag != boundary.target_id:
                    continue
                for vi in db.mesh.triangles[tri_idx]:
                    if int(vi) in tag_uvs:
                        continue
                    rel = db.mesh.vertices[vi] - origin
                    tu = float(rel @ u_axis) / span_u
                    tv = float(rel @ v_axis) / span_v
                    tag_uvs[int(vi)] = (min(max(tu, 0.0), 1.0), min(max(tv, 0.0), 1.0))
        uvs[boundary.target_id] = tag_uvs
    return TextureAtlas(
        textures=textures, uvs=uvs, frames=frames, zero_coverage=tuple(zero_coverage)
    )
