"""Deterministic synthetic facade: scene, pinhole renderer, and fixture data.

The scene is a planar wall at z = 0 spanning x in [0, width], y in [0,
height] (y up), with dark window rectangles of known metric size. Cameras sit
at z > 0 looking along -z, so renders are fronto-parallel; keyframe pairs
related by a pure x-translation produce exactly pixel-shifted images, which
makes the NCC/triangulation bootstrap exact and leaves window detection as
the only discretized step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CameraIntrinsics,
    PlaneParams,
    RigidPose,
    Similarity,
    TriangleMesh,
    Vec3,
    invert_similarity,
    project,
    quat_from_matrix,
)
from .registration import align_map
from .spatial import Keyframe, MapPoint
from .texturing import PlaneBoundary

WINDOW_WIDTH_M = 2.01168  # 6.6 ft
WINDOW_HEIGHT_M = 1.8288  # 6 ft

WALL_LEVEL = 200
GLASS_LEVEL = 40
SKY_LEVEL = 235


@dataclass(frozen=True)
class FacadeScene:
    """Flat wall with window cutouts; optionally checkered for texture tests."""

    width_m: float = 16.0
    height_m: float = 6.0
    windows: tuple = ()  # (x0, y0, w, h) rects in wall meters, y up
    checker_m: float | None = None

    def color_at(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Grayscale level of wall points (x, y); SKY outside the wall."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        img = np.full(x.shape, float(SKY_LEVEL))
        on_wall = (x >= 0) & (x <= self.width_m) & (y >= 0) & (y <= self.height_m)
        if self.checker_m:
            cells = (np.floor(x / self.checker_m) + np.floor(y / self.checker_m)) % 2
            wall_color = np.where(cells > 0, 230.0, 25.0)
        else:
            wall_color = np.full(x.shape, float(WALL_LEVEL))
        img[on_wall] = wall_color[on_wall]
        for x0, y0, w, h in self.windows:
            inside = (x > x0) & (x < x0 + w) & (y > y0) & (y < y0 + h)
            img[inside] = float(GLASS_LEVEL)
        return img


def fronto_pose(center) -> RigidPose:
    """world->camera pose of a camera at ``center`` looking along -z with
    image up = +y (right-handed: x right, y down, z forward)."""
    R = np.diag([1.0, -1.0, -1.0])
    c = np.asarray(center, dtype=float)
    return RigidPose(quat_from_matrix(R), Vec3.from_array(-R @ c))


def render(K: CameraIntrinsics, pose: RigidPose, scene: FacadeScene) -> np.ndarray:
    """Render the wall plane through a pinhole camera; (h, w, 3) uint8."""
    w2c = pose.as_world_to_camera()
    R = w2c.rotation_matrix()
    origin = w2c.camera_center().to_array()
    cols, rows = np.meshgrid(np.arange(K.width), np.arange(K.height))
    d_cam = np.stack(
        [
            (cols + 0.5 - K.cx) / K.fx,
            (rows + 0.5 - K.cy) / K.fy,
            np.ones_like(cols, dtype=float),
        ],
        axis=-1,
    )
    d_world = d_cam @ R  # R^T applied to each direction
    dz = d_world[..., 2]
    dz = np.where(np.abs(dz) < 1e-12, 1e-12, dz)
    t = -origin[2] / dz
    x = origin[0] + t * d_world[..., 0]
    y = origin[1] + t * d_world[..., 1]
    gray = np.where(t > 0, scene.color_at(x, y), float(SKY_LEVEL))
    img = np.rint(gray).clip(0, 255).astype(np.uint8)
    return np.repeat(img[:, :, None], 3, axis=2)


def default_scene(n_windows: int = 3, spacing_m: float = 5.0,
                  first_center_x: float = 3.0, center_y: float = 2.8) -> FacadeScene:
    windows = []
    for k in range(n_windows):
        cx = first_center_x + k * spacing_m
        windows.append(
            (cx - WINDOW_WIDTH_M / 2, center_y - WINDOW_HEIGHT_M / 2,
             WINDOW_WIDTH_M, WINDOW_HEIGHT_M)
        )
    width = first_center_x + (n_windows - 1) * spacing_m + first_center_x
    return FacadeScene(width_m=width, height_m=6.0, windows=tuple(windows))


def facade_mesh(scene: FacadeScene, tag: str = "wall_main") -> TriangleMesh:
    """Wall rectangle plus a vertex fan per window (center vertex included,
    so spatial queries snap to window centers)."""
    verts = [
        [0.0, 0.0, 0.0],
        [scene.width_m, 0.0, 0.0],
        [scene.width_m, scene.height_m, 0.0],
        [0.0, scene.height_m, 0.0],
    ]
    tris = [[0, 1, 2], [0, 2, 3]]
    for x0, y0, w, h in scene.windows:
        base = len(verts)
        verts.extend(
            [
                [x0, y0, 0.0],
                [x0 + w, y0, 0.0],
                [x0 + w, y0 + h, 0.0],
                [x0, y0 + h, 0.0],
                [x0 + w / 2, y0 + h / 2, 0.0],
            ]
        )
        c = base + 4
        tris.extend([[base, base + 1, c], [base + 1, base + 2, c],
                     [base + 2, base + 3, c], [base + 3, base, c]])
    tags = tuple(tag for _ in tris)
    return TriangleMesh(np.array(verts), np.array(tris), plane_tags=tags)


def wall_boundary(scene: FacadeScene, tag: str = "wall_main") -> PlaneBoundary:
    """Wall rectangle as a texture boundary, normal facing the cameras (+z)."""
    plane = PlaneParams(0.0, 0.0, 1.0, 0.0)
    poly = (
        Vec3(0.0, 0.0, 0.0),
        Vec3(scene.width_m, 0.0, 0.0),
        Vec3(scene.width_m, scene.height_m, 0.0),
        Vec3(0.0, scene.height_m, 0.0),
    )
    return PlaneBoundary(plane=plane, polygon=poly, target_id=tag, plane_index=0)


@dataclass(frozen=True)
class FacadeFixture:
    """Complete synthetic project: model-frame truth plus SLAM-frame inputs."""

    scene: FacadeScene
    intrinsics: CameraIntrinsics
    model_keyframes: tuple  # Keyframe, model frame
    slam_keyframes: tuple  # Keyframe, SLAM frame (first pose = identity)
    model_points: tuple  # MapPoint, model frame
    slam_points: tuple  # MapPoint, SLAM frame
    mesh: TriangleMesh
    similarity_true: Similarity  # SLAM -> model
    clicks_model: tuple  # four window-corner Vec3 (model frame)
    clicks_kf0: tuple  # their exact pixels in keyframe 0
    window_keyframe: dict  # window index -> keyframe id tagged to its cluster
    camera_depth_m: float

    def render_keyframe(self, kf_id: int) -> np.ndarray:
        kf = next(k for k in self.model_keyframes if k.id == kf_id)
        return render(self.intrinsics, kf.pose, self.scene)


def make_fixture(n_windows: int = 3, seed: int = 0, scale: float = 2.0,
                 depth_m: float = 4.0, baseline_m: float = 0.16) -> FacadeFixture:
    """Build the deterministic facade fixture.

    Keyframe 0 and 1 form the alignment stereo pair (pure x-translation whose
    image shift is an exact integer pixel count); keyframe 2+k hovers in
    front of window k and tags its map-point cluster.
    """
    rng = np.random.default_rng(seed)
    scene = default_scene(n_windows=n_windows)
    K = CameraIntrinsics(fx=1000.0, fy=1000.0, cx=640.0, cy=480.0, width=1280, height=960)
    centers = [(3.0 + 5.0 * k, 2.8) for k in range(n_windows)]

    cam_positions = [
        (centers[0][0], centers[0][1], depth_m),
        (centers[0][0] + baseline_m, centers[0][1], depth_m),
    ]
    for cx, cy in centers:
        cam_positions.append((cx, cy, depth_m))
    model_keyframes = tuple(
        Keyframe(id=i, pose=fronto_pose(c), image_ref=f"images/kf{i}.png")
        for i, c in enumerate(cam_positions)
    )
    window_keyframe = {k: 2 + k for k in range(n_windows)}

    points = []

    def add_point(x, y, tag):
        p = Vec3(float(x), float(y), float(rng.normal(0.0, 0.003)))
        points.append(MapPoint(position=p, index=len(points), source_keyframe=tag))

    in_window = lambda x, y: any(
        x0 < x < x0 + w and y0 < y < y0 + h for x0, y0, w, h in scene.windows
    )
    added = 0
    while added < 400:
        x = rng.uniform(0.2, scene.width_m - 0.2)
        y = rng.uniform(0.2, scene.height_m - 0.2)
        if in_window(x, y):
            continue
        add_point(x, y, added % 2)
        added += 1
    for k, (cx, cy) in enumerate(centers):
        for _ in range(12):
            add_point(cx + rng.normal(0, 0.1), cy + rng.normal(0, 0.1), window_keyframe[k])
    model_points = tuple(points)

    # ground-truth similarity: SLAM frame = keyframe-0 camera frame / scale
    kf0_c2w = model_keyframes[0].pose.inverted()
    T_true = Similarity(kf0_c2w.rotation, kf0_c2w.translation, scale)
    slam_points, slam_keyframes = align_map(
        model_points, model_keyframes, invert_similarity(T_true)
    )

    mesh = facade_mesh(scene)
    x0, y0, w, h = scene.windows[0]
    clicks_model = (
        Vec3(x0, y0 + h, 0.0),  # top-left of the window as seen in the image
        Vec3(x0 + w, y0 + h, 0.0),
        Vec3(x0 + w, y0, 0.0),
        Vec3(x0, y0, 0.0),
    )
    clicks_kf0 = tuple(
        project(K, model_keyframes[0].pose, p) for p in clicks_model
    )
    return FacadeFixture(
        scene=scene,
        intrinsics=K,
        model_keyframes=model_keyframes,
        slam_keyframes=tuple(slam_keyframes),
        model_points=model_points,
        slam_points=tuple(slam_points),
        mesh=mesh,
        similarity_true=T_true,
        clicks_model=clicks_model,
        clicks_kf0=clicks_kf0,
        window_keyframe=window_keyframe,
        camera_depth_m=depth_m,
    )


def three_plane_cloud(rng, per_plane: int = 400, outliers: int = 200,
                      noise: float = 0.005, extent: float = 4.0):
    """Labeled RANSAC benchmark cloud: three perpendicular plane patches plus
    uniform outliers kept clear of every plane. Returns (points, labels)."""
    pts, labels = [], []
    for axis in range(3):
        a = rng.uniform(0.0, extent, per_plane)
        b = rng.uniform(0.0, extent, per_plane)
        plane_pts = np.zeros((per_plane, 3))
        other = [i for i in range(3) if i != axis]
        plane_pts[:, other[0]] = a
        plane_pts[:, other[1]] = b
        plane_pts[:, axis] = rng.normal(0, noise, per_plane)
        pts.append(plane_pts)
        labels.extend([axis] * per_plane)
    kept = []
    while len(kept) < outliers:
        cand = rng.uniform(0.0, extent, 3)
        if cand.min() > 0.15:
            kept.append(cand)
    pts.append(np.array(kept))
    labels.extend([-1] * outliers)
    return np.vstack(pts), np.array(labels)
