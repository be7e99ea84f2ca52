"""Core value types and exact geometric primitives.

Conventions used throughout the toolkit:

* Rotations are unit quaternions ``(w, x, y, z)``.
* Poses carry an explicit ``direction`` tag (``world_to_camera`` or
  ``camera_to_world``) because silent convention mismatches are the dominant
  failure mode when mixing SLAM and CAD data.
* A similarity transform maps a point ``p`` to ``s * R @ p + t``.
* Continuous pixel coordinates: the center of raster cell ``(row, col)`` is
  at ``(u, v) = (col + 0.5, row + 0.5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCameraError, DegenerateInputError

WORLD_TO_CAMERA = "world_to_camera"
CAMERA_TO_WORLD = "camera_to_world"

_UNIT_TOL = 1e-9


# ---------------------------------------------------------------------------
# quaternion helpers (w, x, y, z)

def quat_normalize(q) -> tuple[float, float, float, float]:
    w, x, y, z = (float(v) for v in q)
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n == 0.0:
        raise DegenerateInputError("zero quaternion")
    return (w / n, x / n, y / n, z / n)


def quat_multiply(a, b) -> tuple[float, float, float, float]:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_conjugate(q) -> tuple[float, float, float, float]:
    w, x, y, z = q
    return (w, -x, -y, -z)


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_matrix(R) -> tuple[float, float, float, float]:
    """Unit quaternion of a proper rotation matrix (Shepperd's branch rule)."""
    R = np.asarray(R, dtype=float)
    t = np.trace(R)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2
        q = (0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s)
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        q = ((R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s)
    elif R[1, 1] >= R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        q = ((R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s)
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        q = ((R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s)
    return quat_normalize(q)


def quat_rotate(q, p: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(p, dtype=float)


def rotation_angle(q) -> float:
    """Rotation angle in radians represented by quaternion ``q`` (sign-free).

    atan2 form: accurate for angles near zero, where acos(w) loses digits.
    """
    w, x, y, z = (float(v) for v in q)
    return 2.0 * math.atan2(math.sqrt(x * x + y * y + z * z), abs(w))


def rotation_angle_between(qa, qb) -> float:
    """Geodesic angle between two rotations."""
    return rotation_angle(quat_multiply(quat_conjugate(qa), qb))


def _check_unit_quat(q):
    n = math.sqrt(sum(float(v) ** 2 for v in q))
    if abs(n - 1.0) > _UNIT_TOL:
        raise ValueError(f"quaternion norm {n!r} not unit within {_UNIT_TOL}")


# ---------------------------------------------------------------------------
# value types

@dataclass(frozen=True)
class Vec3:
    """3D point/vector; meters in the model frame, unitless in camera frames."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("Vec3 components must be finite")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_array(a) -> "Vec3":
        a = np.asarray(a, dtype=float).reshape(3)
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def norm(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)


@dataclass(frozen=True)
class PixelPoint:
    """Continuous 2D image location in pixels."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError("PixelPoint coordinates must be finite")

    def to_array(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=float)


@dataclass(frozen=True)
class RigidPose:
    """Rotation + translation with an explicit transform direction tag."""

    rotation: tuple[float, float, float, float]
    translation: Vec3
    direction: str = WORLD_TO_CAMERA

    def __post_init__(self):
        _check_unit_quat(self.rotation)
        if self.direction not in (WORLD_TO_CAMERA, CAMERA_TO_WORLD):
            raise ValueError(f"unknown pose direction {self.direction!r}")

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def inverted(self) -> "RigidPose":
        qi = quat_conjugate(self.rotation)
        ti = -(quat_to_matrix(qi) @ self.translation.to_array())
        other = CAMERA_TO_WORLD if self.direction == WORLD_TO_CAMERA else WORLD_TO_CAMERA
        return RigidPose(qi, Vec3.from_array(ti), other)

    def as_world_to_camera(self) -> "RigidPose":
        return self if self.direction == WORLD_TO_CAMERA else self.inverted()

    def camera_center(self) -> Vec3:
        """Camera center expressed in the world frame."""
        if self.direction == CAMERA_TO_WORLD:
            return self.translation
        return self.inverted().translation

    def apply(self, p: Vec3) -> Vec3:
        return Vec3.from_array(self.rotation_matrix() @ p.to_array() + self.translation.to_array())

    @staticmethod
    def identity(direction: str = WORLD_TO_CAMERA) -> "RigidPose":
        return RigidPose((1.0, 0.0, 0.0, 0.0), Vec3(0.0, 0.0, 0.0), direction)


@dataclass(frozen=True)
class Similarity:
    """Uniform-scale rigid transform ``p -> s * R @ p + t``."""

    rotation: tuple[float, float, float, float]
    translation: Vec3
    scale: float

    def __post_init__(self):
        _check_unit_quat(self.rotation)
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("similarity scale must be a positive finite real")

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    @staticmethod
    def identity() -> "Similarity":
        return Similarity((1.0, 0.0, 0.0, 0.0), Vec3(0.0, 0.0, 0.0), 1.0)


@dataclass(frozen=True)
class Ray:
    """Half-line with unit direction."""

    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        if abs(self.direction.norm() - 1.0) > _UNIT_TOL:
            raise ValueError("ray direction must be unit length")


@dataclass(frozen=True)
class PlaneParams:
    """Plane ``a*x + b*y + c*z + d = 0`` with (a, b, c) stored as a unit normal."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        n = self.a ** 2 + self.b ** 2 + self.c ** 2
        if abs(n - 1.0) > _UNIT_TOL:
            raise ValueError("plane normal must be unit length")
        if not math.isfinite(self.d):
            raise ValueError("plane offset must be finite")

    def normal(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)

    @staticmethod
    def from_normal_point(normal, point) -> "PlaneParams":
        n = np.asarray(normal, dtype=float)
        norm = np.linalg.norm(n)
        if norm < 1e-15:
            raise DegenerateInputError("zero-length plane normal")
        n = n / norm
        d = -float(n @ np.asarray(point, dtype=float))
        return PlaneParams(float(n[0]), float(n[1]), float(n[2]), d)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics; images are assumed pre-undistorted."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")


@dataclass(frozen=True)
class TriangleMesh:
    """Triangle soup with optional per-triangle plane-boundary tags."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int
    plane_tags: tuple | None = None  # length m, one tag per triangle

    _MIN_AREA = 1e-12  # m^2

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError("vertices must be an (n, 3) array")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must be an (m, 3) index array")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        if t.size:
            e1 = v[t[:, 1]] - v[t[:, 0]]
            e2 = v[t[:, 2]] - v[t[:, 0]]
            areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
            if np.any(areas <= self._MIN_AREA):
                bad = int(np.argmin(areas))
                raise ValueError(f"degenerate triangle at index {bad}")
        if self.plane_tags is not None and len(self.plane_tags) != len(t):
            raise ValueError("plane_tags length must equal triangle count")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    def __eq__(self, other):
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and self.plane_tags == other.plane_tags
        )

    def triangle_vertices(self, index: int) -> np.ndarray:
        return self.vertices[self.triangles[index]]


# ---------------------------------------------------------------------------
# operations

def apply_similarity(T: Similarity, p: Vec3) -> Vec3:
    return Vec3.from_array(T.scale * (T.rotation_matrix() @ p.to_array()) + T.translation.to_array())


def apply_similarity_array(T: Similarity, pts: np.ndarray) -> np.ndarray:
    """Vectorized form of :func:`apply_similarity` over an (n, 3) array."""
    pts = np.asarray(pts, dtype=float)
    return T.scale * (pts @ T.rotation_matrix().T) + T.translation.to_array()


def compose_similarity(A: Similarity, B: Similarity) -> Similarity:
    """Similarity applying ``B`` first, then ``A``."""
    q = quat_normalize(quat_multiply(A.rotation, B.rotation))
    t = A.scale * (A.rotation_matrix() @ B.translation.to_array()) + A.translation.to_array()
    return Similarity(q, Vec3.from_array(t), A.scale * B.scale)


def invert_similarity(T: Similarity) -> Similarity:
    qi = quat_conjugate(T.rotation)
    ti = -(quat_to_matrix(qi) @ T.translation.to_array()) / T.scale
    return Similarity(qi, Vec3.from_array(ti), 1.0 / T.scale)


def project(K: CameraIntrinsics, pose: RigidPose, p: Vec3) -> PixelPoint:
    """Pinhole projection of a world point through a world->camera pose.

    Raises :class:`BehindCameraError` when the point's camera-frame depth is
    not strictly positive (z <= 1e-9).
    """
    if pose.direction != WORLD_TO_CAMERA:
        raise ValueError("project requires a world_to_camera pose")
    pc = pose.rotation_matrix() @ p.to_array() + pose.translation.to_array()
    if pc[2] <= 1e-9:
        raise BehindCameraError("point at or behind the camera", depth=float(pc[2]))
    return PixelPoint(K.fx * pc[0] / pc[2] + K.cx, K.fy * pc[1] / pc[2] + K.cy)


def ray_from_pixel(K: CameraIntrinsics, pose: RigidPose, px: PixelPoint) -> Ray:
    """World-frame viewing ray through a pixel; inverse of :func:`project`."""
    w2c = pose.as_world_to_camera()
    d_cam = np.array([(px.u - K.cx) / K.fx, (px.v - K.cy) / K.fy, 1.0])
    R = w2c.rotation_matrix()
    d_world = R.T @ d_cam
    d_world /= np.linalg.norm(d_world)
    origin = -(R.T @ w2c.translation.to_array())
    return Ray(Vec3.from_array(origin), Vec3.from_array(d_world))


def ray_triangle_intersect(ray: Ray, v0: Vec3, v1: Vec3, v2: Vec3):
    """Moeller-Trumbore intersection.

    Returns ``(t, point, (b0, b1, b2))`` for a hit with ``t >= 0`` and
    barycentric coordinates summing to one, or ``None`` on a miss.
    """
    o = ray.origin.to_array()
    d = ray.direction.to_array()
    p0, p1, p2 = v0.to_array(), v1.to_array(), v2.to_array()
    e1 = p1 - p0
    e2 = p2 - p0
    pvec = np.cross(d, e2)
    det = float(e1 @ pvec)
    if abs(det) < 1e-12:
        return None
    inv_det = 1.0 / det
    tvec = o - p0
    b1 = float(tvec @ pvec) * inv_det
    if b1 < 0.0 or b1 > 1.0:
        return None
    qvec = np.cross(tvec, e1)
    b2 = float(d @ qvec) * inv_det
    if b2 < 0.0 or b1 + b2 > 1.0:
        return None
    t = float(e2 @ qvec) * inv_det
    if t < 0.0:
        return None
    point = Vec3.from_array(o + t * d)
    return t, point, (1.0 - b1 - b2, b1, b2)


def point_plane_distance(plane: PlaneParams, p: Vec3) -> float:
    """Signed distance; zero iff the point lies on the plane."""
    return plane.a * p.x + plane.b * p.y + plane.c * p.z + plane.d
