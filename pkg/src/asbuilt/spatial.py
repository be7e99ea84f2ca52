"""Spatial database: keyframe-tagged map points aligned to the CAD model.

Clicking the model casts a ray, the nearest mesh hit is snapped to the
closest vertex, and the map point nearest that vertex yields the source
keyframe whose image answers the query. All queries behave exactly like
brute-force linear scans; the vectorized kernels are only a speedup.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDatabaseError, IntegrityError, QueryMissError
from .geometry import Ray, RigidPose, TriangleMesh, Vec3
from .planes import FittedPlane


@dataclass(frozen=True)
class MapPoint:
    """A reconstructed 3D point with its source-keyframe tag."""

    position: Vec3
    index: int
    source_keyframe: int


@dataclass(frozen=True)
class Keyframe:
    """A retained camera frame: pose plus a locator for its image file."""

    id: int
    pose: RigidPose
    image_ref: str
    intrinsics_ref: str = "default"


@dataclass(frozen=True)
class SpatialDatabase:
    points: tuple
    keyframes: dict  # id -> Keyframe
    mesh: TriangleMesh
    planes: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "planes", tuple(self.planes))
        # cached dense arrays for the query kernels
        pos = np.array([p.position.to_array() for p in self.points], dtype=float)
        object.__setattr__(self, "_positions", pos.reshape(-1, 3))

    def point_positions(self) -> np.ndarray:
        return self._positions


def build_database(points, keyframes, mesh: TriangleMesh, planes=()) -> SpatialDatabase:
    """Validate referential integrity and assemble the database."""
    kf_store = {kf.id: kf for kf in keyframes}
    if len(kf_store) != len(list(keyframes)):
        dupes = [kf.id for kf in keyframes]
        raise IntegrityError("duplicate keyframe id", ids=[i for i in dupes if dupes.count(i) > 1])
    seen = set()
    for p in points:
        if p.index in seen:
            raise IntegrityError(f"duplicate map point index {p.index}", index=p.index)
        seen.add(p.index)
        if p.source_keyframe not in kf_store:
            raise IntegrityError(
                f"map point {p.index} tagged to absent keyframe {p.source_keyframe}",
                index=p.index,
                keyframe=p.source_keyframe,
            )
    if len(mesh.triangles) == 0:
        raise IntegrityError("mesh has no triangles")
    return SpatialDatabase(points=tuple(points), keyframes=kf_store, mesh=mesh, planes=tuple(planes))


def pick(db: SpatialDatabase, ray: Ray):
    """Nearest ray-mesh intersection, or ``None`` on a miss.

    Ties within 1e-9 on the ray parameter resolve to the lowest triangle
    index. Vectorized Moeller-Trumbore over every triangle.
    """
    return pick_mesh(db.mesh, ray)


def pick_mesh(mesh: TriangleMesh, ray: Ray):
    """Mesh-only form of :func:`pick` (no database required)."""
    v = mesh.vertices
    tri = mesh.triangles
    o = ray.origin.to_array()
    d = ray.direction.to_array()

    p0 = v[tri[:, 0]]
    e1 = v[tri[:, 1]] - p0
    e2 = v[tri[:, 2]] - p0
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) >= 1e-12
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = o - p0
    b1 = np.einsum("ij,ij->i", tvec, pvec) * inv_det
    ok &= (b1 >= 0.0) & (b1 <= 1.0)
    qvec = np.cross(tvec, e1)
    b2 = (qvec @ d) * inv_det
    ok &= (b2 >= 0.0) & (b1 + b2 <= 1.0)
    t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    ok &= t >= 0.0
    if not np.any(ok):
        return None
    ts = np.where(ok, t, np.inf)
    tmin = ts.min()
    hit_index = int(np.argmax(ts <= tmin + 1e-9))  # lowest tied triangle index
    return Vec3.from_array(o + ts[hit_index] * d)


def snap_to_vertex(mesh: TriangleMesh, p: Vec3):
    """Closest mesh vertex; ties resolve to the lowest vertex index."""
    if len(mesh.vertices) == 0:
        raise EmptyDatabaseError("mesh has no vertices")
    d2 = np.sum((mesh.vertices - p.to_array()) ** 2, axis=1)
    idx = int(np.argmin(d2))
    return idx, Vec3.from_array(mesh.vertices[idx])


def nearest_map_point(db: SpatialDatabase, p: Vec3) -> MapPoint:
    """Closest map point; ties resolve to the lowest point-list position."""
    if not db.points:
        raise EmptyDatabaseError("spatial database has no map points")
    d2 = np.sum((db.point_positions() - p.to_array()) ** 2, axis=1)
    return db.points[int(np.argmin(d2))]


def query_image(db: SpatialDatabase, ray: Ray):
    """Full spatial query: pick -> snap -> nearest point -> source keyframe.

    Returns ``(keyframe_id, snapped_vertex_index, snapped_vertex,
    map_point_index)`` so callers can audit the provenance of the answer.
    """
    hit = pick(db, ray)
    if hit is None:
        raise QueryMissError("ray does not intersect the model mesh")
    vertex_index, vertex = snap_to_vertex(db.mesh, hit)
    point = nearest_map_point(db, vertex)
    return point.source_keyframe, vertex_index, vertex, point.index
