import numpy as np
import pytest

from asbuilt.errors import EmptyDatabaseError, IntegrityError, QueryMissError
from asbuilt.geometry import (
    Ray,
    RigidPose,
    TriangleMesh,
    Vec3,
    ray_triangle_intersect,
)
from asbuilt.spatial import (
    Keyframe,
    MapPoint,
    SpatialDatabase,
    build_database,
    nearest_map_point,
    pick,
    query_image,
    snap_to_vertex,
)


def random_mesh(rng, n_tris=40):
    verts = []
    tris = []
    for _ in range(n_tris):
        base = rng.uniform(-3, 3, 3)
        tri = base + rng.uniform(-1, 1, (3, 3))
        if np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0])) < 1e-3:
            continue
        i = len(verts)
        verts.extend(tri)
        tris.append([i, i + 1, i + 2])
    return TriangleMesh(np.array(verts), np.array(tris))


def facade_mesh():
    """Unit square at z=0 split in two triangles."""
    verts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    return TriangleMesh(verts, tris)


def pick_oracle(mesh, ray):
    """Brute-force scan using the scalar intersector, lowest-index tie rule."""
    best = None
    for i in range(len(mesh.triangles)):
        tri = [Vec3.from_array(v) for v in mesh.triangle_vertices(i)]
        hit = ray_triangle_intersect(ray, *tri)
        if hit is None:
            continue
        if best is None or hit[0] < best[0] - 1e-9:
            best = (hit[0], hit[1])
    return None if best is None else best[1]


def simple_db(mesh=None, points=None, keyframes=None, planes=()):
    mesh = mesh if mesh is not None else facade_mesh()
    keyframes = keyframes or [Keyframe(id=5, pose=RigidPose.identity(), image_ref="kf5")]
    points = points or [MapPoint(position=Vec3(0.5, 0.5, 0.0), index=0, source_keyframe=5)]
    return build_database(points, keyframes, mesh, planes)


class TestPick:
    def test_center_hit(self):
        db = simple_db()
        ray = Ray(Vec3(0.5, 0.5, -5.0), Vec3(0.0, 0.0, 1.0))
        hit = pick(db, ray)
        assert hit is not None
        np.testing.assert_allclose(hit.to_array(), [0.5, 0.5, 0.0], atol=1e-12)

    def test_parallel_offset_miss(self):
        db = simple_db()
        ray = Ray(Vec3(-1.0, 0.5, -5.0), Vec3(0.0, 1.0, 0.0))
        assert pick(db, ray) is None

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(80)
        mesh = random_mesh(rng)
        db = simple_db(mesh=mesh)
        hits = 0
        for i in range(1000):
            origin = rng.uniform(-5, 5, 3)
            if i % 2 == 0:
                d = rng.normal(size=3)
            else:
                d = rng.uniform(-3, 3, 3) - origin
            d = d / np.linalg.norm(d)
            ray = Ray(Vec3.from_array(origin), Vec3.from_array(d))
            got = pick(db, ray)
            want = pick_oracle(mesh, ray)
            if want is None:
                assert got is None
            else:
                assert got is not None
                hits += 1
                np.testing.assert_allclose(got.to_array(), want.to_array(), atol=1e-9)
        assert hits > 100


class TestSnap:
    def test_exact_vertex(self):
        mesh = facade_mesh()
        idx, v = snap_to_vertex(mesh, Vec3(1.0, 1.0, 0.0))
        assert idx == 2
        np.testing.assert_allclose(v.to_array(), [1, 1, 0])

    def test_tie_breaks_to_lowest_index(self):
        # vertices 0 and 1 equidistant from the midpoint of their edge
        mesh = facade_mesh()
        idx, _ = snap_to_vertex(mesh, Vec3(0.5, 0.0, 0.0))
        assert idx == 0

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(81)
        mesh = random_mesh(rng)
        for _ in range(1000):
            p = Vec3.from_array(rng.uniform(-4, 4, 3))
            idx, v = snap_to_vertex(mesh, p)
            d2 = np.sum((mesh.vertices - p.to_array()) ** 2, axis=1)
            want = int(np.argmin(d2))
            assert idx == want


class TestNearestMapPoint:
    def test_singleton(self):
        db = simple_db()
        assert nearest_map_point(db, Vec3(9, 9, 9)).index == 0

    def test_tie_breaks_to_lowest_position(self):
        pts = [
            MapPoint(position=Vec3(-1.0, 0.0, 0.0), index=3, source_keyframe=5),
            MapPoint(position=Vec3(1.0, 0.0, 0.0), index=7, source_keyframe=5),
        ]
        db = simple_db(points=pts)
        assert nearest_map_point(db, Vec3(0.0, 0.0, 0.0)).index == 3

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(82)
        pts = [
            MapPoint(position=Vec3.from_array(rng.uniform(-3, 3, 3)), index=i, source_keyframe=5)
            for i in range(200)
        ]
        db = simple_db(points=pts)
        positions = np.array([p.position.to_array() for p in pts])
        for _ in range(1000):
            q = rng.uniform(-4, 4, 3)
            got = nearest_map_point(db, Vec3.from_array(q))
            want = int(np.argmin(np.sum((positions - q) ** 2, axis=1)))
            assert got.index == pts[want].index

    def test_empty_database(self):
        db = SpatialDatabase(points=(), keyframes={}, mesh=facade_mesh(), planes=())
        with pytest.raises(EmptyDatabaseError):
            nearest_map_point(db, Vec3(0, 0, 0))


class TestQueryImage:
    def test_singleton_returns_tagged_keyframe(self):
        db = simple_db()
        ray = Ray(Vec3(0.5, 0.5, -2.0), Vec3(0.0, 0.0, 1.0))
        kf_id, vertex_index, vertex, point_index = query_image(db, ray)
        assert kf_id == 5
        assert point_index == 0
        assert vertex_index in range(4)

    def test_window_clusters_return_their_keyframes(self):
        # 3x1 facade with one vertex + point cluster per "window"
        verts = [[0, 0, 0], [3, 0, 0], [3, 1, 0], [0, 1, 0]]
        window_centers = [(0.5, 0.5), (1.5, 0.5), (2.5, 0.5)]
        for cx, cy in window_centers:
            verts.append([cx, cy, 0.0])
        tris = []
        for w in range(3):
            c = 4 + w
            tris.extend([[0, 1, c], [1, 2, c], [2, 3, c], [3, 0, c]])
        # drop degenerate triangles (collinear combinations) by filtering area
        good = []
        varr = np.array(verts, dtype=float)
        for t in tris:
            a = 0.5 * np.linalg.norm(
                np.cross(varr[t[1]] - varr[t[0]], varr[t[2]] - varr[t[0]])
            )
            if a > 1e-9:
                good.append(t)
        mesh = TriangleMesh(varr, np.array(good))
        keyframes = [Keyframe(id=10 + w, pose=RigidPose.identity(), image_ref=f"kf{w}") for w in range(3)]
        points = []
        rng = np.random.default_rng(83)
        for w, (cx, cy) in enumerate(window_centers):
            for _ in range(10):
                p = Vec3(cx + float(rng.normal(0, 0.05)), cy + float(rng.normal(0, 0.05)), 0.0)
                points.append(MapPoint(position=p, index=len(points), source_keyframe=10 + w))
        db = build_database(points, keyframes, mesh)
        for w, (cx, cy) in enumerate(window_centers):
            ray = Ray(Vec3(cx, cy, -4.0), Vec3(0.0, 0.0, 1.0))
            kf_id, _, vertex, point_index = query_image(db, ray)
            assert kf_id == 10 + w
            assert db.points[point_index].source_keyframe == kf_id

    def test_miss_raises(self):
        db = simple_db()
        ray = Ray(Vec3(10.0, 10.0, -5.0), Vec3(0.0, 0.0, 1.0))
        with pytest.raises(QueryMissError):
            query_image(db, ray)

    def test_deterministic(self):
        db = simple_db()
        ray = Ray(Vec3(0.25, 0.75, -2.0), Vec3(0.0, 0.0, 1.0))
        assert query_image(db, ray) == query_image(db, ray)

    def test_provenance_soundness(self):
        rng = np.random.default_rng(84)
        mesh = random_mesh(rng)
        keyframes = [Keyframe(id=k, pose=RigidPose.identity(), image_ref=f"kf{k}") for k in range(4)]
        points = [
            MapPoint(
                position=Vec3.from_array(rng.uniform(-3, 3, 3)),
                index=i,
                source_keyframe=int(rng.integers(0, 4)),
            )
            for i in range(50)
        ]
        db = build_database(points, keyframes, mesh)
        answered = 0
        for _ in range(200):
            origin = rng.uniform(-5, 5, 3)
            d = rng.uniform(-3, 3, 3) - origin
            d /= np.linalg.norm(d)
            try:
                kf_id, vertex_index, vertex, point_index = query_image(
                    db, Ray(Vec3.from_array(origin), Vec3.from_array(d))
                )
            except QueryMissError:
                continue
            answered += 1
            assert kf_id in db.keyframes
            np.testing.assert_allclose(db.mesh.vertices[vertex_index], vertex.to_array())
        assert answered > 20


class TestBuildDatabase:
    def test_valid_inputs(self):
        db = simple_db()
        assert set(db.keyframes) == {5}

    def test_dangling_keyframe_reference(self):
        points = [MapPoint(position=Vec3(0, 0, 0), index=42, source_keyframe=99)]
        keyframes = [Keyframe(id=5, pose=RigidPose.identity(), image_ref="kf5")]
        with pytest.raises(IntegrityError) as exc_info:
            build_database(points, keyframes, facade_mesh())
        assert exc_info.value.context["index"] == 42
        assert exc_info.value.context["keyframe"] == 99

    def test_duplicate_point_index(self):
        keyframes = [Keyframe(id=5, pose=RigidPose.identity(), image_ref="kf5")]
        points = [
            MapPoint(position=Vec3(0, 0, 0), index=1, source_keyframe=5),
            MapPoint(position=Vec3(1, 0, 0), index=1, source_keyframe=5),
        ]
        with pytest.raises(IntegrityError):
            build_database(points, keyframes, facade_mesh())

    def test_empty_mesh_rejected(self):
        keyframes = [Keyframe(id=5, pose=RigidPose.identity(), image_ref="kf5")]
        mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))
        with pytest.raises(IntegrityError):
            build_database([], keyframes, mesh)
