import math

import numpy as np
import pytest

from asbuilt.errors import BehindCameraError
from asbuilt.geometry import (
    CameraIntrinsics,
    PixelPoint,
    PlaneParams,
    Ray,
    RigidPose,
    Similarity,
    TriangleMesh,
    Vec3,
    apply_similarity,
    compose_similarity,
    invert_similarity,
    point_plane_distance,
    project,
    quat_normalize,
    ray_from_pixel,
    ray_triangle_intersect,
    rotation_angle_between,
)


def random_quat(rng):
    return quat_normalize(rng.normal(size=4))


def random_similarity(rng, smin=0.2, smax=5.0):
    return Similarity(
        random_quat(rng),
        Vec3.from_array(rng.uniform(-10, 10, 3)),
        float(rng.uniform(smin, smax)),
    )


def random_pose(rng):
    return RigidPose(random_quat(rng), Vec3.from_array(rng.uniform(-2, 2, 3)))


def similarity_matrix_oracle(T):
    """Independent 4x4 homogeneous-matrix expansion of a similarity."""
    M = np.eye(4)
    M[:3, :3] = T.scale * T.rotation_matrix()
    M[:3, 3] = T.translation.to_array()
    return M


K_DEFAULT = CameraIntrinsics(fx=100.0, fy=100.0, cx=0.0, cy=0.0, width=200, height=200)


class TestSimilarityOps:
    def test_apply_identity(self):
        p = Vec3(1.0, 2.0, 3.0)
        assert apply_similarity(Similarity.identity(), p) == p

    def test_apply_pure_scale(self):
        T = Similarity((1, 0, 0, 0), Vec3(0, 0, 0), 2.0)
        assert apply_similarity(T, Vec3(1, 0, 0)) == Vec3(2, 0, 0)

    def test_apply_matches_matrix_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            T = random_similarity(rng)
            p = rng.uniform(-5, 5, 3)
            got = apply_similarity(T, Vec3.from_array(p)).to_array()
            want = (similarity_matrix_oracle(T) @ np.append(p, 1.0))[:3]
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_compose_identity_neutral(self):
        rng = np.random.default_rng(2)
        B = random_similarity(rng)
        C = compose_similarity(Similarity.identity(), B)
        assert rotation_angle_between(C.rotation, B.rotation) < 1e-12
        assert C.scale == pytest.approx(B.scale)
        np.testing.assert_allclose(C.translation.to_array(), B.translation.to_array())

    def test_compose_defining_equation(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            A, B = random_similarity(rng), random_similarity(rng)
            AB = compose_similarity(A, B)
            for _ in range(5):
                p = Vec3.from_array(rng.uniform(-5, 5, 3))
                lhs = apply_similarity(AB, p).to_array()
                rhs = apply_similarity(A, apply_similarity(B, p)).to_array()
                np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_invert_identity_and_pure_scale(self):
        I = invert_similarity(Similarity.identity())
        assert I.scale == pytest.approx(1.0)
        T = Similarity((1, 0, 0, 0), Vec3(0, 0, 0), 4.0)
        assert invert_similarity(T).scale == pytest.approx(0.25)

    def test_invert_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            T = random_similarity(rng)
            TI = compose_similarity(T, invert_similarity(T))
            p = Vec3.from_array(rng.uniform(-5, 5, 3))
            np.testing.assert_allclose(apply_similarity(TI, p).to_array(), p.to_array(), atol=1e-9)

    def test_composition_associative(self):
        rng = np.random.default_rng(5)
        A, B, C = (random_similarity(rng) for _ in range(3))
        left = compose_similarity(compose_similarity(A, B), C)
        right = compose_similarity(A, compose_similarity(B, C))
        for _ in range(10):
            p = Vec3.from_array(rng.uniform(-3, 3, 3))
            np.testing.assert_allclose(
                apply_similarity(left, p).to_array(),
                apply_similarity(right, p).to_array(),
                atol=1e-9,
            )

    def test_distance_ratios_preserved(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            T = random_similarity(rng)
            p = Vec3.from_array(rng.uniform(-5, 5, 3))
            q = Vec3.from_array(rng.uniform(-5, 5, 3))
            dist = (apply_similarity(T, p) - apply_similarity(T, q)).norm()
            assert dist == pytest.approx(T.scale * (p - q).norm(), abs=1e-9)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            Similarity((1, 0, 0, 0), Vec3(0, 0, 0), -1.0)


class TestProjection:
    def test_optical_axis(self):
        K = CameraIntrinsics(500, 500, 320, 240, 640, 480)
        px = project(K, RigidPose.identity(), Vec3(0, 0, 1))
        assert (px.u, px.v) == (320, 240)

    def test_similar_triangles(self):
        px = project(K_DEFAULT, RigidPose.identity(), Vec3(1, 0, 2))
        assert (px.u, px.v) == (50.0, 0.0)

    def test_behind_camera(self):
        with pytest.raises(BehindCameraError):
            project(K_DEFAULT, RigidPose.identity(), Vec3(0, 0, -1))

    def test_requires_world_to_camera(self):
        pose = RigidPose.identity(direction="camera_to_world")
        with pytest.raises(ValueError):
            project(K_DEFAULT, pose, Vec3(0, 0, 1))

    def test_ray_from_pixel_principal_point(self):
        K = CameraIntrinsics(500, 500, 320, 240, 640, 480)
        ray = ray_from_pixel(K, RigidPose.identity(), PixelPoint(320, 240))
        np.testing.assert_allclose(ray.origin.to_array(), [0, 0, 0], atol=1e-15)
        np.testing.assert_allclose(ray.direction.to_array(), [0, 0, 1], atol=1e-15)

    def test_project_ray_round_trip(self):
        K = CameraIntrinsics(800, 760, 315, 250, 640, 480)
        rng = np.random.default_rng(7)
        for _ in range(100):
            pose = random_pose(rng)
            px = PixelPoint(float(rng.uniform(0, K.width)), float(rng.uniform(0, K.height)))
            ray = ray_from_pixel(K, pose, px)
            for t in (0.5, 2.0, 37.0):
                p = Vec3.from_array(ray.origin.to_array() + t * ray.direction.to_array())
                back = project(K, pose, p)
                assert abs(back.u - px.u) < 1e-6 and abs(back.v - px.v) < 1e-6


def intersect_oracle(ray, v0, v1, v2):
    """Two-step oracle: plane intersection, then barycentric containment."""
    p0, p1, p2 = (v.to_array() for v in (v0, v1, v2))
    n = np.cross(p1 - p0, p2 - p0)
    o, d = ray.origin.to_array(), ray.direction.to_array()
    denom = n @ d
    if abs(denom) < 1e-12:
        return None
    t = (n @ (p0 - o)) / denom
    if t < 0:
        return None
    x = o + t * d
    # barycentrics by solving the 2x2 edge system
    e1, e2, w = p1 - p0, p2 - p0, x - p0
    d11, d12, d22 = e1 @ e1, e1 @ e2, e2 @ e2
    dw1, dw2 = w @ e1, w @ e2
    den = d11 * d22 - d12 * d12
    b1 = (d22 * dw1 - d12 * dw2) / den
    b2 = (d11 * dw2 - d12 * dw1) / den
    b0 = 1.0 - b1 - b2
    if b0 < 0 or b1 < 0 or b2 < 0 or b1 > 1 or b2 > 1:
        return None
    return t, x, (b0, b1, b2)


class TestRayTriangle:
    TRI = (Vec3(-1, -1, 0), Vec3(2, -1, 0), Vec3(-1, 2, 0))

    def test_axis_aligned_hit(self):
        ray = Ray(Vec3(0, 0, -1), Vec3(0, 0, 1))
        hit = ray_triangle_intersect(ray, *self.TRI)
        assert hit is not None
        t, point, bary = hit
        assert t == pytest.approx(1.0)
        np.testing.assert_allclose(point.to_array(), [0, 0, 0], atol=1e-12)
        assert sum(bary) == pytest.approx(1.0)

    def test_reversed_direction_misses(self):
        ray = Ray(Vec3(0, 0, -1), Vec3(0, 0, -1))
        assert ray_triangle_intersect(ray, *self.TRI) is None

    def test_against_two_step_oracle(self):
        rng = np.random.default_rng(8)
        hits = 0
        for i in range(1000):
            tri = [Vec3.from_array(rng.uniform(-2, 2, 3)) for _ in range(3)]
            origin = rng.uniform(-3, 3, 3)
            if i % 2 == 0:
                d = rng.normal(size=3)
            else:
                # aim near the centroid so hits are well represented
                centroid = sum(v.to_array() for v in tri) / 3
                d = centroid - origin + rng.normal(scale=0.3, size=3)
            d /= np.linalg.norm(d)
            ray = Ray(Vec3.from_array(origin), Vec3.from_array(d))
            got = ray_triangle_intersect(ray, *tri)
            want = intersect_oracle(ray, *tri)
            if want is None:
                assert got is None
            else:
                assert got is not None
                hits += 1
                np.testing.assert_allclose(got[1].to_array(), want[1], atol=1e-9)
                np.testing.assert_allclose(got[2], want[2], atol=1e-9)
        assert hits > 20  # sanity: the comparison actually exercised hits

    def test_hit_point_lies_on_triangle_plane(self):
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 50:
            tri = [Vec3.from_array(rng.uniform(-2, 2, 3)) for _ in range(3)]
            target = (tri[0].to_array() + tri[1].to_array() + tri[2].to_array()) / 3
            origin = rng.uniform(-3, 3, 3)
            d = target - origin
            d /= np.linalg.norm(d)
            ray = Ray(Vec3.from_array(origin), Vec3.from_array(d))
            hit = ray_triangle_intersect(ray, *tri)
            if hit is None:
                continue
            n = np.cross(tri[1].to_array() - tri[0].to_array(), tri[2].to_array() - tri[0].to_array())
            plane = PlaneParams.from_normal_point(n, tri[0].to_array())
            assert abs(point_plane_distance(plane, hit[1])) < 1e-9
            checked += 1


class TestPlaneDistance:
    def test_on_plane(self):
        assert point_plane_distance(PlaneParams(0, 0, 1, 0), Vec3(5, 5, 0)) == 0.0

    def test_axis_offset(self):
        assert point_plane_distance(PlaneParams(0, 0, 1, 0), Vec3(0, 0, 3)) == 3.0

    def test_plane_through_three_samples(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            pts = rng.uniform(-5, 5, (3, 3))
            n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
            if np.linalg.norm(n) < 1e-6:
                continue
            plane = PlaneParams.from_normal_point(n, pts[0])
            for p in pts:
                assert abs(point_plane_distance(plane, Vec3.from_array(p))) < 1e-9


class TestMeshValidation:
    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            TriangleMesh(np.zeros((2, 3)), np.array([[0, 1, 2]]))

    def test_degenerate_triangle(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
        with pytest.raises(ValueError):
            TriangleMesh(verts, np.array([[0, 1, 2]]))

    def test_plane_tag_length(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        with pytest.raises(ValueError):
            TriangleMesh(verts, np.array([[0, 1, 2]]), plane_tags=("a", "b"))


class TestPoseTag:
    def test_inverted_swaps_direction(self):
        rng = np.random.default_rng(11)
        pose = random_pose(rng)
        assert pose.inverted().direction == "camera_to_world"
        back = pose.inverted().inverted()
        assert rotation_angle_between(back.rotation, pose.rotation) < 1e-12
        np.testing.assert_allclose(
            back.translation.to_array(), pose.translation.to_array(), atol=1e-12
        )

    def test_camera_center(self):
        rng = np.random.default_rng(12)
        pose = random_pose(rng)
        c = pose.camera_center().to_array()
        # center must project to the origin of the camera frame
        pc = pose.rotation_matrix() @ c + pose.translation.to_array()
        np.testing.assert_allclose(pc, [0, 0, 0], atol=1e-12)

    def test_ray_origin_is_camera_center(self):
        ray = ray_from_pixel(K_DEFAULT, RigidPose.identity(), PixelPoint(10, 10))
        np.testing.assert_allclose(ray.origin.to_array(), [0, 0, 0], atol=1e-15)
