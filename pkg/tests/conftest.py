import numpy as np
import pytest

from asbuilt.geometry import (
    CameraIntrinsics,
    RigidPose,
    Similarity,
    Vec3,
    quat_from_matrix,
    quat_normalize,
)


def look_at_pose(center, target, up=(0.0, 1.0, 0.0)):
    """world->camera pose of a camera at ``center`` aimed at ``target``."""
    center = np.asarray(center, dtype=float)
    z = np.asarray(target, dtype=float) - center
    z /= np.linalg.norm(z)
    x = np.cross(z, np.asarray(up, dtype=float))
    if np.linalg.norm(x) < 1e-9:
        x = np.array([1.0, 0.0, 0.0])
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    R = np.vstack([x, y, z])
    return RigidPose(quat_from_matrix(R), Vec3.from_array(-R @ center))


def random_quat(rng):
    return quat_normalize(rng.normal(size=4))


def random_pose(rng, direction="world_to_camera"):
    return RigidPose(random_quat(rng), Vec3.from_array(rng.uniform(-2, 2, 3)), direction)


def random_similarity(rng, smin=0.2, smax=5.0):
    return Similarity(
        random_quat(rng),
        Vec3.from_array(rng.uniform(-10, 10, 3)),
        float(rng.uniform(smin, smax)),
    )


def camera_with_points(rng, n, K, depth=(2.0, 10.0), spread=2.0):
    """Random world->camera pose plus n world points in front of the camera."""
    pose = random_pose(rng)
    inv = pose.inverted()
    R_cw = inv.rotation_matrix()
    c = inv.translation.to_array()
    pts_cam = np.column_stack(
        [
            rng.uniform(-spread, spread, n),
            rng.uniform(-spread, spread, n),
            rng.uniform(depth[0], depth[1], n),
        ]
    )
    pts_world = pts_cam @ R_cw.T + c
    return pose, [Vec3.from_array(p) for p in pts_world]


@pytest.fixture
def default_K():
    return CameraIntrinsics(fx=800.0, fy=800.0, cx=320.0, cy=240.0, width=640, height=480)


@pytest.fixture
def hd_K():
    return CameraIntrinsics(fx=1400.0, fy=1400.0, cx=960.0, cy=520.0, width=1920, height=1040)
