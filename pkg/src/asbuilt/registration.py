"""Registering the keyframe map to the CAD model.

The first keyframe's pose in model coordinates comes from four clicked
3D-2D correspondences (P3P on three, the fourth disambiguates). The
map->model similarity comes from matching the clicked pixels into the second
keyframe with normalized cross-correlation, triangulating them in the SLAM
frame, and solving the absolute orientation between the triangulated points
and the clicked model points with Horn's closed-form quaternion method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BehindCameraError,
    DegenerateInputError,
    MatchFailureError,
    PatchBoundsError,
    ZeroBaselineError,
)
from .geometry import (
    CAMERA_TO_WORLD,
    WORLD_TO_CAMERA,
    CameraIntrinsics,
    PixelPoint,
    RigidPose,
    Similarity,
    Vec3,
    apply_similarity,
    project,
    quat_conjugate,
    quat_from_matrix,
    quat_multiply,
    quat_normalize,
)
from .spatial import Keyframe, MapPoint


@dataclass(frozen=True)
class Correspondence3D2D:
    model_point: Vec3
    image_point: PixelPoint


@dataclass(frozen=True)
class Correspondence3D3D:
    model_point: Vec3
    map_point: Vec3


@dataclass(frozen=True)
class PatchMatchConfig:
    patch_size: int = 11
    search_radius: int = 48
    min_ncc: float = 0.7

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be odd and >= 3")
        if self.search_radius < self.patch_size:
            raise ValueError("search_radius must be >= patch_size")
        if not -1.0 <= self.min_ncc <= 1.0:
            raise ValueError("min_ncc must lie in [-1, 1]")


# ---------------------------------------------------------------------------
# P3P

def _bearing(K: CameraIntrinsics, px: PixelPoint) -> np.ndarray:
    f = np.array([(px.u - K.cx) / K.fx, (px.v - K.cy) / K.fy, 1.0])
    return f / np.linalg.norm(f)


def _check_non_collinear(pts, tol=1e-10):
    p0, p1, p2 = pts
    span = max(np.linalg.norm(p1 - p0), np.linalg.norm(p2 - p0), np.linalg.norm(p2 - p1))
    area = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0))
    if span <= 0 or area < tol * span ** 2:
        raise DegenerateInputError("model points are collinear or coincident")


def _polish_distances(s, aa, bb, cc, ca, cb, cg):
    """Newton iterations on the three law-of-cosines equations."""
    s1, s2, s3 = s
    scale2 = max(aa, bb, cc)
    for _ in range(10):
        F = np.array([
            s2 * s2 + s3 * s3 - 2 * s2 * s3 * ca - aa,
            s1 * s1 + s3 * s3 - 2 * s1 * s3 * cb - bb,
            s1 * s1 + s2 * s2 - 2 * s1 * s2 * cg - cc,
        ])
        if np.max(np.abs(F)) < 1e-13 * scale2:
            break
        J = np.array([
            [0.0, 2 * s2 - 2 * s3 * ca, 2 * s3 - 2 * s2 * ca],
            [2 * s1 - 2 * s3 * cb, 0.0, 2 * s3 - 2 * s1 * cb],
            [2 * s1 - 2 * s2 * cg, 2 * s2 - 2 * s1 * cg, 0.0],
        ])
        try:
            ds = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        s1, s2, s3 = s1 + ds[0], s2 + ds[1], s3 + ds[2]
    return s1, s2, s3


def _rigid_fit_world_to_camera(world_pts, cam_pts) -> RigidPose:
    """Proper rigid transform with cam = R @ world + t (Kabsch)."""
    W = np.asarray(world_pts, dtype=float)
    C = np.asarray(cam_pts, dtype=float)
    wc, cc_ = W.mean(axis=0), C.mean(axis=0)
    H = (W - wc).T @ (C - cc_)
    U, _, Vt = np.linalg.svd(H)
    V = Vt.T
    D = np.diag([1.0, 1.0, float(np.sign(np.linalg.det(V @ U.T)))])
    R = V @ D @ U.T
    t = cc_ - R @ wc
    return RigidPose(quat_from_matrix(R), Vec3.from_array(t), WORLD_TO_CAMERA)


def solve_p3p(correspondences, K: CameraIntrinsics):
    """Absolute camera pose from three 3D-2D correspondences.

    Solves the classical distance-ratio quartic, polishes each admissible
    root with Newton steps, and fits the rigid pose. Returns up to four
    world->camera poses, each reprojecting the three inputs within 1e-4 px;
    the list is empty when no quartic root is admissible.
    """
    if len(correspondences) != 3:
        raise ValueError("solve_p3p takes exactly three correspondences")
    P = np.array([c.model_point.to_array() for c in correspondences])
    _check_non_collinear(P)
    f = np.array([_bearing(K, c.image_point) for c in correspondences])
    for i in range(3):
        for j in range(i + 1, 3):
            if 1.0 - abs(float(f[i] @ f[j])) < 1e-14:
                raise DegenerateInputError("bearing vectors are not pairwise distinct")

    aa = float(np.sum((P[1] - P[2]) ** 2))
    bb = float(np.sum((P[0] - P[2]) ** 2))
    cc = float(np.sum((P[0] - P[1]) ** 2))
    ca = float(f[1] @ f[2])
    cb = float(f[0] @ f[2])
    cg = float(f[0] @ f[1])

    k1 = (aa - cc) / bb
    A4 = (k1 - 1.0) ** 2 - 4.0 * cc / bb * ca * ca
    A3 = 4.0 * (k1 * (1.0 - k1) * cb - (1.0 - (aa + cc) / bb) * ca * cg + 2.0 * cc / bb * ca * ca * cb)
    A2 = 2.0 * (
        k1 * k1 - 1.0
        + 2.0 * k1 * k1 * cb * cb
        + 2.0 * ((bb - cc) / bb) * ca * ca
        - 4.0 * ((aa + cc) / bb) * ca * cb * cg
        + 2.0 * ((bb - aa) / bb) * cg * cg
    )
    A1 = 4.0 * (-k1 * (1.0 + k1) * cb + 2.0 * aa / bb * cg * cg * cb - (1.0 - (aa + cc) / bb) * ca * cg)
    A0 = (1.0 + k1) ** 2 - 4.0 * aa / bb * cg * cg

    coeffs = np.array([A4, A3, A2, A1, A0])
    if np.max(np.abs(coeffs)) == 0.0:
        return []
    roots = np.roots(coeffs) if abs(A4) > 1e-14 * np.max(np.abs(coeffs)) else np.roots(coeffs[1:])

    poses = []
    seen_distances = []
    for root in roots:
        if abs(root.imag) > 1e-6 * (1.0 + abs(root.real)):
            continue
        v = float(root.real)
        if v <= 0:
            continue
        den = 2.0 * (cg - v * ca)
        if abs(den) > 1e-9:
            u_candidates = [((-1.0 + k1) * v * v - 2.0 * k1 * cb * v + 1.0 + k1) / den]
        else:
            # fall back to the quadratic in u from the second elimination
            q = 1.0 + cc / bb * (2.0 * v * cb - 1.0 - v * v)
            disc = cg * cg - q
            if disc < 0:
                continue
            u_candidates = [cg + math.sqrt(disc), cg - math.sqrt(disc)]
        B = 1.0 + v * v - 2.0 * v * cb
        if B <= 0:
            continue
        s1 = math.sqrt(bb / B)
        for u in u_candidates:
            if u <= 0:
                continue
            # residual of the first elimination identifies the valid branch
            if abs(aa * B - bb * (u * u + v * v - 2.0 * u * v * ca)) > 1e-6 * max(aa, bb, cc):
                continue
            s = _polish_distances((s1, u * s1, v * s1), aa, bb, cc, ca, cb, cg)
            if min(s) <= 0:
                continue
            key = tuple(round(x, 9) for x in s)
            if any(max(abs(k - x) for k, x in zip(key, prev)) < 1e-7 * max(s) for prev in seen_distances):
                continue
            cam_pts = np.array([s[i] * f[i] for i in range(3)])
            pose = _rigid_fit_world_to_camera(P, cam_pts)
            try:
                errs = [
                    _pixel_distance(project(K, pose, c.model_point), c.image_point)
                    for c in correspondences
                ]
            except BehindCameraError:
                continue
            if max(errs) <= 1e-4:
                seen_distances.append(key)
                poses.append(pose)
    return poses


def _pixel_distance(a: PixelPoint, b: PixelPoint) -> float:
    return math.hypot(a.u - b.u, a.v - b.v)


def disambiguate_p3p(solutions, fourth: Correspondence3D2D, K: CameraIntrinsics) -> RigidPose:
    """Pick the solution whose reprojection of the fourth point is smallest.

    Ties resolve to the lowest solution index; raises when every solution
    places the fourth point behind the camera.
    """
    if not solutions:
        raise ValueError("disambiguate_p3p needs at least one candidate solution")
    errs = []
    for pose in solutions:
        try:
            px = project(K, pose, fourth.model_point)
            errs.append(_pixel_distance(px, fourth.image_point))
        except BehindCameraError:
            errs.append(math.inf)
    if not any(math.isfinite(e) for e in errs):
        raise BehindCameraError("fourth point is behind the camera for every P3P solution")
    return solutions[int(np.argmin(errs))]


def register_first_keyframe(correspondences, K: CameraIntrinsics) -> RigidPose:
    """World(CAD)->camera pose of the first keyframe from four clicked
    correspondences: P3P on the first three, the fourth disambiguates."""
    if len(correspondences) != 4:
        raise ValueError("register_first_keyframe takes exactly four correspondences")
    solutions = solve_p3p(correspondences[:3], K)
    if not solutions:
        raise DegenerateInputError("P3P produced no admissible solution")
    return disambiguate_p3p(solutions, correspondences[3], K)


# ---------------------------------------------------------------------------
# NCC patch matching

def ncc_match(ref_image, ref_px: PixelPoint, target_image, cfg: PatchMatchConfig):
    """Zero-mean NCC match of the patch around ``ref_px`` into the target.

    Searches integer displacements up to ``cfg.search_radius`` and returns
    ``(matched_point, score)`` for the best window, or ``None`` when the best
    score is below ``cfg.min_ncc`` (zero-variance patches never match).
    """
    ref = np.asarray(ref_image, dtype=float)
    tgt = np.asarray(target_image, dtype=float)
    if ref.ndim == 3:
        ref = ref.mean(axis=2)
    if tgt.ndim == 3:
        tgt = tgt.mean(axis=2)
    half = cfg.patch_size // 2
    col = int(math.floor(ref_px.u))
    row = int(math.floor(ref_px.v))
    if row - half < 0 or col - half < 0 or row + half >= ref.shape[0] or col + half >= ref.shape[1]:
        raise PatchBoundsError(
            "reference patch extends outside the image", u=ref_px.u, v=ref_px.v
        )
    patch = ref[row - half : row + half + 1, col - half : col + half + 1]
    patch = patch - patch.mean()
    patch_norm = float(np.sqrt(np.sum(patch * patch)))
    if patch_norm < 1e-12:
        return None

    r = cfg.search_radius
    # valid window-center range (windows must fit inside the target)
    vr0 = max(row - r, half)
    vr1 = min(row + r, tgt.shape[0] - 1 - half)
    vc0 = max(col - r, half)
    vc1 = min(col + r, tgt.shape[1] - 1 - half)
    if vr0 > vr1 or vc0 > vc1:
        return None
    region = tgt[vr0 - half : vr1 + half + 1, vc0 - half : vc1 + half + 1]
    windows = np.lib.stride_tricks.sliding_window_view(
        region, (cfg.patch_size, cfg.patch_size)
    )
    zero_mean = windows - windows.mean(axis=(2, 3), keepdims=True)
    norms = np.sqrt(np.einsum("ijkl,ijkl->ij", zero_mean, zero_mean))
    corr = np.einsum("ijkl,kl->ij", zero_mean, patch)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(norms >= 1e-12, corr / (norms * patch_norm), -np.inf)
    flat = int(np.argmax(scores))  # first maximum in (dv, du) raster order
    best_r, best_c = divmod(flat, scores.shape[1])
    best_score = float(scores[best_r, best_c])
    if not math.isfinite(best_score) or best_score < cfg.min_ncc:
        return None
    best_dv = vr0 + best_r - row
    best_du = vc0 + best_c - col
    return PixelPoint(ref_px.u + best_du, ref_px.v + best_dv), best_score


# ---------------------------------------------------------------------------
# triangulation

def triangulate(pose1: RigidPose, pose2: RigidPose, px1: PixelPoint, px2: PixelPoint,
                K: CameraIntrinsics):
    """Midpoint of the common perpendicular of the two back-projected rays.

    Returns ``(point, reprojection_residual_px)``; raises on a zero baseline
    or near-parallel rays.
    """
    from .geometry import ray_from_pixel  # local import keeps module load light

    r1 = ray_from_pixel(K, pose1, px1)
    r2 = ray_from_pixel(K, pose2, px2)
    o1, d1 = r1.origin.to_array(), r1.direction.to_array()
    o2, d2 = r2.origin.to_array(), r2.direction.to_array()
    if np.linalg.norm(o2 - o1) <= 1e-6:
        raise ZeroBaselineError("camera centers coincide; cannot triangulate")
    d12 = float(d1 @ d2)
    denom = 1.0 - d12 * d12  # both directions are unit
    if denom < 1e-8:
        raise ZeroBaselineError("viewing rays are parallel; cannot triangulate")
    w = o2 - o1
    t1 = (float(w @ d1) - d12 * float(w @ d2)) / denom
    t2 = (d12 * float(w @ d1) - float(w @ d2)) / denom
    p1 = o1 + t1 * d1
    p2 = o2 + t2 * d2
    point = Vec3.from_array(0.5 * (p1 + p2))
    residual = 0.0
    for pose, px in ((pose1, px1), (pose2, px2)):
        try:
            reproj = project(K, pose.as_world_to_camera(), point)
            residual = max(residual, _pixel_distance(reproj, px))
        except BehindCameraError:
            residual = math.inf
    return point, residual


# ---------------------------------------------------------------------------
# Horn's absolute orientation with scale

def _check_spread(pts, what):
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered
    evals = np.linalg.eigvalsh(cov)
    if evals[2] <= 1e-24 or evals[1] <= 1e-12 * evals[2]:
        raise DegenerateInputError(f"{what} points are collinear or coincident")


def horn_similarity(pairs) -> Similarity:
    """Closed-form similarity (map -> model) minimizing Horn's symmetric
    alignment error over at least three 3D-3D correspondences.

    Rotation is the largest-eigenvalue quaternion of Horn's 4x4 matrix,
    scale the symmetric estimate sqrt(spread_model / spread_map), and the
    translation then matches the centroids. Coplanar inputs are fine; only
    collinear/coincident sets are degenerate.
    """
    if len(pairs) < 3:
        raise DegenerateInputError("horn_similarity needs at least three pairs")
    A = np.array([p.map_point.to_array() for p in pairs])  # source
    B = np.array([p.model_point.to_array() for p in pairs])  # target
    _check_spread(A, "map")
    _check_spread(B, "model")
    a_bar, b_bar = A.mean(axis=0), B.mean(axis=0)
    Ac, Bc = A - a_bar, B - b_bar

    S = Ac.T @ Bc
    sxx, sxy, sxz = S[0]
    syx, syy, syz = S[1]
    szx, szy, szz = S[2]
    N = np.array(
        [
            [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
            [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
            [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
            [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
        ]
    )
    evals, evecs = np.linalg.eigh(N)
    q = quat_normalize(evecs[:, 3])  # eigenvector of the largest eigenvalue

    sa = float(np.sum(Ac * Ac))
    sb = float(np.sum(Bc * Bc))
    scale = math.sqrt(sb / sa)
    from .geometry import quat_to_matrix

    t = b_bar - scale * (quat_to_matrix(q) @ a_bar)
    return Similarity(q, Vec3.from_array(t), scale)


def symmetric_alignment_residual(pairs, T: Similarity) -> float:
    """Horn's symmetric error sum((b - t)/sqrt(s) - sqrt(s) R a)^2.

    :func:`horn_similarity` returns its exact global minimizer.
    """
    A = np.array([p.map_point.to_array() for p in pairs])
    B = np.array([p.model_point.to_array() for p in pairs])
    rs = math.sqrt(T.scale)
    diff = (B - T.translation.to_array()) / rs - rs * (A @ T.rotation_matrix().T)
    return float(np.sum(diff * diff))


def alignment_rms(pairs, T: Similarity) -> float:
    """Root-mean-square of model-frame residuals (meters); reported to users."""
    A = np.array([p.map_point.to_array() for p in pairs])
    B = np.array([p.model_point.to_array() for p in pairs])
    diff = B - (T.scale * (A @ T.rotation_matrix().T) + T.translation.to_array())
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))


# ---------------------------------------------------------------------------
# end-to-end alignment bootstrap

def model_alignment_pairs(clicks_model, clicks_kf1, kf1: Keyframe, kf2: Keyframe,
                          image1, image2, K: CameraIntrinsics,
                          cfg: PatchMatchConfig = PatchMatchConfig()):
    """3D-3D correspondences for the alignment bootstrap.

    Each clicked pixel in the first keyframe is NCC-matched into the second
    and triangulated in the SLAM frame with the keyframes' SLAM poses; the
    result pairs those SLAM points with the clicked model points.
    """
    if len(clicks_model) != 4 or len(clicks_kf1) != 4:
        raise ValueError("model alignment takes four model and four image clicks")
    c1 = kf1.pose.camera_center().to_array()
    c2 = kf2.pose.camera_center().to_array()
    if np.linalg.norm(c2 - c1) <= 1e-6:
        raise ZeroBaselineError("first and second keyframes share a camera center")
    pairs = []
    for i, (model_pt, px) in enumerate(zip(clicks_model, clicks_kf1)):
        match = ncc_match(image1, px, image2, cfg)
        if match is None:
            raise MatchFailureError(
                f"NCC match failed for click {i}", point_index=i
            )
        matched_px, _score = match
        slam_pt, _residual = triangulate(kf1.pose, kf2.pose, px, matched_px, K)
        pairs.append(Correspondence3D3D(model_point=model_pt, map_point=slam_pt))
    return pairs


def build_model_alignment(clicks_model, clicks_kf1, kf1: Keyframe, kf2: Keyframe,
                          image1, image2, K: CameraIntrinsics,
                          cfg: PatchMatchConfig = PatchMatchConfig()) -> Similarity:
    """Recover the SLAM->model similarity from four user clicks via
    :func:`model_alignment_pairs` and Horn's method."""
    return horn_similarity(
        model_alignment_pairs(clicks_model, clicks_kf1, kf1, kf2, image1, image2, K, cfg)
    )


def align_map(points, keyframes, T: Similarity):
    """Map every point and keyframe into model coordinates.

    Point positions map through the similarity; camera centers map through it
    too while rotations compose with the similarity's rotation (uniform scale
    leaves pixel projections untouched). Indices and tags are preserved.
    """
    aligned_points = [
        MapPoint(
            position=apply_similarity(T, p.position),
            index=p.index,
            source_keyframe=p.source_keyframe,
        )
        for p in points
    ]
    aligned_keyframes = []
    qT_conj = quat_conjugate(T.rotation)
    for kf in keyframes:
        w2c = kf.pose.as_world_to_camera()
        q_new = quat_normalize(quat_multiply(w2c.rotation, qT_conj))
        R_new_t = np.asarray(
            np.linalg.multi_dot(
                [w2c.rotation_matrix(), T.rotation_matrix().T, T.translation.to_array()]
            )
        )
        t_new = T.scale * w2c.translation.to_array() - R_new_t
        new_pose = RigidPose(q_new, Vec3.from_array(t_new), WORLD_TO_CAMERA)
        if kf.pose.direction == CAMERA_TO_WORLD:
            new_pose = new_pose.inverted()
        aligned_keyframes.append(
            Keyframe(id=kf.id, pose=new_pose, image_ref=kf.image_ref,
                     intrinsics_ref=kf.intrinsics_ref)
        )
    return aligned_points, aligned_keyframes
