"""RANSAC plane segmentation of the aligned point cloud.

Hypotheses are planes through three sampled points; every remaining point
within the inlier threshold votes for a hypothesis, the best-voted hypothesis
of each round claims its voters, and the claimed set is refined by a total
least-squares fit. Points never claimed by any plane are the outliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .geometry import PlaneParams


@dataclass(frozen=True)
class RansacConfig:
    hypotheses_per_plane: int = 500
    inlier_threshold: float = 0.05  # meters
    min_votes: int = 50
    collinearity_tolerance: float = 1e-6
    max_planes: int = 16
    rng_seed: int = 0

    def __post_init__(self):
        if self.inlier_threshold <= 0:
            raise ValueError("inlier_threshold must be positive")
        if self.min_votes < 3:
            raise ValueError("min_votes must be at least 3")
        if self.hypotheses_per_plane < 1 or self.max_planes < 1:
            raise ValueError("hypothesis and plane counts must be positive")


@dataclass(frozen=True)
class PlaneHypothesis:
    params: PlaneParams
    votes: int = 0


@dataclass(frozen=True)
class FittedPlane:
    params: PlaneParams
    member_indices: tuple
    score: int

    def __post_init__(self):
        object.__setattr__(self, "member_indices", tuple(int(i) for i in self.member_indices))


def _triangle_area(p0, p1, p2) -> float:
    return 0.5 * float(np.linalg.norm(np.cross(p1 - p0, p2 - p0)))


def sample_hypothesis(points: np.ndarray, rng, collinearity_tolerance: float = 1e-6):
    """Plane through three random distinct points, or ``None`` when the draw
    is collinear/coincident (the caller simply resamples)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 3:
        raise DegenerateInputError("need at least 3 points to sample a plane")
    idx = rng.choice(len(points), size=3, replace=False)
    p0, p1, p2 = points[idx]
    pairwise = max(
        np.linalg.norm(p1 - p0), np.linalg.norm(p2 - p0), np.linalg.norm(p2 - p1)
    )
    if pairwise <= 0:
        return None
    if _triangle_area(p0, p1, p2) < collinearity_tolerance * pairwise ** 2:
        return None
    normal = np.cross(p1 - p0, p2 - p0)
    return PlaneHypothesis(PlaneParams.from_normal_point(normal, p0))


def score_hypothesis(hypothesis: PlaneHypothesis, points: np.ndarray, threshold: float) -> int:
    """Number of points within ``threshold`` of the hypothesis plane."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return 0
    d = _signed_distances(hypothesis.params, points)
    return int(np.count_nonzero(np.abs(d) <= threshold))


def _signed_distances(params: PlaneParams, points: np.ndarray) -> np.ndarray:
    return points @ params.normal() + params.d


def refine_plane_least_squares(points: np.ndarray) -> PlaneParams:
    """Total least-squares plane: normal = smallest principal axis of the
    centered covariance, offset through the centroid."""
    points = np.asarray(points, dtype=float)
    if len(points) < 3:
        raise DegenerateInputError("plane refinement needs at least 3 points")
    centroid = points.mean(axis=0)
    centered = points - centroid
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)
    # collinear/coincident: the two smallest spreads both vanish
    if evals[1] <= 1e-12 * max(evals[2], 1e-300):
        raise DegenerateInputError("points are collinear or coincident")
    normal = evecs[:, 0]
    return PlaneParams.from_normal_point(normal, centroid)


def extract_planes(points: np.ndarray, cfg: RansacConfig):
    """Greedy multi-plane extraction.

    Returns ``(planes, outlier_indices)`` where every input index appears in
    exactly one plane's members or in the outlier list. Deterministic for a
    fixed ``cfg.rng_seed``: each hypothesis draws from an independent RNG
    stream keyed by (seed, round, hypothesis index).
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    remaining = np.arange(n)
    planes: list[FittedPlane] = []

    for round_idx in range(cfg.max_planes):
        if len(remaining) < 3:
            break
        subset = points[remaining]
        best = None  # (votes, hyp_index, hypothesis)
        for h in range(cfg.hypotheses_per_plane):
            rng = np.random.default_rng([cfg.rng_seed, round_idx, h])
            hyp = None
            for _ in range(100):  # resample on degenerate draws
                hyp = sample_hypothesis(subset, rng, cfg.collinearity_tolerance)
                if hyp is not None:
                    break
            if hyp is None:
                continue
            votes = score_hypothesis(hyp, subset, cfg.inlier_threshold)
            if best is None or votes > best[0]:
                best = (votes, h, hyp)
        if best is None or best[0] < cfg.min_votes:
            break
        hyp = best[2]
        dist = np.abs(_signed_distances(hyp.params, subset))
        member_mask = dist <= cfg.inlier_threshold
        members = remaining[member_mask]
        refined = refine_plane_least_squares(points[members])
        planes.append(FittedPlane(params=refined, member_indices=tuple(members), score=int(best[0])))
        remaining = remaining[~member_mask]

    return planes, [int(i) for i in remaining]
