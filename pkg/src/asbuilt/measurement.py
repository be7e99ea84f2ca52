"""Metric data analysis of queried keyframe images.

The queried image is binarized, window-shaped contours are detected, and a
known window height converts pixel distances into meters: detected window
rectangles each induce a pixels-per-meter scale factor, and a two-click
measurement uses the scale of the window nearest the clicked segment.

Images are 8-bit grayscale numpy arrays of shape (height, width); color
input converts via Rec.601 luminance. Pixel coordinates are (u, v) =
(column, row).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, NoScaleError
from .geometry import PixelPoint

OUTER = "outer"
HOLE = "hole"


@dataclass(eq=False)
class Contour:
    """Closed border-pixel sequence; points are integer (u, v) pairs."""

    points: np.ndarray  # (n, 2) int, columns (u, v)
    kind: str  # "outer" or "hole"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
        if self.kind not in (OUTER, HOLE):
            raise ValueError(f"unknown contour kind {self.kind!r}")
        if len(pts) > 1:
            gap = np.max(np.abs(pts[0] - pts[-1]))
            if gap > 1:
                raise ValueError("contour is not closed under 8-connectivity")
        self.points = pts

    def perimeter(self) -> float:
        if len(self.points) < 2:
            return 0.0
        closed = np.vstack([self.points, self.points[:1]])
        return float(np.sum(np.linalg.norm(np.diff(closed, axis=0), axis=1)))


@dataclass(frozen=True)
class RectCandidate:
    """Convex quadrilateral accepted as a window; corners clockwise from top-left."""

    corners: tuple  # 4 PixelPoints
    area: float

    def __post_init__(self):
        if len(self.corners) != 4:
            raise ValueError("RectCandidate needs exactly four corners")
        if self.area <= 0:
            raise ValueError("RectCandidate area must be positive")

    def centroid(self) -> PixelPoint:
        u = sum(c.u for c in self.corners) / 4.0
        v = sum(c.v for c in self.corners) / 4.0
        return PixelPoint(u, v)


@dataclass(frozen=True)
class WindowScale:
    rect: RectCandidate
    pixels_per_meter: float

    def __post_init__(self):
        if self.pixels_per_meter <= 0:
            raise ValueError("pixels_per_meter must be positive")


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luminance, rounded to nearest 8-bit level."""
    rgb = np.asarray(rgb)
    if rgb.ndim == 2:
        return rgb.astype(np.uint8)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.rint(y).clip(0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# binarization

def otsu_threshold(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance; foreground is >= threshold.

    For a constant image every split is empty on one side, so the returned
    threshold is above the constant value (one class, all background).
    """
    img = np.asarray(img, dtype=np.uint8)
    if img.size == 0:
        raise ValueError("empty image")
    hist = np.bincount(img.ravel(), minlength=256).astype(float)
    total = hist.sum()
    cum = np.cumsum(hist)
    cum_val = np.cumsum(hist * np.arange(256))
    best_t, best_sigma = None, -1.0
    for t in range(1, 256):
        w0 = cum[t - 1]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        mu0 = cum_val[t - 1] / w0
        mu1 = (cum_val[255] - cum_val[t - 1]) / w1
        sigma = w0 * w1 * (mu0 - mu1) ** 2
        if sigma > best_sigma:
            best_sigma, best_t = sigma, t
    if best_t is None:
        return int(img.flat[0]) + 1
    return best_t


def binarize(img: np.ndarray, threshold: int | None = None) -> np.ndarray:
    """Boolean foreground mask; threshold defaults to :func:`otsu_threshold`."""
    img = np.asarray(img, dtype=np.uint8)
    if threshold is None:
        threshold = otsu_threshold(img)
    return img >= threshold


# ---------------------------------------------------------------------------
# border following (topological analysis of the binary image)

# 8-neighborhood in counterclockwise order starting East; (drow, dcol)
_OFFS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
_DIR = {off: k for k, off in enumerate(_OFFS)}


def trace_contours(binary: np.ndarray) -> list[Contour]:
    """Extract outer and hole borders of the foreground by border following.

    Each returned contour is a closed 8-connected pixel sequence labeled
    ``outer`` (border against background on the left during the raster scan)
    or ``hole`` (border against enclosed background).
    """
    mask = np.asarray(binary).astype(bool)
    f = np.zeros(mask.shape, dtype=np.int32)
    f[mask] = 1
    h, w = f.shape
    # only pixels with background to their left or right can start a border;
    # restricting the raster scan to them keeps the loop O(border length)
    left0 = mask.copy()
    left0[:, 1:] &= ~mask[:, :-1]
    right0 = mask.copy()
    right0[:, :-1] &= ~mask[:, 1:]
    nbd = 1
    contours = []
    for i, j in np.argwhere(left0 | right0):
        fij = f[i, j]
        if fij == 0:
            continue
        if fij == 1 and (j == 0 or f[i, j - 1] == 0):
            kind = OUTER
            start_neighbor = (i, j - 1)
        elif fij >= 1 and (j == w - 1 or f[i, j + 1] == 0):
            kind = HOLE
            start_neighbor = (i, j + 1)
        else:
            continue
        nbd += 1
        points = _follow_border(f, (int(i), int(j)), start_neighbor, nbd)
        pts = np.array([(c, r) for r, c in points], dtype=np.int64)
        contours.append(Contour(points=pts, kind=kind))
    return contours


def _follow_border(f, start, start_neighbor, nbd):
    h, w = f.shape
    si, sj = start

    def value(i, j):
        if 0 <= i < h and 0 <= j < w:
            return f[i, j]
        return 0

    # find the first nonzero neighbor clockwise from the starting neighbor
    d0 = _DIR[(start_neighbor[0] - si, start_neighbor[1] - sj)]
    first = None
    for k in range(8):
        d = (d0 - k) % 8
        ni, nj = si + _OFFS[d][0], sj + _OFFS[d][1]
        if value(ni, nj) != 0:
            first = (ni, nj)
            break
    if first is None:
        f[si, sj] = -nbd  # isolated pixel
        return [start]

    points = [start]
    prev = first
    cur = start
    limit = 4 * h * w + 8
    for _ in range(limit):
        # counterclockwise from the neighbor after `prev` around `cur`
        d0 = _DIR[(prev[0] - cur[0], prev[1] - cur[1])]
        east_zero = False
        nxt = None
        for k in range(1, 9):
            d = (d0 + k) % 8
            ni, nj = cur[0] + _OFFS[d][0], cur[1] + _OFFS[d][1]
            if value(ni, nj) == 0:
                if d == 0:
                    east_zero = True
                continue
            nxt = (ni, nj)
            break
        if east_zero:
            f[cur] = -nbd
        elif f[cur] == 1:
            f[cur] = nbd
        if nxt == start and cur == first:
            return points
        prev = cur
        cur = nxt
        points.append(cur)
    raise RuntimeError("border following did not terminate")


# ---------------------------------------------------------------------------
# polyline simplification

def _point_segment_distance(pts, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-24:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(pts - proj, axis=1)


def _douglas_peucker(pts: np.ndarray, eps: float) -> list:
    """Indices of the kept subsequence of an open polyline."""
    n = len(pts)
    if n <= 2:
        return list(range(n))
    keep = [0, n - 1]
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        seg = pts[lo + 1 : hi]
        d = _point_segment_distance(seg.astype(float), pts[lo].astype(float), pts[hi].astype(float))
        imax = int(np.argmax(d))
        if d[imax] > eps:
            mid = lo + 1 + imax
            keep.append(mid)
            stack.append((lo, mid))
            stack.append((mid, hi))
    return sorted(keep)


def simplify_polyline(c, epsilon: float) -> np.ndarray:
    """Douglas-Peucker simplification.

    A :class:`Contour` is treated as a closed curve: it is split at the two
    mutually farthest points and each half simplified, so corners survive
    regardless of where the trace started. Plain arrays are treated as open
    polylines whose endpoints are always kept. Output vertices are a
    subsequence of the input and every input point stays within ``epsilon``
    of the simplified curve.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if isinstance(c, Contour):
        pts = c.points
        n = len(pts)
        if n <= 2:
            return pts.copy()
        d0 = np.linalg.norm((pts - pts[0]).astype(float), axis=1)
        a = int(np.argmax(d0))
        da = np.linalg.norm((pts - pts[a]).astype(float), axis=1)
        b = int(np.argmax(da))
        a, b = min(a, b), max(a, b)
        if a == b:
            return pts[:1].copy()
        chain1 = pts[a : b + 1]
        chain2 = np.vstack([pts[b:], pts[: a + 1]])
        keep1 = _douglas_peucker(chain1, epsilon)
        keep2 = _douglas_peucker(chain2, epsilon)
        merged = np.vstack([chain1[keep1][:-1], chain2[keep2][:-1]])
        return merged
    pts = np.asarray(c)
    return pts[_douglas_peucker(pts, epsilon)]


# ---------------------------------------------------------------------------
# window detection and measurement

def _shoelace_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def _is_convex_quad(pts: np.ndarray) -> bool:
    crosses = []
    for i in range(4):
        a = pts[(i + 1) % 4] - pts[i]
        b = pts[(i + 2) % 4] - pts[(i + 1) % 4]
        crosses.append(float(a[0] * b[1] - a[1] * b[0]))
    return all(c > 0 for c in crosses) or all(c < 0 for c in crosses)


def _order_clockwise_from_top_left(pts: np.ndarray) -> tuple:
    center = pts.mean(axis=0)
    # image v grows downward, so ascending atan2 is clockwise on screen
    angles = np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0])
    order = np.argsort(angles)
    ordered = pts[order]
    start = int(np.argmin(ordered[:, 0] + ordered[:, 1]))
    ordered = np.roll(ordered, -start, axis=0)
    return tuple(PixelPoint(float(u), float(v)) for u, v in ordered)


def detect_windows(contours, min_area_fraction: float, image_size,
                   simplify_fraction: float = 0.02) -> list[RectCandidate]:
    """Contours that simplify to large-enough convex quadrilaterals.

    Perspective skews true rectangles into general quadrilaterals, so the
    test is four vertices + convexity; the area cutoff is a fraction of the
    image area. Contours touching the image border are clipped geometry
    (e.g. the wall region itself) and are never windows. The simplification
    epsilon is a fraction of each contour's perimeter.
    """
    if not 0.0 < min_area_fraction < 1.0:
        raise ValueError("min_area_fraction must lie in (0, 1)")
    width, height = image_size
    image_area = float(width) * float(height)
    candidates = []
    for contour in contours:
        pts = contour.points
        if (
            pts[:, 0].min() <= 0
            or pts[:, 1].min() <= 0
            or pts[:, 0].max() >= width - 1
            or pts[:, 1].max() >= height - 1
        ):
            continue
        eps = simplify_fraction * contour.perimeter()
        poly = simplify_polyline(contour, eps).astype(float)
        if len(poly) != 4:
            continue
        if not _is_convex_quad(poly):
            continue
        area = _shoelace_area(poly)
        if area < min_area_fraction * image_area:
            continue
        candidates.append(
            RectCandidate(corners=_order_clockwise_from_top_left(poly), area=area)
        )
    return candidates


def scale_from_window(rect: RectCandidate, actual_height_m: float) -> WindowScale:
    """Pixels-per-meter from the mean of the two vertical edge lengths."""
    if actual_height_m <= 0:
        raise ValueError("actual_height_m must be positive")
    tl, tr, br, bl = rect.corners
    left = math.hypot(tl.u - bl.u, tl.v - bl.v)
    right = math.hypot(tr.u - br.u, tr.v - br.v)
    height_px = 0.5 * (left + right)
    if height_px <= 0:
        raise DegenerateInputError("window rectangle has zero pixel height")
    return WindowScale(rect=rect, pixels_per_meter=height_px / actual_height_m)


def measure(p1: PixelPoint, p2: PixelPoint, scales) -> tuple[float, int]:
    """Metric distance between two clicked pixels.

    Uses the scale of the window whose rectangle centroid lies nearest the
    segment midpoint (ties to the lowest index). Returns
    ``(meters, scale_index)``.
    """
    scales = list(scales)
    if not scales:
        raise NoScaleError("no window scale factors available")
    mid_u, mid_v = 0.5 * (p1.u + p2.u), 0.5 * (p1.v + p2.v)
    dists = []
    for s in scales:
        c = s.rect.centroid()
        dists.append(math.hypot(c.u - mid_u, c.v - mid_v))
    idx = int(np.argmin(dists))
    pixel_dist = math.hypot(p1.u - p2.u, p1.v - p2.v)
    return pixel_dist / scales[idx].pixels_per_meter, idx
