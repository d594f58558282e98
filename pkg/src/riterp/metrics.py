"""2D and 3D fidelity metrics: SSIM over RIs, nearest-neighbor noise
classification, and chamfer distance between clouds."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.spatial import cKDTree

from .pointcloud import PointCloud
from .projection import RangeImage

SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 1.0  # depths are normalized to [0, 1] before comparison


@dataclass
class QualityReport:
    """Paired 2D and 3D scores for one pipeline run.

    noise_ratio and densify_count partition the interpolated points:
    noise_ratio counts those farther than delta from every reference
    point, densify_count those within delta.
    """

    ssim: float
    noise_ratio: float | None
    chamfer: float
    densify_count: int

    def as_dict(self) -> dict:
        return asdict(self)


def _window_sums(a: np.ndarray, k: int) -> np.ndarray:
    """Sliding k x k window sums at every valid position (integral image)."""
    s = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=s[1:, 1:])
    return s[k:, k:] - s[:-k, k:] - s[k:, :-k] + s[:-k, :-k]


def ssim(a: RangeImage, b: RangeImage) -> float:
    """Mean local SSIM over 8x8 sliding windows with uniform weighting.

    Depths are normalized by max_depth (EMPTY participates as 0.0) and
    window statistics use population normalization. Constants are
    C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1.
    """
    ga, gb = a.geometry, b.geometry
    if (ga.width, ga.height) != (gb.width, gb.height):
        raise ValueError(
            f"dimension mismatch: {ga.width}x{ga.height} vs {gb.width}x{gb.height}"
        )
    if ga.max_depth != gb.max_depth:
        raise ValueError(f"max_depth mismatch: {ga.max_depth} vs {gb.max_depth}")
    if ga.height < SSIM_WINDOW or ga.width < SSIM_WINDOW:
        raise ValueError(f"image smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")

    x = a.depth / ga.max_depth
    y = b.depth / gb.max_depth
    n = SSIM_WINDOW * SSIM_WINDOW
    mu_x = _window_sums(x, SSIM_WINDOW) / n
    mu_y = _window_sums(y, SSIM_WINDOW) / n
    var_x = _window_sums(x * x, SSIM_WINDOW) / n - mu_x * mu_x
    var_y = _window_sums(y * y, SSIM_WINDOW) / n - mu_y * mu_y
    cov = _window_sums(x * y, SSIM_WINDOW) / n - mu_x * mu_y

    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2
    score = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(score.mean())


class KdTree:
    """Immutable exact nearest-neighbor index over a point cloud.

    Backed by scipy's cKDTree; query distances match a brute-force scan
    exactly (same float64 arithmetic).
    """

    def __init__(self, cloud: PointCloud):
        if len(cloud) == 0:
            raise ValueError("cannot index an empty cloud")
        self._tree = cKDTree(cloud.points)
        self.size = len(cloud)

    def query(self, points: np.ndarray | PointCloud) -> tuple[np.ndarray, np.ndarray]:
        """Nearest-neighbor (distances, indices) for each query point."""
        if isinstance(points, PointCloud):
            points = points.points
        dist, idx = self._tree.query(points, k=1, workers=1)
        return np.atleast_1d(dist), np.atleast_1d(idx)


def build_kdtree(cloud: PointCloud) -> KdTree:
    return KdTree(cloud)


def noise_ratio(
    interp_cloud: PointCloud,
    reference: PointCloud,
    delta: float,
    tree: KdTree | None = None,
) -> tuple[float, int]:
    """Classify interpolated points against the reference cloud.

    Returns (ratio, densify_count): the fraction of interpolated points
    whose nearest reference point is farther than delta, and the count of
    those within delta. Pass a prebuilt tree over `reference` to reuse it
    across metrics. An empty interpolated cloud scores (0.0, 0).
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if len(reference) == 0:
        raise ValueError("reference cloud is empty")
    if len(interp_cloud) == 0:
        return 0.0, 0
    if tree is None:
        tree = KdTree(reference)
    dist, _ = tree.query(interp_cloud)
    noisy = dist > delta
    return float(noisy.mean()), int(noisy.size - noisy.sum())


def chamfer(a: PointCloud, b: PointCloud, tree_b: KdTree | None = None) -> float:
    """Symmetric mean nearest-neighbor distance between two clouds."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("chamfer distance requires two non-empty clouds")
    if tree_b is None:
        tree_b = KdTree(b)
    d_ab, _ = tree_b.query(a)
    d_ba, _ = KdTree(a).query(b)
    return float(0.5 * (d_ab.mean() + d_ba.mean()))
