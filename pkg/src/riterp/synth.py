"""Deterministic synthetic LiDAR scans: ground plane plus boxes and
cylinders, raycast at the pixel-center rays of the default grid.

Serves as the KITTI-free input for experiments and tests. A near band of
objects keeps object/ground contact lines close to densely sampled
surfaces; a far band supplies the large occlusion edges that separate the
interpolation kernels; per-ray range jitter plays the role of sensor
noise.
"""
from __future__ import annotations

import numpy as np

from .pointcloud import PointCloud
from .projection import KITTI_GEOMETRY, RiGeometry, pixel_center_angles

SENSOR_HEIGHT = 1.8  # meters above the ground plane
RANGE_NOISE_SIGMA = 0.03  # meters, HDL-64E-class range accuracy


def _ray_directions(geom: RiGeometry) -> np.ndarray:
    v, u = np.meshgrid(np.arange(geom.height), np.arange(geom.width), indexing="ij")
    yaw, pitch = pixel_center_angles(geom, v.ravel().astype(np.float64), u.ravel().astype(np.float64))
    cp = np.cos(pitch)
    return np.stack([cp * np.cos(yaw), cp * np.sin(yaw), np.sin(pitch)], axis=1)


def _ground_hits(dirs: np.ndarray) -> np.ndarray:
    """Ray parameter t where each ray meets the plane z = -SENSOR_HEIGHT."""
    dz = dirs[:, 2]
    with np.errstate(divide="ignore"):
        t = -SENSOR_HEIGHT / dz
    t[dz >= 0] = np.inf
    return t


def _box_hits(dirs: np.ndarray, bmin: np.ndarray, bmax: np.ndarray) -> np.ndarray:
    """Slab-method entry distance per ray for one axis-aligned box."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = bmin[None, :] / dirs
        t2 = bmax[None, :] / dirs
    lo = np.fmin(t1, t2)
    hi = np.fmax(t1, t2)
    # axis-parallel rays: the slab constrains nothing if the origin is inside it
    parallel = dirs == 0
    inside = (0.0 >= bmin[None, :]) & (0.0 <= bmax[None, :])
    lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
    hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
    tmin = lo.max(axis=1)
    tmax = hi.min(axis=1)
    t = np.where((tmax >= tmin) & (tmin > 0), tmin, np.inf)
    return t


def _cylinder_hits(dirs: np.ndarray, cx: float, cy: float, radius: float, z_top: float) -> np.ndarray:
    """Entry distance per ray for a vertical cylinder standing on the ground."""
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    a = dx * dx + dy * dy
    b = dx * cx + dy * cy
    c = cx * cx + cy * cy - radius * radius
    disc = b * b - a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (b - np.sqrt(disc)) / a
    z = t * dz
    hit = (disc >= 0) & (a > 0) & (t > 0) & (z >= -SENSOR_HEIGHT) & (z <= z_top)
    return np.where(hit, t, np.inf)


def synth_scene(seed: int, geometry: RiGeometry = KITTI_GEOMETRY) -> PointCloud:
    """Deterministic scene sampled along the geometry's pixel-center rays.

    Same seed, same cloud. All points fall inside the geometry's vertical
    FOV and depth clamp by construction.
    """
    rng = np.random.default_rng(seed)
    dirs = _ray_directions(geometry)
    depth = _ground_hits(dirs)

    def add_boxes(count: int, dist_lo: float, dist_hi: float):
        nonlocal depth
        for _ in range(count):
            dist = rng.uniform(dist_lo, dist_hi)
            azimuth = rng.uniform(-np.pi, np.pi)
            cx, cy = dist * np.cos(azimuth), dist * np.sin(azimuth)
            hx, hy = rng.uniform(0.6, 2.0, size=2)
            height = rng.uniform(1.0, 2.6)
            bmin = np.array([cx - hx, cy - hy, -SENSOR_HEIGHT])
            bmax = np.array([cx + hx, cy + hy, -SENSOR_HEIGHT + height])
            depth = np.minimum(depth, _box_hits(dirs, bmin, bmax))

    add_boxes(int(rng.integers(8, 13)), 6.0, 16.0)   # near field
    add_boxes(int(rng.integers(5, 9)), 18.0, 40.0)   # far field, big occlusion edges

    n_cyl = int(rng.integers(5, 9))
    for _ in range(n_cyl):
        dist = rng.uniform(4.5, 14.0)
        azimuth = rng.uniform(-np.pi, np.pi)
        radius = rng.uniform(0.15, 0.5)
        height = rng.uniform(2.0, 5.0)
        depth = np.minimum(
            depth,
            _cylinder_hits(dirs, dist * np.cos(azimuth), dist * np.sin(azimuth),
                           radius, -SENSOR_HEIGHT + height),
        )

    # per-ray range jitter: real returns are not geometrically smooth, and
    # the jitter drives the kernel comparison the way real scans do
    depth = depth + rng.normal(0.0, RANGE_NOISE_SIGMA, size=depth.shape)

    keep = (depth >= geometry.min_depth) & (depth <= geometry.max_depth)
    points = dirs[keep] * depth[keep, None]
    return PointCloud(points=points)
