"""Spatiotemporal contour clouds, farthest-point sampling and normalisation.

A cloud is an ``(N, 3)`` float array. A boundary pixel at row ``h``, column
``w`` in frame ``n`` becomes the point ``(w, h, n * time_scale)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyCloudError, InvalidParameterError
from .masks import boundary_pixels

# Min-distances within this relative margin of the maximum count as ties, so
# that exact ties on the pixel grid survive float rounding under similarity maps.
FPS_TIE_TOL = 1e-9


@dataclass(frozen=True)
class SampleConfig:
    point_count: int = 3072
    seed: int = 0
    time_scale: float | None = None  # None: (W + H) / (2 * frame_count)

    def __post_init__(self):
        if self.point_count < 1:
            raise InvalidParameterError("point_count must be >= 1")
        if self.time_scale is not None and not self.time_scale > 0:
            raise InvalidParameterError("time_scale must be positive")


def default_time_scale(width, height, frame_count) -> float:
    return (width + height) / (2.0 * frame_count)


def masks_to_pointcloud(seq, time_scale: float | None = None) -> np.ndarray:
    if time_scale is None:
        time_scale = default_time_scale(seq.width, seq.height, seq.frame_count)
    chunks = []
    for n, mask in seq.entries:
        rows, cols = boundary_pixels(mask)
        if rows.size == 0:
            continue
        chunks.append(np.column_stack([cols, rows, np.full(rows.size, n * time_scale)]).astype(float))
    if not chunks:
        raise EmptyCloudError(f"{seq.video_id}/{seq.track_id}: no boundary pixels in any frame")
    return np.concatenate(chunks)


def farthest_point_indices(cloud, k: int, seed: int = 0, start: int | None = None) -> np.ndarray:
    """Greedy FPS indices in selection order.

    The first index is drawn from ``numpy.random.default_rng(seed)`` unless
    ``start`` is given. If ``k >= len(cloud)`` every index is returned in order.
    """
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    cloud = np.ascontiguousarray(cloud, dtype=np.float64)
    n = cloud.shape[0]
    if n == 0:
        raise EmptyCloudError("cannot sample an empty cloud")
    if k >= n:
        return np.arange(n, dtype=np.int64)
    if start is None:
        start = int(np.random.default_rng(seed).integers(n))
    elif not 0 <= start < n:
        raise InvalidParameterError(f"start index {start} outside cloud of {n} points")
    return kernels.fps_indices(cloud, k, start, FPS_TIE_TOL)


def farthest_point_sample(cloud, k: int, seed: int = 0, start: int | None = None) -> np.ndarray:
    cloud = np.asarray(cloud, dtype=np.float64)
    return cloud[farthest_point_indices(cloud, k, seed, start)]


def normalize_unit_sphere(cloud) -> np.ndarray:
    """Centre on the centroid and scale so the farthest point has norm 1."""
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.shape[0] == 0:
        raise EmptyCloudError("cannot normalise an empty cloud")
    centred = cloud - cloud.mean(axis=0)
    radius = np.sqrt((centred * centred).sum(axis=1)).max()
    if radius == 0:
        return np.zeros_like(centred)
    return centred / radius


def save_xyz(path, cloud) -> None:
    np.savetxt(path, np.asarray(cloud), fmt="%.17g")


def load_xyz(path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2).reshape(-1, 3)
