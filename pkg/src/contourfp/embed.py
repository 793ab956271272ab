"""Fixed-length shape descriptor for normalised contour clouds.

The 256 components are five histograms, each L1-normalised, concatenated and
then L2-normalised:

    64  distances of points from the origin, over [0, 1]
    48  x coordinates, over [-1, 1]
    48  y coordinates, over [-1, 1]
    48  t coordinates, over [-1, 1]
    48  pairwise point distances (D2 shape distribution), over [0, 2]

Every block is a statistic of the point set, so point order does not matter.
The radial and D2 blocks are invariant to rotations and reflections. The
per-axis blocks are not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, EmptyCloudError, InvalidParameterError

DESCRIPTOR_VERSION = 1
FEATURE_DIM = 256
NORM_BINS = 64
AXIS_BINS = 48
PAIR_BINS = 48
BLOCKS = (("radial", NORM_BINS), ("x", AXIS_BINS), ("y", AXIS_BINS), ("t", AXIS_BINS), ("d2", PAIR_BINS))

# all pairs up to this many points, a seeded sample of pairs beyond it
MAX_EXACT_PAIRS_POINTS = 3072
PAIR_SAMPLE_SIZE = 5_000_000
PAIR_SAMPLE_SEED = 0

# Values within this fraction of a bin below an edge are counted in the upper
# bin, so points sitting exactly on an edge do not flip bins on rounding noise.
EDGE_EPS = 1e-9


@dataclass(frozen=True)
class EmbedderSpec:
    kind: str = "builtin_descriptor"  # or "imported"
    descriptor_version: int = DESCRIPTOR_VERSION


def block_slices():
    out, start = {}, 0
    for name, size in BLOCKS:
        out[name] = slice(start, start + size)
        start += size
    return out


def _bin_counts(values, lo, hi, nbins):
    scale = nbins / (hi - lo)
    idx = np.floor((values - lo) * scale + EDGE_EPS)
    idx = np.clip(idx, 0, nbins - 1).astype(np.int64)
    return np.bincount(idx, minlength=nbins)


def _pair_counts(cloud):
    n = cloud.shape[0]
    scale = PAIR_BINS / 2.0
    if n < 2:
        counts = np.zeros(PAIR_BINS, dtype=np.int64)
        counts[0] = 1
        return counts
    if n <= MAX_EXACT_PAIRS_POINTS:
        return kernels.pair_distance_histogram(cloud, PAIR_BINS, 0.0, scale, EDGE_EPS)
    rng = np.random.default_rng(PAIR_SAMPLE_SEED)
    i = rng.integers(0, n, PAIR_SAMPLE_SIZE)
    j = (i + rng.integers(1, n, PAIR_SAMPLE_SIZE)) % n  # j != i
    diff = cloud[j] - cloud[i]
    d = diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1]
    d = np.sqrt(d + diff[:, 2] * diff[:, 2])
    return _bin_counts(d, 0.0, 2.0, PAIR_BINS)


def histogram_blocks(cloud) -> list[np.ndarray]:
    """The five L1-normalised histograms, before concatenation."""
    cloud = np.ascontiguousarray(cloud, dtype=np.float64)
    if cloud.ndim != 2 or cloud.shape[1] != 3:
        raise DimensionError(f"cloud must be (N, 3), got {cloud.shape}")
    if cloud.shape[0] == 0:
        raise EmptyCloudError("cannot embed an empty cloud")
    norms = np.sqrt((cloud * cloud).sum(axis=1))
    counts = [
        _bin_counts(norms, 0.0, 1.0, NORM_BINS),
        _bin_counts(cloud[:, 0], -1.0, 1.0, AXIS_BINS),
        _bin_counts(cloud[:, 1], -1.0, 1.0, AXIS_BINS),
        _bin_counts(cloud[:, 2], -1.0, 1.0, AXIS_BINS),
        _pair_counts(cloud),
    ]
    return [c / c.sum() for c in counts]


def embed(cloud) -> np.ndarray:
    """256-d unit-length descriptor of a normalised cloud."""
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim == 2 and cloud.shape[0] and cloud.shape[1] == 3:
        radius = np.sqrt((cloud * cloud).sum(axis=1)).max()
        if radius > 1 + 1e-9:
            raise InvalidParameterError(f"cloud is not normalised (max norm {radius:.6g})")
    vec = np.concatenate(histogram_blocks(cloud))
    return vec / np.linalg.norm(vec)


def as_feature(values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.shape != (FEATURE_DIM,):
        raise DimensionError(f"feature must have {FEATURE_DIM} components, got {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InvalidParameterError("feature has non-finite components")
    return vec


def feature_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != (FEATURE_DIM,) or b.shape != (FEATURE_DIM,):
        raise DimensionError(f"features must have {FEATURE_DIM} components, got {a.shape} and {b.shape}")
    diff = a - b
    return float(np.sqrt(diff @ diff))
