"""Pure numpy versions of the compiled kernels.

Arithmetic is ordered exactly as in ``_kernels.pyx`` so both backends return
identical indices and counts.
"""

import numpy as np

_BLOCK = 256


def fps_indices(pts, k, start, tie_tol):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    x, y, z = (pts[:, c].copy() for c in range(3))
    n = pts.shape[0]
    out = np.empty(k, dtype=np.int64)
    mind = np.full(n, np.inf)
    keep = 1.0 - tie_tol
    out[0] = last = start
    mind[last] = -1.0
    for i in range(1, k):
        dx = x - x[last]
        dy = y - y[last]
        dz = z - z[last]
        d = dx * dx + dy * dy
        d = d + dz * dz
        np.minimum(mind, d, out=mind)
        thresh = mind.max() * keep
        last = int(np.argmax(mind >= thresh))
        out[i] = last
        mind[last] = -1.0
    return out


def pair_distance_histogram(pts, nbins, lo, scale, edge_eps):
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    n = pts.shape[0]
    counts = np.zeros(nbins, dtype=np.int64)
    cols = np.arange(n)
    for b0 in range(0, n - 1, _BLOCK):
        rows = np.arange(b0, min(b0 + _BLOCK, n - 1))
        diff = pts[None, :, :] - pts[rows, None, :]
        d = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1]
        d = np.sqrt(d + diff[..., 2] * diff[..., 2])
        upper = cols[None, :] > rows[:, None]
        b = np.floor((d[upper] - lo) * scale + edge_eps)
        b = np.clip(b, 0, nbins - 1).astype(np.int64)
        counts += np.bincount(b, minlength=nbins)
    return counts
