"""Binary masks: run-length coding, boundaries, boxes and a component detector.

A mask is a 2-D ``numpy`` boolean array of shape ``(H, W)``. Functions here
accept anything array-like and never mutate their input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError, MalformedInputError

# 4-connectivity, used for both boundaries and components
_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def as_mask(data) -> np.ndarray:
    """Validate ``data`` as a mask and return a read-only boolean array."""
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise MalformedInputError(f"mask must be a non-empty 2-D raster, got shape {arr.shape}")
    arr = arr.astype(bool, copy=True)
    arr.setflags(write=False)
    return arr


class BoundingBox(NamedTuple):
    """Inclusive pixel box; coordinates may be fractional for predicted boxes."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self):
        return self.x_max - self.x_min + 1

    @property
    def height(self):
        return self.y_max - self.y_min + 1

    @property
    def area(self):
        return self.width * self.height


@dataclass(frozen=True)
class Detection:
    frame_index: int
    mask: np.ndarray
    bbox: BoundingBox
    class_label: str = "object"
    score: float = 1.0


def rle_encode(mask) -> list[int]:
    """Alternating zero/one run lengths over the row-major raster.

    The first run always counts zeros, so a mask starting with a set pixel
    begins with a 0 run.
    """
    flat = np.asarray(mask, dtype=bool).ravel()
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return runs


def rle_decode(runs, h: int, w: int) -> np.ndarray:
    runs = [int(r) for r in runs]
    if not runs:
        raise MalformedInputError("empty run list")
    if any(r < 0 for r in runs):
        raise MalformedInputError("negative run length")
    if any(r == 0 for r in runs[1:]):
        raise MalformedInputError("only the leading run may be zero")
    if sum(runs) != h * w:
        raise MalformedInputError(f"runs sum to {sum(runs)}, expected {h}*{w}={h * w}")
    values = np.arange(len(runs)) % 2 == 1
    flat = np.repeat(values, runs)
    return as_mask(flat.reshape(h, w))


def boundary_pixels(mask) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of boundary pixels, in row-major order."""
    m = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(m.any(axis=1))
    if rows.size == 0:
        return rows, rows.copy()
    cols = np.flatnonzero(m.any(axis=0))
    r0, c0 = rows[0], cols[0]
    # work on the bounding box with a one-pixel unset margin
    crop = np.pad(m[r0:rows[-1] + 1, c0:cols[-1] + 1], 1)
    core = crop[1:-1, 1:-1]
    interior = core & crop[:-2, 1:-1] & crop[2:, 1:-1] & crop[1:-1, :-2] & crop[1:-1, 2:]
    rr, cc = np.nonzero(core & ~interior)
    return rr + r0, cc + c0


def boundary_extract(mask) -> np.ndarray:
    """Set pixels with at least one unset 4-neighbour; the image border counts as unset."""
    m = np.asarray(mask, dtype=bool)
    out = np.zeros(m.shape, dtype=bool)
    out[boundary_pixels(m)] = True
    out.setflags(write=False)
    return out


def bounding_box(mask) -> BoundingBox:
    m = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(m.any(axis=1))
    if rows.size == 0:
        raise EmptyMaskError("bounding box of an empty mask")
    cols = np.flatnonzero(m.any(axis=0))
    return BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1]))


def iou(a, b) -> float:
    """Box IoU with inclusive-pixel areas, i.e. ``(dx + 1) * (dy + 1)``."""
    a = BoundingBox(*a)
    b = BoundingBox(*b)
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min) + 1
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min) + 1
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return float(inter / union)


def connected_components(frame, min_area: int = 4, frame_index: int = 0) -> list[Detection]:
    """Detector stub: one detection per 4-connected blob of at least ``min_area`` pixels."""
    m = np.asarray(frame, dtype=bool)
    labels, count = ndimage.label(m, structure=_CROSS)
    if count == 0:
        return []
    areas = np.bincount(labels.ravel(), minlength=count + 1)
    dets = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if areas[lab] < min_area:
            continue
        comp = labels == lab
        comp.setflags(write=False)
        box = BoundingBox(sl[1].start, sl[0].start, sl[1].stop - 1, sl[0].stop - 1)
        dets.append(Detection(frame_index, comp, box))
    dets.sort(key=lambda d: (d.bbox.y_min, d.bbox.x_min))
    return dets
