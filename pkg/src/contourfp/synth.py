"""Synthetic mask videos and mask-level video edits.

Scenes are moving, spinning, pulsing filled shapes rendered as polygons. Each
shape may be confined to a region; giving shapes disjoint regions yields
scenes whose shapes never touch, so connected components equal shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import ndimage
from skimage.draw import polygon as fill_polygon

from .errors import EmptyEditError, GenerationError, InvalidParameterError
from .masks import _CROSS, as_mask
from .video import MaskVideo, TrackMaskSequence, read_video, write_masks

SHAPE_KINDS = ("ellipse", "rectangle", "polygon")
_ELLIPSE_VERTICES = 48


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    size: tuple  # semi-axes (a, b) in pixels
    start: tuple  # centre (x, y) at frame 0
    velocity: tuple = (0.0, 0.0)  # pixels per frame
    deform_amp: float = 0.0  # relative size pulsation
    deform_period: float = 20.0  # frames
    deform_phase: float = 0.0
    angle: float = 0.0  # radians at frame 0
    spin: float = 0.0  # radians per frame
    vertices: tuple | None = None  # polygon outline on the unit scale, [(x, y), ...]
    region: tuple | None = None  # (x0, y0, x1, y1) inclusive motion bounds; default whole frame

    def outline(self):
        a, b = self.size
        if self.kind == "ellipse":
            t = np.linspace(0, 2 * np.pi, _ELLIPSE_VERTICES, endpoint=False)
            return np.column_stack([a * np.cos(t), b * np.sin(t)])
        if self.kind == "rectangle":
            return np.array([[-a, -b], [a, -b], [a, b], [-a, b]], dtype=float)
        if self.kind == "polygon":
            if not self.vertices or len(self.vertices) < 3:
                raise GenerationError("polygon needs at least 3 vertices")
            return np.asarray(self.vertices, dtype=float) * np.array([a, b])
        raise GenerationError(f"unknown shape kind {self.kind!r}")


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    frame_count: int
    shapes: tuple = ()
    seed: int = 0


def _bounce(p, lo, hi):
    """Fold a free trajectory coordinate back into ``[lo, hi]``."""
    span = hi - lo
    if span <= 0:
        return lo
    q = (p - lo) % (2 * span)
    return lo + (2 * span - q if q > span else q)


def shape_outline_at(shape: ShapeSpec, n: int, width: int, height: int) -> np.ndarray:
    """Outline polygon (x, y) of ``shape`` in frame ``n``, in image coordinates."""
    base = shape.outline()
    radius = float(np.sqrt((base ** 2).sum(axis=1)).max()) * (1 + abs(shape.deform_amp))
    x0, y0, x1, y1 = shape.region if shape.region is not None else (0, 0, width - 1, height - 1)
    lo_x, hi_x = x0 + radius + 1, x1 - radius - 1
    lo_y, hi_y = y0 + radius + 1, y1 - radius - 1
    if lo_x > hi_x or lo_y > hi_y:
        raise GenerationError(f"{shape.kind} of radius {radius:.1f} does not fit its bounds")
    scale = 1 + shape.deform_amp * math.sin(2 * math.pi * n / shape.deform_period + shape.deform_phase)
    theta = shape.angle + shape.spin * n
    c, s = math.cos(theta), math.sin(theta)
    pts = base * scale @ np.array([[c, s], [-s, c]])
    cx = _bounce(shape.start[0] + shape.velocity[0] * n, lo_x, hi_x)
    cy = _bounce(shape.start[1] + shape.velocity[1] * n, lo_y, hi_y)
    return pts + np.array([cx, cy])


def render_shape(shape: ShapeSpec, n: int, width: int, height: int) -> np.ndarray:
    pts = shape_outline_at(shape, n, width, height)
    mask = np.zeros((height, width), dtype=bool)
    rr, cc = fill_polygon(pts[:, 1], pts[:, 0], shape=mask.shape)
    mask[rr, cc] = True
    # sharp tips can rasterise into detached pixels; a shape is one 4-connected blob
    labels, count = ndimage.label(mask, structure=_CROSS)
    if count > 1:
        mask = labels == np.argmax(np.bincount(labels.ravel())[1:]) + 1
    return mask


def generate_scene(spec: SceneSpec, video_id: str = "video") -> tuple[list, list]:
    """Render composite frames and one ground-truth sequence per shape."""
    if spec.frame_count < 2:
        raise GenerationError("a scene needs at least 2 frames")
    if spec.width < 3 or spec.height < 3:
        raise GenerationError("frame too small")
    frames = [np.zeros((spec.height, spec.width), dtype=bool) for _ in range(spec.frame_count)]
    per_shape = [[] for _ in spec.shapes]
    for n in range(spec.frame_count):
        for i, shape in enumerate(spec.shapes):
            m = render_shape(shape, n, spec.width, spec.height)
            if m.any():
                frames[n] |= m
                per_shape[i].append((n, as_mask(m)))
    truth = [
        TrackMaskSequence(video_id, entries, spec.frame_count, spec.height, spec.width, i + 1, "object")
        for i, entries in enumerate(per_shape)
        if entries
    ]
    return [as_mask(f) for f in frames], truth


def _random_polygon(rng):
    count = int(rng.integers(5, 9))
    step = 2 * np.pi / count
    t = np.arange(count) * step + rng.uniform(-0.3, 0.3, count) * step
    r = rng.uniform(0.75, 1.0, count)
    return tuple((float(x), float(y)) for x, y in zip(r * np.cos(t), r * np.sin(t)))


def random_scene_spec(seed: int, n_shapes: int = 4, frame_count: int = 90,
                      width: int = 192, height: int = 144, disjoint: bool = True) -> SceneSpec:
    """Random scene; with ``disjoint`` each shape moves in its own vertical lane."""
    rng = np.random.default_rng(seed)
    lane_w = width // n_shapes
    shapes = []
    for i in range(n_shapes):
        region = (i * lane_w, 0, (i + 1) * lane_w - 1, height - 1) if disjoint else None
        room = (lane_w if disjoint else width) / 2 - 3
        amp = float(rng.uniform(0.0, 0.2))
        r_max = min(room, height / 4) / (1 + amp)
        a = float(rng.uniform(5.0, max(5.0, r_max)))
        b = float(rng.uniform(max(4.0, 0.45 * a), a))
        kind = SHAPE_KINDS[int(rng.integers(len(SHAPE_KINDS)))]
        shape = ShapeSpec(
            kind=kind,
            size=(a, b),
            start=(float(rng.uniform(0, width)), float(rng.uniform(0, height))),
            velocity=(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(-2.0, 2.0))),
            deform_amp=amp,
            deform_period=float(rng.uniform(12, 40)),
            deform_phase=float(rng.uniform(0, 2 * np.pi)),
            angle=float(rng.uniform(0, np.pi)),
            spin=float(rng.uniform(-0.04, 0.04)),
            vertices=_random_polygon(rng) if kind == "polygon" else None,
            region=region,
        )
        # corners of rectangles and polygons reach beyond the semi-axes
        radius = float(np.sqrt((shape.outline() ** 2).sum(axis=1)).max())
        if radius > r_max:
            shape = replace(shape, size=(a * r_max / radius, b * r_max / radius))
        shapes.append(shape)
    return SceneSpec(width, height, frame_count, tuple(shapes), seed)


def _parse_range(text) -> tuple[int, int]:
    text = str(text)
    lo, _, hi = text.partition("-")
    lo, hi = int(lo), int(hi or lo)
    if lo < 1 or hi < lo:
        raise InvalidParameterError(f"bad range {text!r}")
    return lo, hi


def generate_corpus(out_dir, videos: int, shapes="3-5", frames="60-120", seed: int = 0,
                    width: int = 192, height: int = 144) -> list[str]:
    """Write ``<id>.masks.jsonl`` (composite frames) and ``<id>.truth.jsonl`` per video."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s_lo, s_hi = _parse_range(shapes)
    f_lo, f_hi = _parse_range(frames)
    rng = np.random.default_rng(seed)
    ids = []
    for i in range(videos):
        vid = f"vid{i:04d}"
        spec = random_scene_spec(int(rng.integers(2**63)), int(rng.integers(s_lo, s_hi + 1)),
                                 int(rng.integers(f_lo, f_hi + 1)), width, height)
        frame_masks, truth = generate_scene(spec, vid)
        write_masks(out / f"{vid}.masks.jsonl", MaskVideo(vid, height, width, spec.frame_count, frames=frame_masks))
        write_masks(out / f"{vid}.truth.jsonl", MaskVideo(vid, height, width, spec.frame_count, tracks=truth))
        ids.append(vid)
    return ids


def load_corpus(corpus_dir) -> list[MaskVideo]:
    return [read_video(p) for p in sorted(Path(corpus_dir).glob("*.masks.jsonl"))]


# ---------------------------------------------------------------- edits

EDIT_NAMES = ("change_aspect", "reverse", "clip", "mirror_h", "crop", "speed_2x", "speed_half", "rotate90")


@dataclass(frozen=True)
class EditOp:
    """One edit. ``params`` may be empty, in which case defaults apply:
    change_aspect (4/3, 1), a 4:3 to 16:9 widening; clip the middle 60% of frames; crop the centred
    60% of width and height."""

    name: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.name not in EDIT_NAMES:
            raise InvalidParameterError(f"unknown edit {self.name!r}; choose from {', '.join(EDIT_NAMES)}")

    def __str__(self):
        if not self.params:
            return self.name
        return f"{self.name}:" + ",".join(f"{p:g}" for p in self.params)


def parse_edit(text: str) -> EditOp:
    name, _, rest = text.partition(":")
    try:
        params = tuple(float(p) for p in rest.split(",")) if rest else ()
    except ValueError:
        raise InvalidParameterError(f"bad edit parameters in {text!r}") from None
    arity = {"change_aspect": 2, "clip": 2, "crop": 4}.get(name, 0)
    if params and len(params) != arity:
        raise InvalidParameterError(f"{name} takes {arity} parameters, got {len(params)}")
    return EditOp(name, params)


def _resolved(op: EditOp, frame_count, height, width):
    p = op.params
    if op.name == "change_aspect":
        return p or (4 / 3, 1.0)
    if op.name == "clip":
        if p:
            return int(p[0]), int(p[1])
        return round(0.2 * frame_count), round(0.8 * frame_count)
    if op.name == "crop":
        if p:
            return tuple(int(v) for v in p)
        cw, ch = round(0.6 * width), round(0.6 * height)
        x0, y0 = (width - cw) // 2, (height - ch) // 2
        return x0, y0, x0 + cw, y0 + ch
    return p


def _spatial(op, args, height, width):
    """Return ``(mask_fn, new_height, new_width)`` or None for temporal edits."""
    if op.name == "mirror_h":
        return (lambda m: m[:, ::-1]), height, width
    if op.name == "rotate90":
        return (lambda m: np.rot90(m, k=-1)), width, height
    if op.name == "change_aspect":
        sx, sy = args
        if sx <= 0 or sy <= 0:
            raise InvalidParameterError("aspect factors must be positive")
        nw, nh = max(1, round(width * sx)), max(1, round(height * sy))
        cols = np.minimum(width - 1, np.floor((np.arange(nw) + 0.5) * width / nw).astype(int))
        rows = np.minimum(height - 1, np.floor((np.arange(nh) + 0.5) * height / nh).astype(int))
        return (lambda m: m[np.ix_(rows, cols)]), nh, nw
    if op.name == "crop":
        x0, y0, x1, y1 = args
        x0, y0 = max(0, x0), max(0, y0)
        x1, y1 = min(width, x1), min(height, y1)
        if x1 <= x0 or y1 <= y0:
            raise EmptyEditError("crop region is empty")
        return (lambda m: m[y0:y1, x0:x1]), y1 - y0, x1 - x0
    return None


def _temporal(op, args, frame_count):
    """Return ``(index_map, new_frame_count)``; index_map(n) lists new indices."""
    if op.name == "reverse":
        return (lambda n: [frame_count - 1 - n]), frame_count
    if op.name == "clip":
        start, end = max(0, args[0]), min(frame_count, args[1])
        if end - start < 2:
            raise EmptyEditError(f"clip [{args[0]}, {args[1]}) keeps fewer than 2 frames")
        return (lambda n: [n - start] if start <= n < end else []), end - start
    if op.name == "speed_2x":
        return (lambda n: [n // 2] if n % 2 == 0 else []), (frame_count + 1) // 2
    if op.name == "speed_half":
        return (lambda n: [2 * n, 2 * n + 1]), 2 * frame_count
    return None


def _edit_entries(entries, op, args, frame_count, height, width):
    """Apply ``op`` to sparse ``(frame_index, mask)`` entries."""
    spatial = _spatial(op, args, height, width)
    if spatial is not None:
        fn, nh, nw = spatial
        return [(n, as_mask(fn(m))) for n, m in entries], frame_count, nh, nw
    index_map, nf = _temporal(op, args, frame_count)
    out = [(new, m) for n, m in entries for new in index_map(n)]
    out.sort(key=lambda e: e[0])
    return out, nf, height, width


def apply_edit(item, op: EditOp | str):
    """Apply an edit to a :class:`MaskVideo` or a :class:`TrackMaskSequence`."""
    if isinstance(op, str):
        op = parse_edit(op)
    if isinstance(item, TrackMaskSequence):
        return apply_edit_resolved(item, op, _resolved(op, item.frame_count, item.height, item.width))
    if not isinstance(item, MaskVideo):
        raise InvalidParameterError(f"cannot edit {type(item).__name__}")
    args = _resolved(op, item.frame_count, item.height, item.width)
    if item.is_tracked:
        tracks = []
        for seq in item.tracks:
            try:
                tracks.append(apply_edit_resolved(seq, op, args))
            except EmptyEditError:
                continue
        if not tracks:
            raise EmptyEditError(f"{op} leaves no target in {item.video_id}")
        t0 = tracks[0]
        return MaskVideo(item.video_id, t0.height, t0.width, t0.frame_count, frames=None, tracks=tracks)
    entries, nf, nh, nw = _edit_entries(list(enumerate(item.frames)), op, args, item.frame_count, item.height, item.width)
    if not any(m.any() for _, m in entries):
        raise EmptyEditError(f"{op} leaves {item.video_id} without foreground")
    return MaskVideo(item.video_id, nh, nw, nf, frames=[m for _, m in entries])


def apply_edit_resolved(seq: TrackMaskSequence, op: EditOp, args) -> TrackMaskSequence:
    entries, nf, nh, nw = _edit_entries(seq.entries, op, args, seq.frame_count, seq.height, seq.width)
    entries = [(n, m) for n, m in entries if m.any()]
    if not entries:
        raise EmptyEditError(f"{op} leaves track {seq.track_id} empty")
    return replace(seq, entries=entries, frame_count=nf, height=nh, width=nw)
