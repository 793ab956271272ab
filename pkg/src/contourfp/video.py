"""Mask videos, tracked mask sequences, and the mask interchange file.

The interchange file is JSON Lines, one record per (video, frame, track)::

    {"video_id": "v0", "frame_index": 3, "track_id": 1, "class_label": "object",
     "height": 120, "width": 160, "rle": [0, 5, ...], "frame_count": 90}

``track_id`` and ``class_label`` are optional. ``frame_count`` is optional too;
without it a video is assumed to end at its last recorded frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MalformedInputError
from .masks import as_mask, rle_decode, rle_encode


@dataclass
class TrackMaskSequence:
    """Masks of one tracked target, at the frames where it was observed."""

    video_id: str
    entries: list  # [(frame_index, mask)], strictly increasing frame_index
    frame_count: int
    height: int
    width: int
    track_id: int = 0
    class_label: str = "object"

    def __post_init__(self):
        last = -1
        for n, m in self.entries:
            if n <= last:
                raise MalformedInputError(f"{self.video_id}: frame indices must increase strictly")
            if not 0 <= n < self.frame_count:
                raise MalformedInputError(f"{self.video_id}: frame {n} outside [0, {self.frame_count})")
            if m.shape != (self.height, self.width):
                raise MalformedInputError(f"{self.video_id}: mask shape {m.shape} != {(self.height, self.width)}")
            last = n

    def __len__(self):
        return len(self.entries)

    @property
    def frame_indices(self):
        return [n for n, _ in self.entries]


@dataclass
class MaskVideo:
    """A video as masks: either per-frame composites or pre-tracked sequences."""

    video_id: str
    height: int
    width: int
    frame_count: int
    frames: list | None = None
    tracks: list = field(default_factory=list)

    @property
    def is_tracked(self):
        return self.frames is None


def _record(video_id, n, mask, frame_count, track_id=None, class_label=None):
    rec = {"video_id": video_id, "frame_index": int(n)}
    if track_id is not None:
        rec["track_id"] = int(track_id)
    if class_label is not None:
        rec["class_label"] = class_label
    rec["height"], rec["width"] = (int(s) for s in mask.shape)
    rec["frame_count"] = int(frame_count)
    rec["rle"] = rle_encode(mask)
    return rec


def video_records(video: MaskVideo):
    if video.is_tracked:
        for seq in video.tracks:
            for n, m in seq.entries:
                yield _record(video.video_id, n, m, video.frame_count, seq.track_id, seq.class_label)
    else:
        for n, m in enumerate(video.frames):
            yield _record(video.video_id, n, m, video.frame_count)


def write_masks(path, videos) -> None:
    if isinstance(videos, MaskVideo):
        videos = [videos]
    with open(path, "w") as fh:
        for video in videos:
            for rec in video_records(video):
                fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_masks(path) -> list[MaskVideo]:
    """Parse an interchange file into videos, in order of first appearance."""
    grouped: dict[str, list] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                vid = str(rec["video_id"])
                n = int(rec["frame_index"])
                h, w = int(rec["height"]), int(rec["width"])
                runs = rec["rle"]
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedInputError(f"bad mask record: {exc}", line=lineno) from None
            if n < 0:
                raise MalformedInputError("negative frame_index", line=lineno)
            try:
                mask = rle_decode(runs, h, w)
            except MalformedInputError as exc:
                raise MalformedInputError(str(exc), line=lineno) from None
            grouped.setdefault(vid, []).append((lineno, rec, n, mask))
    return [_assemble(vid, recs) for vid, recs in grouped.items()]


def _assemble(vid, recs) -> MaskVideo:
    shapes = {m.shape for _, _, _, m in recs}
    if len(shapes) != 1:
        raise MalformedInputError(f"video {vid}: inconsistent mask sizes {sorted(shapes)}", line=recs[-1][0])
    h, w = shapes.pop()
    frame_count = max(n for _, _, n, _ in recs) + 1
    declared = [int(rec["frame_count"]) for _, rec, _, _ in recs if "frame_count" in rec]
    if declared:
        if max(declared) < frame_count:
            raise MalformedInputError(f"video {vid}: frame_index beyond frame_count", line=recs[-1][0])
        frame_count = max(declared)

    tracked = ["track_id" in rec for _, rec, _, _ in recs]
    if any(tracked) and not all(tracked):
        raise MalformedInputError(f"video {vid}: mixes tracked and untracked records", line=recs[0][0])

    if not any(tracked):
        frames = [None] * frame_count
        for lineno, _, n, mask in recs:
            if frames[n] is not None:
                raise MalformedInputError(f"video {vid}: duplicate frame {n}", line=lineno)
            frames[n] = mask
        empty = as_mask(np.zeros((h, w), dtype=bool))
        frames = [empty if f is None else f for f in frames]
        return MaskVideo(vid, h, w, frame_count, frames=frames)

    by_track: dict[int, list] = {}
    labels: dict[int, str] = {}
    for lineno, rec, n, mask in recs:
        tid = int(rec["track_id"])
        by_track.setdefault(tid, []).append((n, mask))
        labels.setdefault(tid, str(rec.get("class_label", "object")))
    tracks = []
    for tid in sorted(by_track):
        entries = sorted(by_track[tid], key=lambda e: e[0])
        tracks.append(TrackMaskSequence(vid, entries, frame_count, h, w, tid, labels[tid]))
    return MaskVideo(vid, h, w, frame_count, frames=None, tracks=tracks)


def read_video(path) -> MaskVideo:
    videos = read_masks(path)
    if len(videos) != 1:
        raise MalformedInputError(f"{Path(path).name}: expected one video, found {len(videos)}")
    return videos[0]
