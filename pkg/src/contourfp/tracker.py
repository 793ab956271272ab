"""SORT-style multi-object tracking over mask detections.

Each track carries a constant-velocity Kalman filter on ``(u, v, s, r)``:
box centre, area and aspect ratio (width / height), with velocities for the
first three. Detections are associated to predicted boxes by Hungarian
assignment on ``1 - IoU``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assignment import hungarian
from .errors import InvalidObservationError, InvalidParameterError, SequencingError
from .masks import BoundingBox, connected_components, iou
from .video import TrackMaskSequence

_F = np.eye(7)
_F[0, 4] = _F[1, 5] = _F[2, 6] = 1.0
_H = np.eye(4, 7)


@dataclass(frozen=True)
class KalmanParams:
    """Diagonal noise terms, ordered (u, v, s, r, du, dv, ds); reference SORT values."""

    init_cov: tuple = (10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4)
    process_noise: tuple = (1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4)
    measurement_noise: tuple = (1.0, 1.0, 10.0, 10.0)


DEFAULT_KALMAN = KalmanParams()


@dataclass
class KalmanState:
    mean: np.ndarray
    covariance: np.ndarray

    def observation(self):
        return self.mean[:4].copy()


def box_to_observation(box) -> np.ndarray:
    box = BoundingBox(*box)
    w, h = box.width, box.height
    return np.array([(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0, w * h, w / h], dtype=float)


def observation_to_box(z) -> BoundingBox:
    u, v = float(z[0]), float(z[1])
    s = max(float(z[2]), 1e-6)
    r = max(float(z[3]), 1e-6)
    w = math.sqrt(s * r)
    h = s / w
    return BoundingBox(u - (w - 1) / 2, v - (h - 1) / 2, u + (w - 1) / 2, v + (h - 1) / 2)


def kalman_init(obs, params: KalmanParams = DEFAULT_KALMAN) -> KalmanState:
    mean = np.zeros(7)
    mean[:4] = obs
    return KalmanState(mean, np.diag(params.init_cov).astype(float))


def kalman_predict(state: KalmanState, process_noise=DEFAULT_KALMAN.process_noise) -> KalmanState:
    mean = state.mean.copy()
    # keep the predicted area positive, as in reference SORT
    if mean[2] + mean[6] <= 0:
        mean[6] = 0.0
    mean = _F @ mean
    cov = _F @ state.covariance @ _F.T + np.diag(process_noise)
    return KalmanState(mean, 0.5 * (cov + cov.T))


def kalman_update(state: KalmanState, obs, measurement_noise=DEFAULT_KALMAN.measurement_noise) -> KalmanState:
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (4,):
        raise InvalidObservationError(f"observation must have 4 components, got {obs.shape}")
    if not (obs[2] > 0 and obs[3] > 0):
        raise InvalidObservationError("observation area and aspect ratio must be positive")
    P = state.covariance
    innovation = obs - _H @ state.mean
    S = _H @ P @ _H.T + np.diag(measurement_noise)
    K = np.linalg.solve(S, _H @ P).T  # P H^T S^-1, with S symmetric
    mean = state.mean + K @ innovation
    cov = P - K @ _H @ P
    return KalmanState(mean, 0.5 * (cov + cov.T))


@dataclass(frozen=True)
class TrackerConfig:
    iou_threshold: float = 0.3
    max_age: int = 3
    min_hits: int = 1
    kalman: KalmanParams = DEFAULT_KALMAN

    def __post_init__(self):
        if not 0 < self.iou_threshold < 1:
            raise InvalidParameterError("iou_threshold must lie in (0, 1)")
        if self.max_age < 0:
            raise InvalidParameterError("max_age must be >= 0")
        if self.min_hits < 1:
            raise InvalidParameterError("min_hits must be >= 1")


@dataclass
class Track:
    track_id: int
    state: KalmanState
    class_label: str
    masks: list = field(default_factory=list)  # [(frame_index, mask)]
    hits: int = 1
    hit_streak: int = 1
    age_since_update: int = 0

    def predicted_box(self):
        return observation_to_box(self.state.mean[:4])


def associate(track_boxes, detections, iou_threshold: float = 0.3):
    """Match predicted boxes to detections.

    Returns ``(matches, unmatched_tracks, unmatched_detections)`` where
    matches are ``(track_index, detection_index)`` pairs.
    """
    nt, nd = len(track_boxes), len(detections)
    if nt == 0 or nd == 0:
        return [], list(range(nt)), list(range(nd))
    overlap = np.array([[iou(tb, d.bbox) for d in detections] for tb in track_boxes])
    matches = []
    for t, d in hungarian(1.0 - overlap):
        if overlap[t, d] >= iou_threshold:
            matches.append((t, d))
    matched_t = {t for t, _ in matches}
    matched_d = {d for _, d in matches}
    return (
        matches,
        [t for t in range(nt) if t not in matched_t],
        [d for d in range(nd) if d not in matched_d],
    )


class Tracker:
    """Stateful tracker for one video. Feed it one frame of detections at a time."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self.tracks: list[Track] = []
        self.retired: list[Track] = []
        self._next_id = 1
        self._last_frame = -1

    def step(self, detections, frame_index: int | None = None) -> list[Track]:
        if frame_index is None:
            frame_index = detections[0].frame_index if detections else self._last_frame + 1
        if frame_index <= self._last_frame:
            raise SequencingError(f"frame {frame_index} after frame {self._last_frame}")
        if any(d.frame_index != frame_index for d in detections):
            raise SequencingError(f"detections do not all belong to frame {frame_index}")
        self._last_frame = frame_index
        kp = self.config.kalman

        for trk in self.tracks:
            trk.state = kalman_predict(trk.state, kp.process_noise)
            trk.age_since_update += 1
            if trk.age_since_update > 1:
                trk.hit_streak = 0

        matches, _, unmatched = associate([t.predicted_box() for t in self.tracks], detections, self.config.iou_threshold)
        for ti, di in matches:
            trk, det = self.tracks[ti], detections[di]
            trk.state = kalman_update(trk.state, box_to_observation(det.bbox), kp.measurement_noise)
            trk.masks.append((frame_index, det.mask))
            trk.hits += 1
            trk.hit_streak += 1
            trk.age_since_update = 0
        for di in unmatched:
            det = detections[di]
            trk = Track(self._next_id, kalman_init(box_to_observation(det.bbox), kp), det.class_label)
            trk.masks.append((frame_index, det.mask))
            self._next_id += 1
            self.tracks.append(trk)

        alive = []
        for trk in self.tracks:
            (self.retired if trk.age_since_update > self.config.max_age else alive).append(trk)
        self.tracks = alive
        return self.tracks

    def all_tracks(self) -> list[Track]:
        return sorted(self.retired + self.tracks, key=lambda t: t.track_id)


def track_video(frames_of_detections, config: TrackerConfig | None = None, *,
                video_id: str = "video", frame_count: int | None = None) -> list[TrackMaskSequence]:
    """Run the tracker over a whole video; list index is the frame index."""
    tracker = Tracker(config)
    shape = None
    for n, dets in enumerate(frames_of_detections):
        tracker.step(list(dets), n)
        if shape is None and dets:
            shape = dets[0].mask.shape
    if frame_count is None:
        frame_count = len(frames_of_detections)
    if shape is None:
        return []
    out = []
    for trk in tracker.all_tracks():
        if trk.hits >= tracker.config.min_hits:
            out.append(TrackMaskSequence(video_id, list(trk.masks), frame_count, shape[0], shape[1],
                                         trk.track_id, trk.class_label))
    return out


def detect_and_track(frames, config: TrackerConfig | None = None, *, video_id: str = "video",
                     min_area: int = 4) -> list[TrackMaskSequence]:
    """Connected-component detection on each composite frame, then tracking."""
    dets = [connected_components(f, min_area, frame_index=n) for n, f in enumerate(frames)]
    return track_video(dets, config, video_id=video_id, frame_count=len(frames))
