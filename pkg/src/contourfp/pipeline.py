"""End-to-end extraction: masks -> tracks -> contour clouds -> features.

Extraction is split in two stages so experiments can reuse the expensive part:
:func:`prepare_video` tracks targets and builds their raw contour clouds, and
:func:`featurize` samples, normalises and embeds one cloud for a given point
count and seed.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embed import EmbedderSpec, embed
from .errors import EmptyCloudError, EmptyEditError, NoTargetError
from .features import FeatureHeader, FeatureRecord
from .pointcloud import SampleConfig, farthest_point_indices, masks_to_pointcloud, normalize_unit_sphere
from .synth import EDIT_NAMES, apply_edit, load_corpus, parse_edit
from .tracker import TrackerConfig, detect_and_track
from .vectordb import VectorDB
from .video import MaskVideo

log = logging.getLogger(__name__)

RESULTS_FORMAT = "contourfp-results"
RESULTS_VERSION = 1
DEFAULT_POINT_COUNTS = (128, 256, 512, 1024, 3072)


@dataclass(frozen=True)
class PipelineConfig:
    tracker: TrackerConfig = TrackerConfig()
    sample: SampleConfig = SampleConfig()
    embedder: EmbedderSpec = EmbedderSpec()
    primary_target_only: bool = False
    min_area: int = 4

    def feature_header(self) -> FeatureHeader:
        return FeatureHeader(
            descriptor_version=self.embedder.descriptor_version,
            embedder=self.embedder.kind,
            k=self.sample.point_count,
            tau=self.sample.time_scale,
            seed=self.sample.seed,
        )


@dataclass
class PreparedTarget:
    target_id: int
    class_label: str
    frames_present: int
    cloud: np.ndarray | None  # None when the target produced no boundary points


@dataclass
class TargetFeature:
    target_id: int
    class_label: str
    frames_present: int
    cloud_size: int
    sampled_size: int
    feature: np.ndarray


@dataclass
class ExtractionReport:
    video_id: str
    targets: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # [(target_id, reason)]

    def records(self) -> list[FeatureRecord]:
        return [FeatureRecord(self.video_id, t.target_id, t.class_label, t.feature) for t in self.targets]


def target_seed(seed: int, target_id: int) -> int:
    """Independent sampling seed per target, stable across runs."""
    return int(np.random.SeedSequence([int(seed), int(target_id)]).generate_state(1)[0])


def _primary(items):
    if not items:
        raise NoTargetError("no targets to choose from")
    return min(items, key=lambda t: (-t.frames_present, t.target_id))


def select_primary_target(report: ExtractionReport) -> int:
    """Target present in the most frames; ties go to the smallest id."""
    return _primary(report.targets).target_id


def target_sequences(video: MaskVideo, config: PipelineConfig):
    if video.is_tracked:
        return list(video.tracks)
    return detect_and_track(video.frames, config.tracker, video_id=video.video_id, min_area=config.min_area)


def prepare_video(video: MaskVideo, config: PipelineConfig) -> list[PreparedTarget]:
    seqs = target_sequences(video, config)
    if config.primary_target_only and seqs:
        seqs = [min(seqs, key=lambda s: (-len(s), s.track_id))]
    prepared = []
    for seq in seqs:
        try:
            cloud = masks_to_pointcloud(seq, config.sample.time_scale)
        except EmptyCloudError:
            cloud = None
        prepared.append(PreparedTarget(seq.track_id, seq.class_label, len(seq), cloud))
    return prepared


def featurize(cloud, k: int, seed: int) -> tuple[np.ndarray, int]:
    idx = farthest_point_indices(cloud, k, seed)
    return embed(normalize_unit_sphere(cloud[idx])), len(idx)


def report_from_prepared(video_id, prepared, k, seed) -> ExtractionReport:
    report = ExtractionReport(video_id)
    for p in prepared:
        if p.cloud is None:
            report.skipped.append((p.target_id, "empty contour cloud"))
            log.warning("%s: target %d has no contour points, skipped", video_id, p.target_id)
            continue
        feat, n_sampled = featurize(p.cloud, k, target_seed(seed, p.target_id))
        report.targets.append(TargetFeature(p.target_id, p.class_label, p.frames_present, len(p.cloud), n_sampled, feat))
    if not report.targets:
        raise NoTargetError(f"{video_id}: no extractable targets")
    return report


def process_video(video: MaskVideo, config: PipelineConfig | None = None) -> ExtractionReport:
    """Full extraction for one video; pre-tracked inputs bypass the tracker."""
    config = config or PipelineConfig()
    prepared = prepare_video(video, config)
    return report_from_prepared(video.video_id, prepared, config.sample.point_count, config.sample.seed)


# ---------------------------------------------------------------- experiments


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _prepare_job(args):
    video, config = args
    return prepare_video(video, config)


def _features_job(args):
    video_id, prepared, k, seed = args
    try:
        return report_from_prepared(video_id, prepared, k, seed).records()
    except NoTargetError:
        return []


def _edited_prepare_job(args):
    video, op, config = args
    try:
        edited = apply_edit(video, op)
    except EmptyEditError:
        return []
    return prepare_video(edited, config)


@dataclass
class ExperimentResult:
    experiment: str  # "points" or "edit"
    setting: str
    queries: int
    accuracy: dict  # {topk: accuracy}
    seconds: float = 0.0

    def as_json(self):
        return {
            "experiment": self.experiment,
            "setting": self.setting,
            "queries": self.queries,
            **{f"top{k}": acc for k, acc in sorted(self.accuracy.items())},
            "seconds": round(self.seconds, 3),
        }


def _score(db, records, topks):
    queries = [(r.video_id, r.feature) for r in records]
    if not queries:
        return {k: 0.0 for k in topks}
    return {k: db.evaluate(queries, k) for k in topks}


def _build_db(records, header):
    db = VectorDB(header)
    for r in records:
        db.insert(r)
    return db


def resolve_edits(edits) -> list:
    if edits in (None, "", "none"):
        return []
    if isinstance(edits, str):
        edits = list(EDIT_NAMES) if edits == "all" else edits.split(";")
    return [parse_edit(e) if isinstance(e, str) else e for e in edits]


def run_experiment(corpus, point_counts=DEFAULT_POINT_COUNTS, edits="all", topks=(1, 5), *,
                   db_seed: int = 1, query_seed: int = 2, edit_points: int | None = None,
                   config: PipelineConfig | None = None, workers: int = 1) -> list[ExperimentResult]:
    """Point-count sweep and edit-robustness runs over a mask corpus.

    ``corpus`` is a directory of ``*.masks.jsonl`` files or a list of videos.
    Point sweep: database and queries hold every target, sampled with
    ``db_seed`` and ``query_seed`` respectively. Edit runs: database of every
    original target at ``edit_points`` (default: largest point count); each
    query is the primary target of an edited video. An ``original`` row with
    unedited queries heads the edit rows.
    """
    config = config or PipelineConfig()
    videos = load_corpus(corpus) if isinstance(corpus, (str, Path)) else list(corpus)
    point_counts = [int(k) for k in point_counts]
    edits = resolve_edits(edits)
    edit_points = edit_points or max(point_counts)
    results = []

    t0 = time.perf_counter()
    all_cfg = PipelineConfig(config.tracker, config.sample, config.embedder, False, config.min_area)
    prepared = _pmap(_prepare_job, [(v, all_cfg) for v in videos], workers)
    prep_seconds = time.perf_counter() - t0
    ids = [v.video_id for v in videos]

    def features(prep_list, k, seed):
        jobs = [(vid, p, k, seed) for vid, p in zip(ids, prep_list)]
        return [r for recs in _pmap(_features_job, jobs, workers) for r in recs]

    db_cache = {}
    for k in sorted(set(point_counts) | ({edit_points} if edits else set())):
        t1 = time.perf_counter()
        header = config.feature_header()
        header.k, header.seed = k, db_seed
        db = _build_db(features(prepared, k, db_seed), header)
        db_cache[k] = db
        if k in point_counts:
            queries = features(prepared, k, query_seed)
            acc = _score(db, queries, topks)
            results.append(ExperimentResult("points", str(k), len(queries), acc,
                                            time.perf_counter() - t1 + prep_seconds))

    if edits:
        db = db_cache[edit_points]
        primary_cfg = PipelineConfig(config.tracker, config.sample, config.embedder, True, config.min_area)
        rows = [("original", None)] + [(str(op), op) for op in edits]
        for name, op in rows:
            t1 = time.perf_counter()
            if op is None:
                prep = [[_primary(p)] if p else [] for p in prepared]
            else:
                prep = _pmap(_edited_prepare_job, [(v, op, primary_cfg) for v in videos], workers)
            queries = features(prep, edit_points, query_seed)
            # a video whose edit destroyed every target still counts as a miss
            acc = _score(db, queries, topks)
            if len(queries) < len(videos):
                acc = {k: a * len(queries) / len(videos) for k, a in acc.items()}
            results.append(ExperimentResult("edit", name, len(videos), acc, time.perf_counter() - t1))
    return results


def format_table(results, topks=(1, 5)) -> str:
    head = ["experiment", "setting", "queries"] + [f"top{k}" for k in topks]
    rows = [[r.experiment, r.setting, str(r.queries)] + [f"{r.accuracy[k] * 100:.2f}%" for k in topks] for r in results]
    widths = [max(len(x) for x in col) for col in zip(head, *rows)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def write_results(path, results, meta=None) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"format": RESULTS_FORMAT, "version": RESULTS_VERSION, **(meta or {})}) + "\n")
        for r in results:
            fh.write(json.dumps(r.as_json()) + "\n")


def read_results(path) -> list[dict]:
    with open(path) as fh:
        head = json.loads(fh.readline())
        if head.get("format") != RESULTS_FORMAT:
            raise ValueError(f"{path}: not a results file")
        return [json.loads(line) for line in fh if line.strip()]
