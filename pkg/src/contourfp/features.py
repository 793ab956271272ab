"""Feature interchange files.

JSON Lines. The first line is a header describing the pipeline that produced
the vectors; each following line is one target::

    {"format": "contourfp-features", "descriptor_version": 1, "k": 3072,
     "tau": null, "seed": 0, "normalized": true, ...}
    {"video_id": "v0", "target_id": 1, "class_label": "object", "feature": [...]}

Floats are written with ``repr`` precision, so a write/read cycle is exact.
Files without a header line are accepted as externally computed features and
are re-normalised on import.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .embed import DESCRIPTOR_VERSION, FEATURE_DIM, PAIR_SAMPLE_SIZE
from .errors import DimensionError, MalformedInputError

FEATURE_FORMAT = "contourfp-features"


@dataclass
class FeatureHeader:
    descriptor_version: int | None = DESCRIPTOR_VERSION
    embedder: str = "builtin_descriptor"
    k: int | None = None
    tau: float | None = None  # None: per-video default
    seed: int | None = None
    normalized: bool = True
    order: str = "sample-then-normalize"
    pair_sample: int = PAIR_SAMPLE_SIZE
    extra: dict = field(default_factory=dict)

    def to_json(self, fmt=FEATURE_FORMAT):
        d = asdict(self)
        extra = d.pop("extra")
        return {"format": fmt, **d, **extra}

    @classmethod
    def from_json(cls, d):
        d = dict(d)
        d.pop("format", None)
        known = {k: d.pop(k) for k in list(d) if k in cls.__dataclass_fields__ and k != "extra"}
        return cls(**known, extra=d)


@dataclass
class FeatureRecord:
    video_id: str
    target_id: int
    class_label: str
    feature: np.ndarray


def record_json(rec: FeatureRecord) -> str:
    return json.dumps(
        {
            "video_id": rec.video_id,
            "target_id": int(rec.target_id),
            "class_label": rec.class_label,
            "feature": [float(x) for x in rec.feature],
        },
        separators=(",", ":"),
    )


def parse_record(line: str, lineno: int) -> FeatureRecord:
    try:
        d = json.loads(line)
        vid, tid, label, values = str(d["video_id"]), int(d["target_id"]), str(d.get("class_label", "object")), d["feature"]
        values = np.array(values, dtype=np.float64)
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedInputError(f"bad feature record: {exc}", line=lineno) from None
    if values.shape != (FEATURE_DIM,):
        raise DimensionError(f"line {lineno}: expected {FEATURE_DIM} values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise MalformedInputError("non-finite feature value", line=lineno)
    return FeatureRecord(vid, tid, label, values)


def write_features(path, records, header: FeatureHeader | None = None) -> None:
    header = header or FeatureHeader()
    with open(path, "w") as fh:
        fh.write(json.dumps(header.to_json()) + "\n")
        for rec in records:
            fh.write(record_json(rec) + "\n")


def read_features(path) -> tuple[FeatureHeader, list[FeatureRecord]]:
    header = None
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if header is None and not records:
                try:
                    first = json.loads(line)
                except ValueError:
                    raise MalformedInputError("not JSON", line=lineno) from None
                if isinstance(first, dict) and "format" in first:
                    if first["format"] != FEATURE_FORMAT:
                        raise MalformedInputError(f"unexpected format tag {first['format']!r}", line=lineno)
                    header = FeatureHeader.from_json(first)
                    continue
                header = FeatureHeader(descriptor_version=None, embedder="imported", normalized=False)
            records.append(parse_record(line, lineno))
    if header is None:
        header = FeatureHeader(descriptor_version=None, embedder="imported", normalized=False)
    return header, records


def import_features(path) -> list[FeatureRecord]:
    """Read a feature file, scaling vectors to unit length if flagged unnormalised."""
    header, records = read_features(path)
    if not header.normalized:
        for rec in records:
            norm = np.linalg.norm(rec.feature)
            if norm > 0:
                rec.feature = rec.feature / norm
    return records
