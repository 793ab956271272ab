"""Exhaustive Euclidean retrieval over target features.

The on-disk format is the feature interchange format with an ``MADB`` header::

    {"format": "MADB", "format_version": 1, "descriptor_version": 1, "k": 3072, ...}
    {"video_id": ..., "target_id": ..., "class_label": ..., "feature": [...]}
"""

from __future__ import annotations

import json
import logging
from typing import NamedTuple

import numpy as np

from .embed import DESCRIPTOR_VERSION, as_feature
from .errors import EmptyDatabaseError, IncompatibleVersionError, InvalidParameterError, MalformedInputError
from .features import FeatureHeader, FeatureRecord, parse_record, record_json

log = logging.getLogger(__name__)

DB_FORMAT = "MADB"
DB_FORMAT_VERSION = 1


class Hit(NamedTuple):
    video_id: str
    target_id: int
    distance: float


class VectorDB:
    def __init__(self, header: FeatureHeader | None = None):
        self.header = header or FeatureHeader()
        self._entries: dict[tuple[str, int], FeatureRecord] = {}
        self._matrix = None
        self._keys = None

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def get(self, video_id, target_id) -> FeatureRecord:
        return self._entries[(video_id, int(target_id))]

    def entries(self) -> list[FeatureRecord]:
        return list(self._entries.values())

    def insert(self, entry: FeatureRecord) -> bool:
        """Add an entry; returns True if it replaced one with the same key."""
        entry = FeatureRecord(str(entry.video_id), int(entry.target_id), entry.class_label, as_feature(entry.feature))
        key = (entry.video_id, entry.target_id)
        replaced = key in self._entries
        if replaced:
            log.warning("replacing database entry %s/%d", *key)
        self._entries[key] = entry
        self._matrix = None
        return replaced

    def _index(self):
        if self._matrix is None:
            self._keys = sorted(self._entries)
            self._matrix = np.stack([self._entries[k].feature for k in self._keys]) if self._keys else np.empty((0, 0))
        return self._keys, self._matrix

    def distances(self, q) -> tuple[list, np.ndarray]:
        keys, mat = self._index()
        diff = mat - as_feature(q)
        return keys, np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def ranked(self, q) -> list[Hit]:
        """All entries by ascending distance; ties by (video_id, target_id)."""
        if not self._entries:
            raise EmptyDatabaseError("query against an empty database")
        keys, dist = self.distances(q)
        # keys are already sorted, so a stable sort on distance breaks ties by key
        order = np.argsort(dist, kind="stable")
        return [Hit(keys[i][0], keys[i][1], float(dist[i])) for i in order]

    def query_topk(self, q, k: int) -> list[Hit]:
        if k < 1:
            raise InvalidParameterError("k must be >= 1")
        return self.ranked(q)[:k]

    def top_videos(self, q, k: int) -> list[str]:
        """The first ``k`` distinct video ids in ranked order."""
        seen = []
        for hit in self.ranked(q):
            if hit.video_id not in seen:
                seen.append(hit.video_id)
                if len(seen) == k:
                    break
        return seen

    def evaluate(self, queries, k: int, granularity: str = "video") -> float:
        """Top-k accuracy.

        ``queries`` are ``(truth, feature)`` pairs, where truth is a video id, or
        a ``(video_id, target_id)`` key when ``granularity="target"``.
        """
        queries = list(queries)
        if not queries:
            raise InvalidParameterError("no queries to evaluate")
        hits = 0
        for truth, q in queries:
            if granularity == "video":
                hits += truth in self.top_videos(q, k)
            elif granularity == "target":
                key = (str(truth[0]), int(truth[1]))
                hits += any((h.video_id, h.target_id) == key for h in self.query_topk(q, k))
            else:
                raise InvalidParameterError(f"unknown granularity {granularity!r}")
        return hits / len(queries)

    def save(self, path) -> None:
        head = self.header.to_json(DB_FORMAT)
        head = {"format": DB_FORMAT, "format_version": DB_FORMAT_VERSION, **{k: v for k, v in head.items() if k != "format"}}
        with open(path, "w") as fh:
            fh.write(json.dumps(head) + "\n")
            for key in sorted(self._entries):
                fh.write(record_json(self._entries[key]) + "\n")

    @classmethod
    def load(cls, path, descriptor_version: int | None = DESCRIPTOR_VERSION) -> "VectorDB":
        """Read a database file. Pass ``descriptor_version=None`` to skip the version check."""
        with open(path) as fh:
            first = fh.readline()
            try:
                head = json.loads(first)
            except ValueError:
                raise MalformedInputError("database header is not JSON", line=1) from None
            if not isinstance(head, dict) or head.get("format") != DB_FORMAT:
                raise MalformedInputError(f"missing {DB_FORMAT} header", line=1)
            if head.get("format_version") != DB_FORMAT_VERSION:
                raise IncompatibleVersionError(
                    f"database format version {head.get('format_version')!r}, expected {DB_FORMAT_VERSION}")
            if descriptor_version is not None and head.get("descriptor_version") != descriptor_version:
                raise IncompatibleVersionError(
                    f"database descriptor version {head.get('descriptor_version')!r}, expected {descriptor_version}")
            head.pop("format_version")
            db = cls(FeatureHeader.from_json(head))
            for lineno, line in enumerate(fh, start=2):
                if line.strip():
                    db.insert(parse_record(line, lineno))
        return db
