import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contourfp.errors import EmptyDatabaseError, IncompatibleVersionError, InvalidParameterError, MalformedInputError
from contourfp.features import FeatureRecord
from contourfp.vectordb import VectorDB


def unit(rng):
    v = rng.normal(size=256)
    return v / np.linalg.norm(v)


def filled(rng, n, videos=None):
    db = VectorDB()
    for i in range(n):
        db.insert(FeatureRecord(f"v{(i if videos is None else i % videos):04d}", i, "object", unit(rng)))
    return db


def test_insert_and_replace():
    rng = np.random.default_rng(0)
    db = VectorDB()
    a, b = unit(rng), unit(rng)
    assert db.insert(FeatureRecord("v", 1, "object", a)) is False
    assert len(db) == 1
    assert db.insert(FeatureRecord("v", 1, "object", b)) is True
    assert len(db) == 1
    assert np.array_equal(db.get("v", 1).feature, b)


def test_thousand_entries_readback():
    rng = np.random.default_rng(1)
    feats = [unit(rng) for _ in range(1000)]
    db = VectorDB()
    for i, f in enumerate(feats):
        db.insert(FeatureRecord(f"v{i}", 0, "object", f))
    assert len(db) == 1000
    assert all(np.array_equal(db.get(f"v{i}", 0).feature, f) for i, f in enumerate(feats))


def test_self_query():
    rng = np.random.default_rng(2)
    f = unit(rng)
    db = VectorDB()
    db.insert(FeatureRecord("only", 3, "object", f))
    (hit,) = db.query_topk(f, 1)
    assert hit == ("only", 3, 0.0)
    assert len(db.query_topk(f, 10)) == 1


def test_constructed_distances():
    q = np.zeros(256)
    q[0] = 1.0
    db = VectorDB()
    # distances exactly 0.3, 0.1, 0.2 along an orthogonal axis
    for name, d in (("c", 0.3), ("a", 0.1), ("b", 0.2)):
        v = q.copy()
        v[1] = d
        db.insert(FeatureRecord(name, 1, "object", v))
    hits = db.query_topk(q, 3)
    assert [h.video_id for h in hits] == ["a", "b", "c"]
    assert [h.distance for h in hits] == [0.1, 0.2, 0.3]


def test_ties_break_by_key():
    v = np.zeros(256)
    v[0] = 1
    db = VectorDB()
    for vid, tid in (("b", 1), ("a", 2), ("a", 1)):
        db.insert(FeatureRecord(vid, tid, "object", v))
    assert [(h.video_id, h.target_id) for h in db.query_topk(v, 3)] == [("a", 1), ("a", 2), ("b", 1)]


def test_empty_db_and_bad_k():
    with pytest.raises(EmptyDatabaseError):
        VectorDB().query_topk(np.ones(256) / 16, 1)
    db = filled(np.random.default_rng(3), 2)
    with pytest.raises(InvalidParameterError):
        db.query_topk(np.ones(256) / 16, 0)


def test_full_query_is_sorted_permutation():
    rng = np.random.default_rng(4)
    db = filled(rng, 50)
    hits = db.query_topk(unit(rng), 50)
    assert sorted((h.video_id, h.target_id) for h in hits) == sorted((r.video_id, r.target_id) for r in db.entries())
    d = [h.distance for h in hits]
    assert d == sorted(d)


def test_deterministic_queries():
    rng = np.random.default_rng(5)
    db = filled(rng, 80)
    q = unit(rng)
    assert db.query_topk(q, 80) == db.query_topk(q, 80)


def test_evaluate_examples():
    rng = np.random.default_rng(6)
    db = filled(rng, 4)
    exact = [(r.video_id, r.feature) for r in db.entries()]
    assert db.evaluate(exact, 1) == 1.0
    assert db.evaluate([("missing", exact[0][1])], 5) == 0.0
    mixed = exact[:3] + [("v0000", exact[3][1])]
    assert db.evaluate(mixed, 1) == 0.75


def test_evaluate_counts_distinct_videos():
    # v0 owns three near-identical targets; top-2 must still reach v1
    base = np.zeros(256)
    base[0] = 1
    db = VectorDB()
    for t in range(3):
        v = base.copy()
        v[1] = 0.01 * t
        db.insert(FeatureRecord("v0", t, "object", v))
    far = base.copy()
    far[2] = 0.5
    db.insert(FeatureRecord("v1", 0, "object", far))
    assert db.top_videos(base, 2) == ["v0", "v1"]
    assert db.evaluate([("v1", base)], 2) == 1.0
    assert db.evaluate([(("v1", 0), base)], 2, granularity="target") == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 40), st.integers(1, 10))
def test_top5_at_least_top1(seed, n, videos):
    rng = np.random.default_rng(seed)
    db = filled(rng, n, videos)
    queries = [(f"v{int(rng.integers(videos)):04d}", unit(rng)) for _ in range(10)]
    assert db.evaluate(queries, 5) >= db.evaluate(queries, 1)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    db = filled(rng, 100, videos=30)
    db.header.k, db.header.seed = 3072, 1
    db.save(tmp_path / "db.madb")
    back = VectorDB.load(tmp_path / "db.madb")
    assert back.header == db.header
    for a, b in zip(sorted(db.entries(), key=lambda r: (r.video_id, r.target_id)), back.entries()):
        assert a.feature.tobytes() == b.feature.tobytes()
    probes = [unit(rng) for _ in range(10)]
    for q in probes:
        assert db.query_topk(q, 5) == back.query_topk(q, 5)
    qs = [(f"v{i:04d}", q) for i, q in enumerate(probes)]
    assert db.evaluate(qs, 5) == back.evaluate(qs, 5)


def test_empty_round_trip(tmp_path):
    VectorDB().save(tmp_path / "e.madb")
    assert len(VectorDB.load(tmp_path / "e.madb")) == 0


@pytest.mark.parametrize("field,value", [("descriptor_version", 2), ("format_version", 99)])
def test_version_mismatch(tmp_path, field, value):
    p = tmp_path / "db.madb"
    filled(np.random.default_rng(8), 3).save(p)
    lines = p.read_text().splitlines()
    head = json.loads(lines[0])
    head[field] = value
    p.write_text("\n".join([json.dumps(head)] + lines[1:]) + "\n")
    with pytest.raises(IncompatibleVersionError):
        VectorDB.load(p)


def test_malformed_db(tmp_path):
    p = tmp_path / "db.madb"
    filled(np.random.default_rng(9), 3).save(p)
    p.write_text(p.read_text() + "not json\n")
    with pytest.raises(MalformedInputError) as exc:
        VectorDB.load(p)
    assert exc.value.line == 5
