"""Command-line interface.

Exit codes: 0 success, 2 bad input, 3 incompatible artifact versions.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from pathlib import Path

from .embed import DESCRIPTOR_VERSION, EmbedderSpec
from .errors import ContourFPError, IncompatibleVersionError, InvalidParameterError, MalformedInputError
from .features import FeatureHeader, import_features, read_features, write_features
from .pipeline import DEFAULT_POINT_COUNTS, ExperimentResult, PipelineConfig, format_table, process_video, \
    run_experiment, write_results
from .pointcloud import SampleConfig
from .synth import apply_edit, generate_corpus, parse_edit
from .tracker import TrackerConfig
from .vectordb import VectorDB
from .video import read_masks, write_masks

log = logging.getLogger("contourfp")

EXIT_OK, EXIT_INPUT, EXIT_INCOMPATIBLE = 0, 2, 3


def _int_list(text):
    try:
        out = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InvalidParameterError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise InvalidParameterError(f"expected positive integers, got {text!r}")
    return out


def _expand(pattern):
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise MalformedInputError(f"no files match {pattern!r}")
    return paths


def _check_version(header: FeatureHeader, source):
    if header.descriptor_version is not None and header.descriptor_version != DESCRIPTOR_VERSION:
        raise IncompatibleVersionError(
            f"{source}: descriptor version {header.descriptor_version}, expected {DESCRIPTOR_VERSION}")


def _load_queries(paths):
    records = []
    for p in paths:
        header, _ = read_features(p)
        _check_version(header, p)
        records += import_features(p)
    return records


def cmd_synth(args):
    ids = generate_corpus(args.out, args.videos, args.shapes, args.frames, args.seed, args.width, args.height)
    print(f"wrote {len(ids)} videos to {args.out}")


def cmd_edit(args):
    op = parse_edit(args.op)
    edited = [apply_edit(v, op) for v in read_masks(args.inp)]
    write_masks(args.out, edited)
    print(f"{op}: wrote {len(edited)} video(s) to {args.out}")


def cmd_extract(args):
    config = PipelineConfig(
        tracker=TrackerConfig(iou_threshold=args.iou, max_age=args.max_age, min_hits=args.min_hits),
        sample=SampleConfig(point_count=args.points, seed=args.seed, time_scale=args.tau),
        embedder=EmbedderSpec(),
        primary_target_only=args.primary_only,
    )
    records = []
    for video in read_masks(args.inp):
        report = process_video(video, config)
        for vid_target, reason in report.skipped:
            log.warning("%s target %d skipped: %s", video.video_id, vid_target, reason)
        for t in report.targets:
            log.info("%s target %d: %d frames, %d -> %d points", video.video_id, t.target_id,
                     t.frames_present, t.cloud_size, t.sampled_size)
        records += report.records()
    write_features(args.out, records, config.feature_header())
    print(f"wrote {len(records)} feature(s) to {args.out}")


def cmd_db_build(args):
    paths = _expand(args.features)
    header = None
    db = None
    for p in paths:
        h, _ = read_features(p)
        _check_version(h, p)
        if db is None:
            header = h if h.normalized else FeatureHeader(k=h.k, tau=h.tau, seed=h.seed, extra=h.extra)
            db = VectorDB(header)
        for rec in import_features(p):
            db.insert(rec)
    db.save(args.out)
    print(f"database {args.out}: {len(db)} entries from {len(paths)} file(s)")


def cmd_db_query(args):
    db = VectorDB.load(args.db)
    for rec in _load_queries([args.inp]):
        hits = db.query_topk(rec.feature, args.topk)
        print(json.dumps({
            "video_id": rec.video_id,
            "target_id": rec.target_id,
            "hits": [{"video_id": h.video_id, "target_id": h.target_id, "distance": h.distance} for h in hits],
        }))


def cmd_eval(args):
    db = VectorDB.load(args.db)
    paths = _expand(args.queries)
    records = _load_queries(paths)
    if not records:
        raise MalformedInputError("query files hold no features")
    topks = _int_list(args.topk)
    if args.granularity == "target":
        queries = [((r.video_id, r.target_id), r.feature) for r in records]
    else:
        queries = [(r.video_id, r.feature) for r in records]
    acc = {k: db.evaluate(queries, k, args.granularity) for k in topks}
    result = ExperimentResult("eval", args.granularity, len(queries), acc)
    if args.out:
        write_results(args.out, [result], {"db": str(args.db), "queries": paths})
    sys.stdout.write(format_table([result], topks))


def cmd_experiment(args):
    points = _int_list(args.points)
    topks = _int_list(args.topk)
    config = PipelineConfig(sample=SampleConfig(point_count=max(points), seed=args.db_seed, time_scale=args.tau))
    edits = args.edits
    if edits not in ("all", "none", ""):
        edits = [e for e in edits.split(";") if e]
    results = run_experiment(args.corpus, points, edits, topks, db_seed=args.db_seed, query_seed=args.query_seed,
                             config=config, workers=args.workers)
    out = args.out or str(Path(args.corpus) / "results.jsonl")
    write_results(out, results, {"corpus": str(args.corpus), "db_seed": args.db_seed, "query_seed": args.query_seed})
    sys.stdout.write(format_table(results, topks))
    print(f"results written to {out}")


def build_parser():
    p = argparse.ArgumentParser(prog="contourfp", description="Contour point-cloud fingerprints for mask videos.")
    p.add_argument("-v", "--verbose", action="store_true")
    # also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, parents=[common], **kw)

    s = sub.add_parser("synth", help="generate a synthetic mask corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--videos", type=int, required=True)
    s.add_argument("--shapes", default="3-5")
    s.add_argument("--frames", default="60-120")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--width", type=int, default=192)
    s.add_argument("--height", type=int, default=144)
    s.set_defaults(fn=cmd_synth)

    s = sub.add_parser("edit", help="apply one edit to a mask file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--op", required=True, help="NAME or NAME:p1,p2,...")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_edit)

    s = sub.add_parser("extract", help="mask file -> feature file")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--points", type=int, default=3072)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tau", type=float, default=None, help="frame spacing; default (W+H)/(2N)")
    s.add_argument("--out", required=True)
    s.add_argument("--primary-only", action="store_true")
    s.add_argument("--iou", type=float, default=0.3)
    s.add_argument("--max-age", type=int, default=3)
    s.add_argument("--min-hits", type=int, default=1)
    s.set_defaults(fn=cmd_extract)

    db = sub.add_parser("db", help="database build and query")
    dbsub = db.add_subparsers(dest="db_command", required=True)
    _add_db = dbsub.add_parser
    dbsub.add_parser = lambda *a, **kw: _add_db(*a, parents=[common], **kw)
    s = dbsub.add_parser("build")
    s.add_argument("--features", required=True, help="glob of feature files")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_db_build)
    s = dbsub.add_parser("query")
    s.add_argument("--db", required=True)
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--topk", type=int, default=5)
    s.set_defaults(fn=cmd_db_query)

    s = sub.add_parser("eval", help="Top-k accuracy of query files against a database")
    s.add_argument("--db", required=True)
    s.add_argument("--queries", required=True, help="glob of feature files")
    s.add_argument("--topk", default="1,5")
    s.add_argument("--granularity", choices=("video", "target"), default="video")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("experiment", help="point-count sweep and edit robustness on a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--points", default=",".join(map(str, DEFAULT_POINT_COUNTS)))
    s.add_argument("--edits", default="all", help="'all', 'none', or ';'-separated edit specs")
    s.add_argument("--topk", default="1,5")
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--db-seed", type=int, default=1)
    s.add_argument("--query-seed", type=int, default=2)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_experiment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.fn(args)
    except IncompatibleVersionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except (ContourFPError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
