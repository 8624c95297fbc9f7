"""Command-line entry point: ``dpdeid {deid,verify,recognize,inspect-db}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .annotation import AnnotationError, EntityLabel, dumps_annotated, load_annotated, pattern_recognize, AnnotatedDocument
from .config import ConfigError, PipelineConfig
from .dpcore import RandomSource, check_epsilon
from .geoloc import LocationDbError, load_location_db
from .rewrite import SanitizationError, SurrogatePool, audit_report, sanitize_document
from .temporal import LocaleConfig

log = logging.getLogger("dpdeid")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _safe_name(doc_id: str) -> str:
    return re.sub(r"[^\w.\-]", "_", doc_id)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file; flags override it")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--reference-date", dest="reference_date")
    p.add_argument("--locale", choices=["fr", "en"])
    p.add_argument("--day-month-order", dest="day_month_order", choices=["dmy", "mdy"])
    p.add_argument("--locations-db", dest="locations_db")
    p.add_argument("--features", dest="feature_columns", type=lambda s: [c.strip() for c in s.split(",") if c.strip()],
                   help="comma-separated feature column names")
    p.add_argument("--k", type=int)
    p.add_argument("--geo-threshold-km", dest="geo_threshold_km", type=float)
    p.add_argument("--restore-order", dest="restore_order", action="store_true", default=None)
    p.add_argument("--age-cap", dest="age_cap", type=int)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=None)
    mode.add_argument("--lenient", dest="strict", action="store_false")
    p.add_argument("--workers", type=int)
    p.add_argument("--in", dest="input_dir")
    p.add_argument("--out", dest="output_dir")


_CONFIG_KEYS = ("epsilon", "seed", "reference_date", "locale", "day_month_order", "locations_db",
                "feature_columns", "k", "geo_threshold_km", "restore_order", "age_cap", "strict",
                "workers", "input_dir", "output_dir")


def build_config(args) -> PipelineConfig:
    base = PipelineConfig.from_file(args.config) if getattr(args, "config", None) else PipelineConfig()
    return base.override(**{k: getattr(args, k, None) for k in _CONFIG_KEYS})


def _load_batch(input_dir: Path):
    docs = []
    for path in sorted(input_dir.glob("*.json")):
        with path.open("rb") as fh:
            try:
                docs.append(load_annotated(fh))
            except AnnotationError as exc:
                raise AnnotationError(f"{path.name}: {exc}") from None
    seen = set()
    for d in docs:
        if d.doc_id in seen:
            raise AnnotationError(f"duplicate doc_id {d.doc_id!r} in batch")
        seen.add(d.doc_id)
    return docs


def run_deid(config: PipelineConfig, out=None) -> int:
    out = out or sys.stdout
    if not config.input_dir or not config.output_dir:
        print("error: --in and --out are required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        docs = _load_batch(Path(config.input_dir))
    except (AnnotationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL

    db = None
    needs_db = any(s.label is EntityLabel.LOC for d in docs for s in d.spans)
    if config.locations_db:
        try:
            with open(config.locations_db, encoding="utf-8", newline="") as fh:
                db = load_location_db(fh, config.feature_columns)
        except (OSError, LocationDbError) as exc:
            print(f"error: location database: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    elif needs_db:
        print("error: LOC spans present but no location database configured (--locations-db)", file=sys.stderr)
        return EXIT_CONFIG

    pools = SurrogatePool.default()

    def work(doc: AnnotatedDocument):
        sdoc = sanitize_document(doc, db, pools, config, RandomSource(config.seed, doc.doc_id))
        return doc, sdoc

    try:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, docs))
    except (SanitizationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL

    out_dir = Path(config.output_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    try:
        tmp = Path(tempfile.mkdtemp(prefix=".dpdeid-", dir=out_dir.parent))
        for doc, sdoc in results:
            stem = _safe_name(doc.doc_id)
            (tmp / f"{stem}.txt").write_text(sdoc.text, encoding="utf-8")
            (tmp / f"{stem}.replacements.json").write_text(
                json.dumps(sdoc.to_sidecar(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
            (tmp / f"{stem}.audit.json").write_text(
                json.dumps(audit_report(sdoc), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        out_dir.mkdir(parents=True, exist_ok=True)
        for f in sorted(tmp.iterdir()):
            os.replace(f, out_dir / f.name)
        shutil.rmtree(tmp, ignore_errors=True)
    except OSError as exc:
        print(f"error: writing outputs: {exc}", file=sys.stderr)
        return EXIT_FAIL

    n_spans = sum(len(d.spans) for d, _ in results)
    n_warn = sum(len(s.warnings) for _, s in results)
    print(f"sanitized {len(results)} document(s), {n_spans} span(s), {n_warn} warning(s) -> {out_dir}", file=out)
    return EXIT_OK


def run_verify(epsilons=None, seed: int = 0, inject_failure: bool = False, report_path=None,
               sampler_n: int = 100_000, out=None) -> int:
    out = out or sys.stdout
    from .verify import run_all

    if epsilons is not None:
        try:
            epsilons = [check_epsilon(e) for e in epsilons]
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    kwargs = {"epsilons": epsilons} if epsilons else {}
    report = run_all(seed=seed, inject_failure=inject_failure, sampler_n=sampler_n, **kwargs)
    for r in report["checks"]:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status}  {r['mechanism']:<28} eps={r['epsilon']:<5g} worst excess {r['worst_excess']:+.3e}", file=out)
    for r in report["negative_controls"]:
        status = "ok (fails as expected)" if not r["passed"] else "UNEXPECTED PASS"
        print(f"{status}  control {r['mechanism']} worst excess {r['worst_excess']:+.3e}", file=out)
    s = report["sampler"]
    print(f"{'PASS' if s['ks_pass'] and s['variance_pass'] else 'FAIL'}  sampler n={s['n']} "
          f"KS={s['ks_statistic']:.4f} (crit {s['ks_critical']:.4f}) var={s['variance']:.4f} "
          f"(target {s['variance_target']:g})", file=out)
    if report_path:
        Path(report_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print("all checks passed" if report["passed"] else "verification FAILED", file=out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def run_recognize(args, out=None) -> int:
    out = out or sys.stdout
    text = Path(args.input).read_text(encoding="utf-8") if args.input != "-" else sys.stdin.read()
    locale = LocaleConfig(args.locale or "fr", args.day_month_order or "dmy")
    spans = pattern_recognize(text, locale)
    doc = AnnotatedDocument(args.doc_id or Path(args.input).stem or "stdin", text, tuple(spans))
    out.write(dumps_annotated(doc))
    return EXIT_OK


def run_inspect_db(args, out=None) -> int:
    out = out or sys.stdout
    try:
        with open(args.path, encoding="utf-8", newline="") as fh:
            db = load_location_db(fh, args.features)
    except (OSError, LocationDbError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{len(db)} locations, {db.n_features} feature(s)", file=out)
    for name, (lo, hi) in zip(db.feature_names, db.bounds):
        print(f"  {name}: min {lo:g}, max {hi:g}", file=out)
    for w in db.warnings:
        print(f"  warning: {w}", file=out)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpdeid", description="d-private surrogate generation for annotated clinical text")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    deid = sub.add_parser("deid", help="sanitize a directory of standoff-annotated documents")
    _add_pipeline_flags(deid)

    ver = sub.add_parser("verify", help="check the privacy inequalities analytically")
    ver.add_argument("--epsilon", type=float, action="append",
                     help="privacy parameter to check (repeatable; default 0.1 0.5 1 2 5)")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--inject-control", action="store_true",
                     help="run the positive checks against broken mechanisms (must fail)")
    ver.add_argument("--report", help="write the structured report to this JSON file")
    ver.add_argument("--samples", type=int, default=100_000)

    rec = sub.add_parser("recognize", help="pattern-based DATE/AGE/TEL recognizer")
    rec.add_argument("input", help="plain-text file, or - for stdin")
    rec.add_argument("--doc-id")
    rec.add_argument("--locale", choices=["fr", "en"])
    rec.add_argument("--day-month-order", choices=["dmy", "mdy"])

    ins = sub.add_parser("inspect-db", help="summarize a location database")
    ins.add_argument("path")
    ins.add_argument("--features", type=lambda s: [c.strip() for c in s.split(",") if c.strip()])
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "deid":
        try:
            config = build_config(args)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return run_deid(config)
    if args.command == "verify":
        return run_verify(args.epsilon, args.seed, args.inject_control, args.report, args.samples)
    if args.command == "recognize":
        return run_recognize(args)
    return run_inspect_db(args)


if __name__ == "__main__":
    sys.exit(main())
