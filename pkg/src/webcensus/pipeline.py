"""Stage orchestration: pagelist -> scan -> analyze -> report.

Each stage reads its predecessor's artifact from the run directory, so
``analyze`` and ``report`` run offline from HAR files alone.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .capture.har import iter_har_paths, read_har_file, to_har
from .capture.pagelist import build_page_list, read_page_list, read_result_set, write_page_list
from .census import accumulate, build_record
from .config import RunConfig
from .errors import CaptureError, CensusError, MissingInput, VersionMismatch
from .leakage import assess_sample, load_lexicon
from .ownership import load_owner_db_file
from .store import export_summary, read_records, write_records
from .uri import load_ruleset

log = logging.getLogger(__name__)

STAGES = ("pagelist", "scan", "analyze", "report")
PAGELIST_FILE = "pagelist.txt"
HAR_DIR = "har"
RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.json"
TABLES_DIR = "tables"


class StageError(CensusError):
    def __init__(self, stage: str, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.stage = stage
        self.code = code


@dataclass
class RunResult:
    run_dir: Path
    artifacts: dict[str, list[Path]] = field(default_factory=dict)


def resolve_run_dir(cfg: RunConfig) -> Path:
    if cfg.run_dir:
        return Path(cfg.run_dir)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    return Path(cfg.runs_root) / f"{stamp}-{cfg.digest()}"


@dataclass
class Resources:
    """Versioned reference data loaded once per run."""
    cfg: RunConfig
    _ruleset: object = None
    _db: object = None
    _lexicon: object = None

    @property
    def ruleset(self):
        if self._ruleset is None:
            self._ruleset = load_ruleset(self.cfg.ruleset, self.cfg.include_private_suffixes)
        return self._ruleset

    @property
    def db(self):
        if self._db is None:
            self._db = load_owner_db_file(self.cfg.ownership_db)
        return self._db

    @property
    def lexicon(self):
        if self._lexicon is None:
            self._lexicon = load_lexicon(self.cfg.lexicon)
        return self._lexicon

    def provenance(self) -> dict[str, str]:
        return {"ruleset": self.ruleset.snapshot_id, "ownership_db": self.db.version,
                "lexicon": self.lexicon.source_id}


def stage_pagelist(cfg: RunConfig, run_dir: Path) -> list[Path]:
    if not cfg.results:
        raise MissingInput("pagelist needs at least one --results file")
    results = []
    for path in cfg.results:
        if not Path(path).exists():
            raise MissingInput(f"result set {path} not found")
        results.extend(read_result_set(path))
    pages = build_page_list(results, frozenset(cfg.binary_extensions))
    out = run_dir / PAGELIST_FILE
    sidecar = write_page_list(pages, out)
    log.info("page list: %d pages (%d duplicates, %d binary, %d malformed dropped)",
             len(pages), pages.duplicates, pages.binary, pages.malformed)
    return [out, sidecar]


def stage_scan(cfg: RunConfig, run_dir: Path) -> list[Path]:
    from .capture.live import CaptureSettings, capture_live, probe_endpoint

    source = Path(cfg.pagelist) if cfg.pagelist else run_dir / PAGELIST_FILE
    if not source.exists():
        raise MissingInput(f"page list {source} not found")
    entries = read_page_list(source)
    settings = CaptureSettings(cfg.browser, cfg.settle_seconds, cfg.hard_timeout_seconds)
    try:
        probe_endpoint(cfg.browser)
    except CaptureError as exc:
        raise StageError("scan", f"capture:{exc.reason}", str(exc)) from None
    har_dir = run_dir / HAR_DIR
    har_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=cfg.parallel_captures) as pool:
        results = list(pool.map(lambda e: capture_live(e, settings), entries))
    written = []
    for i, result in enumerate(results, start=1):
        path = har_dir / f"page_{i:06d}.har"
        path.write_text(json.dumps(to_har([result]), sort_keys=True), encoding="utf-8")
        written.append(path)
    if results and all(r.error_reason == "endpoint" for r in results):
        raise StageError("scan", "capture:endpoint", "browser endpoint lost during scan")
    return written


def stage_analyze(cfg: RunConfig, run_dir: Path, res: Resources) -> list[Path]:
    sources = cfg.har or ((run_dir / HAR_DIR),)
    paths = iter_har_paths(sources)
    missing = [p for p in paths if not Path(p).exists()]
    if not paths or missing:
        raise MissingInput(f"no HAR input at {', '.join(map(str, missing or sources))}")
    dynamic = frozenset(cfg.dynamic_extensions)
    records = []
    for path in paths:
        for result in read_har_file(path):
            records.append(build_record(result, res.ruleset, dynamic))
    out = Path(cfg.records) if cfg.records else run_dir / RECORDS_FILE
    out.parent.mkdir(parents=True, exist_ok=True)
    count = write_records(records, out, res.provenance())
    log.info("analyzed %d pages from %d HAR files", count, len(paths))
    return [out]


def check_provenance(recorded: dict[str, str], current: dict[str, str]) -> None:
    for key, value in current.items():
        if recorded.get(key) != value:
            raise VersionMismatch(f"{key}: record log built with {recorded.get(key)!r}, current is {value!r}")


def stage_report(cfg: RunConfig, run_dir: Path, res: Resources) -> list[Path]:
    source = Path(cfg.records) if cfg.records else run_dir / RECORDS_FILE
    if not source.exists():
        raise MissingInput(f"record log {source} not found")
    record_log = read_records(source, tolerant=cfg.tolerant)
    provenance = res.provenance()
    check_provenance(record_log.provenance, provenance)
    acc = accumulate(record_log.records, cfg.top_n, res.db, provenance)
    summary = acc.finalize()
    loaded = [r for r in record_log.records if r.loaded]
    leakage = assess_sample(loaded, cfg.sample_n, cfg.seed, res.lexicon, cfg.leakage_include_host)
    summary = replace(summary, leakage=leakage)
    written = export_summary(summary, "json", run_dir / SUMMARY_FILE)
    written += export_summary(summary, "csv", run_dir / TABLES_DIR)
    return written


def run_pipeline(cfg: RunConfig, stages) -> RunResult:
    """Run the requested stages in canonical order; errors carry the stage name."""
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages: {', '.join(sorted(unknown))}")
    run_dir = resolve_run_dir(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)
    res = Resources(cfg)
    out = RunResult(run_dir)
    for stage in STAGES:
        if stage not in stages:
            continue
        log.info("stage %s -> %s", stage, run_dir)
        try:
            if stage == "pagelist":
                out.artifacts[stage] = stage_pagelist(cfg, run_dir)
            elif stage == "scan":
                out.artifacts[stage] = stage_scan(cfg, run_dir)
            elif stage == "analyze":
                out.artifacts[stage] = stage_analyze(cfg, run_dir, res)
            else:
                out.artifacts[stage] = stage_report(cfg, run_dir, res)
        except StageError:
            raise
        except CensusError as exc:
            raise StageError(stage, f"{stage}:{type(exc).__name__}", str(exc)) from exc
    return out
