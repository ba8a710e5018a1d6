"""``webcensus`` command line: one subcommand per pipeline stage."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import ENV_PREFIX, print_effective_config, resolve_config
from .errors import CensusError
from .pipeline import StageError, run_pipeline

log = logging.getLogger("webcensus")

CONFIG_FLAGS = [
    ("--settle-seconds", int, "seconds to let a page settle after navigation (default 30)"),
    ("--hard-timeout-seconds", int, "per-page hard timeout (default 60)"),
    ("--parallel-captures", int, "concurrent browser captures (default 4)"),
    ("--top-n", int, "elements in the top-element table and histogram (default 100)"),
    ("--sample-n", int, "URIs in the leakage sample (default 500)"),
    ("--seed", int, "seed for the leakage sample (default 0)"),
    ("--browser", str, "remote-debugging endpoint host:port or ws:// URL"),
    ("--ruleset", str, "public suffix list file (default: bundled snapshot)"),
    ("--ownership-db", str, "ownership YAML (default: bundled snapshot)"),
    ("--lexicon", str, "sensitive-term lexicon (default: bundled)"),
    ("--run-dir", str, "run directory (default: <runs-root>/<timestamp>-<config digest>)"),
    ("--runs-root", str, "parent of generated run directories (default runs)"),
    ("--pagelist", str, "page list to scan (default: <run-dir>/pagelist.txt)"),
    ("--records", str, "record log path (default: <run-dir>/records.jsonl)"),
    ("--binary-extensions", str, "comma-separated extensions dropped from page lists"),
    ("--dynamic-extensions", str, "comma-separated extensions classed as Dynamic Page"),
]


def _common(parser):
    parser.add_argument("--config", help=f"YAML config file (or ${ENV_PREFIX}CONFIG)")
    for flag, kind, help_text in CONFIG_FLAGS:
        parser.add_argument(flag, type=kind, default=None, help=help_text)
    parser.add_argument("--include-private-suffixes", action="store_const", const=True, default=None,
                        help="also apply the PRIVATE section of the suffix list")
    parser.add_argument("--leakage-include-host", action="store_const", const=True, default=None,
                        help="match lexicon terms in the host name too")
    parser.add_argument("--tolerant", action="store_const", const=True, default=None,
                        help="skip corrupt record-log lines instead of failing")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="webcensus", description="Third-party request census over health web pages.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pagelist", help="build a deduplicated page list from search-result TSV files")
    p.add_argument("--results", nargs="+", help="term<TAB>rank<TAB>uri files")
    _common(p)

    p = sub.add_parser("scan", help="capture pages through a headless browser into HAR files")
    _common(p)

    p = sub.add_parser("analyze", help="classify HAR captures into a record log")
    p.add_argument("--har", nargs="+", help="HAR files or directories (default: <run-dir>/har)")
    _common(p)

    p = sub.add_parser("report", help="summarize a record log into JSON and CSV tables")
    _common(p)

    p = sub.add_parser("run", help="run several stages in order")
    p.add_argument("stages", nargs="+", choices=["pagelist", "scan", "analyze", "report"])
    p.add_argument("--results", nargs="+")
    p.add_argument("--har", nargs="+")
    _common(p)

    p = sub.add_parser("leakage", help="sample page URIs and report sensitive-term share")
    p.add_argument("--uris", help="file with one page URI per line (instead of a record log)")
    p.add_argument("--show-matches", action="store_true", help="print per-URI verdicts")
    _common(p)

    p = sub.add_parser("config", help="print the effective configuration with origins")
    _common(p)
    return parser


def _flags(args) -> dict:
    skip = {"command", "config", "verbose", "stages", "uris", "show_matches"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _leakage(cfg, args) -> int:
    from .leakage import assess_sample, detect_sensitive, load_lexicon
    from .store import read_records

    lexicon = load_lexicon(cfg.lexicon)
    if args.uris:
        with open(args.uris, encoding="utf-8") as fh:
            pages = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    else:
        if not cfg.records:
            raise CensusError("leakage needs --records or --uris")
        pages = [r for r in read_records(cfg.records, cfg.tolerant).records if r.loaded]
    report = assess_sample(pages, cfg.sample_n, cfg.seed, lexicon, cfg.leakage_include_host)
    doc = {k: (str(v) if not isinstance(v, (int, bool, str)) else v) for k, v in vars(report).items()}
    print(json.dumps(doc, sort_keys=True, indent=2))
    if args.show_matches:
        for page in pages:
            uri = page if isinstance(page, str) else page.final_uri
            verdict = detect_sensitive(uri, lexicon, cfg.leakage_include_host)
            print(f"{int(verdict.sensitive)}\t{uri}\t{' | '.join(t for t, _ in verdict.matches)}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(_flags(args), args.config or os.environ.get(ENV_PREFIX + "CONFIG"))
        if args.command == "config":
            sys.stdout.write(print_effective_config(cfg))
            return 0
        if args.command == "leakage":
            return _leakage(cfg, args)
        stages = args.stages if args.command == "run" else [args.command]
        result = run_pipeline(cfg, stages)
    except StageError as exc:
        print(f"error [{exc.stage}] {exc}", file=sys.stderr)
        return 1
    except (CensusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for stage, paths in result.artifacts.items():
        log.info("%s: %d artifact(s) in %s", stage, len(paths), result.run_dir)
    print(result.run_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
