"""Record log and summary serialization.

The record log is JSON Lines: a header object first, then one census
record per line sorted by page URI. Summaries export as one JSON document
or as a directory of CSV tables. All output is byte-deterministic.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

from .capture.models import LoadStatus
from .census import CATEGORY_ROWS, CensusRecord, CensusSummary
from .classify import ElementRecord, PageFlags
from .errors import CorruptLine, SchemaError, SchemaVersionMismatch
from .percent import as_2dp, as_int
from .uri import ElementKind, ExtensionClass, TldCategory, TldKind

log = logging.getLogger(__name__)

SCHEMA_VERSION = "webcensus.records/1"
SUMMARY_SCHEMA = "webcensus.summary/1"
PROVENANCE_KEYS = ("ruleset", "ownership_db", "lexicon")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def record_to_dict(rec: CensusRecord) -> dict:
    return {
        "page_uri": rec.page_uri,
        "final_uri": rec.final_uri,
        "tld": {"kind": rec.tld_category.kind.value, "label": rec.tld_category.label},
        "load_status": rec.load_status.value,
        "error_reason": rec.error_reason,
        "flags": None if rec.flags is None else [rec.flags.has_third_party_request,
                                                 rec.flags.has_third_party_javascript,
                                                 rec.flags.has_third_party_cookie],
        "third_party_domains": list(rec.third_party_domains),
        "third_party_cookie_domains": list(rec.third_party_cookie_domains),
        "elements": [[e.stripped_uri, e.extension_class.kind.value, e.extension_class.ext,
                      e.request_registrable_domain] for e in rec.elements],
        "https": rec.https,
        "diagnostics": dict(rec.diagnostics),
    }


def record_from_dict(d: dict) -> CensusRecord:
    flags = d["flags"]
    return CensusRecord(
        page_uri=d["page_uri"],
        final_uri=d["final_uri"],
        tld_category=TldCategory(TldKind(d["tld"]["kind"]), d["tld"]["label"]),
        load_status=LoadStatus(d["load_status"]),
        flags=None if flags is None else PageFlags(*map(bool, flags)),
        third_party_domains=tuple(d["third_party_domains"]),
        elements=tuple(ElementRecord(uri, ExtensionClass(ElementKind(kind), ext), dom)
                       for uri, kind, ext, dom in d["elements"]),
        https=bool(d["https"]),
        error_reason=d.get("error_reason"),
        third_party_cookie_domains=tuple(d.get("third_party_cookie_domains", ())),
        diagnostics=tuple(sorted(d.get("diagnostics", {}).items())),
    )


def make_header(provenance: dict[str, str] | None = None) -> dict:
    header = {"schema_version": SCHEMA_VERSION}
    for key in PROVENANCE_KEYS:
        header[key] = (provenance or {}).get(key, "")
    return header


def write_records(records, destination, provenance: dict[str, str] | None = None) -> int:
    """Write the header and records sorted by page URI; returns the record count."""
    ordered = sorted(records, key=lambda r: (r.page_uri, r.final_uri))
    lines = [_dumps(make_header(provenance))]
    for rec in ordered:
        try:
            lines.append(_dumps(record_to_dict(rec)))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"cannot serialize record {rec.page_uri!r}: {exc}") from exc
    Path(destination).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return len(ordered)


@dataclass
class RecordLog:
    header: dict
    records: list[CensusRecord] = field(default_factory=list)
    corrupt: int = 0

    @property
    def provenance(self) -> dict[str, str]:
        return {k: self.header.get(k, "") for k in PROVENANCE_KEYS}


def read_records(source, tolerant: bool = False) -> RecordLog:
    """Parse a record log; corrupt lines raise unless ``tolerant`` (then skipped and counted)."""
    with open(source, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(f"{source}: empty record log (no header)")
    try:
        header = json.loads(lines[0])
    except ValueError:
        raise SchemaError(f"{source}: unreadable header line") from None
    if not isinstance(header, dict) or header.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"{source}: schema {header.get('schema_version') if isinstance(header, dict) else header!r}, expected {SCHEMA_VERSION}")
    out = RecordLog(header)
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            out.records.append(record_from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            if not tolerant:
                raise CorruptLine(number, str(exc)) from None
            log.warning("skipping corrupt record at line %d: %s", number, exc)
            out.corrupt += 1
    return out


# --- summary export ------------------------------------------------------


def _num(value: Decimal) -> float:
    return float(as_2dp(value))


def summary_to_dict(summary: CensusSummary) -> dict:
    doc = {
        "schema_version": SUMMARY_SCHEMA,
        "provenance": dict(summary.provenance),
        "pages_total": summary.pages_total,
        "pages_loaded": summary.pages_loaded,
        "per_category": {
            key: {"pages": row.pages,
                  "pct_third_party_requests": _num(row.pct_third_party_requests),
                  "pct_third_party_js": _num(row.pct_third_party_js),
                  "pct_third_party_cookies": _num(row.pct_third_party_cookies)}
            for key, row in summary.per_category.items()
        },
        "extension_histogram": {k.value: v for k, v in summary.extension_histogram.items()},
        "top_n": summary.top_n,
        "top_elements": [{"stripped_uri": e.stripped_uri, "class": e.extension_class.kind.value,
                          "ext": e.extension_class.ext, "pages": e.pages, "pct_pages": _num(e.percent)}
                         for e in summary.top_elements],
        "owner_ranking": [{"rank": i, "owner": s.owner_id, "display_name": s.display_name,
                           "revenue_model": s.revenue_model, "pages": s.pages, "pct_pages": _num(s.percent)}
                          for i, s in enumerate(summary.owner_ranking, start=1)],
        "unattributed": {"pages": summary.unattributed_pages, "pct_pages": _num(summary.unattributed_percent)},
        "https_share": _num(summary.https_share),
        "load_failures": dict(summary.load_failures),
        "diagnostics": dict(summary.diagnostics),
    }
    if summary.leakage is not None:
        rep = summary.leakage
        doc["leakage"] = {"population_size": rep.population_size, "sample_size": rep.sample_size,
                          "seed": rep.seed, "sensitive_count": rep.sensitive_count,
                          "sensitive_share": _num(rep.sensitive_share), "https_share": _num(rep.https_share),
                          "clamped": rep.clamped, "generator": rep.generator,
                          "lexicon": rep.lexicon_source}
    return doc


def _csv_text(provenance: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in sorted(provenance.items())) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def summary_tables(summary: CensusSummary) -> dict[str, str]:
    """CSV tables keyed by file name. Every file starts with a ``#`` provenance line."""
    prov = summary.provenance
    tables = {}
    tables["prevalence_by_tld.csv"] = _csv_text(
        prov, ["category", "pages", "pct_third_party_requests", "pct_third_party_js", "pct_third_party_cookies"],
        [[key, row.pages, as_int(row.pct_third_party_requests), as_int(row.pct_third_party_js),
          as_int(row.pct_third_party_cookies)]
         for key in CATEGORY_ROWS if (row := summary.per_category.get(key))])
    tables["extension_histogram.csv"] = _csv_text(
        prov, ["type", "pct"], [[k.value, v] for k, v in summary.extension_histogram.items()])
    owner_rows = [[s.owner_id, as_int(s.percent)] for s in summary.owner_ranking]
    if summary.owner_ranking:
        owner_rows.append(["unattributed", as_int(summary.unattributed_percent)])
    tables["owner_ranking.csv"] = _csv_text(prov, ["owner", "pct_pages"], owner_rows)
    tables["owner_details.csv"] = _csv_text(
        prov, ["rank", "owner", "display_name", "revenue_model", "pages", "pct_pages"],
        [[i, s.owner_id, s.display_name, s.revenue_model, s.pages, as_2dp(s.percent)]
         for i, s in enumerate(summary.owner_ranking, start=1)])
    tables["top_elements.csv"] = _csv_text(
        prov, ["rank", "stripped_uri", "class", "pages", "pct_pages"],
        [[i, e.stripped_uri, e.extension_class.kind.value, e.pages, as_2dp(e.percent)]
         for i, e in enumerate(summary.top_elements, start=1)])
    tables["load_failures.csv"] = _csv_text(prov, ["status", "pages"], [[k, v] for k, v in summary.load_failures.items()])
    leak_rows = [["https_share", as_2dp(summary.https_share)]]
    if summary.leakage is not None:
        rep = summary.leakage
        leak_rows += [["population_size", rep.population_size], ["sample_size", rep.sample_size],
                      ["seed", rep.seed], ["sensitive_count", rep.sensitive_count],
                      ["sensitive_share", as_2dp(rep.sensitive_share)], ["generator", rep.generator]]
    tables["leakage.csv"] = _csv_text(prov, ["metric", "value"], leak_rows)
    return tables


def export_summary(summary: CensusSummary, format: str, destination) -> list[Path]:
    """``json`` writes one file at ``destination``; ``csv`` writes a table set into that directory."""
    destination = Path(destination)
    if format == "json":
        destination.write_text(json.dumps(summary_to_dict(summary), sort_keys=True, indent=2,
                                          ensure_ascii=False) + "\n", encoding="utf-8")
        return [destination]
    if format == "csv":
        destination.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in summary_tables(summary).items():
            path = destination / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
        return written
    raise ValueError(f"unknown summary format {format!r}")


def read_csv_table(path) -> list[list[str]]:
    """Rows of an exported table without the provenance comment, header first."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))
