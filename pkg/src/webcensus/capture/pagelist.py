"""Page corpus construction from recorded search-result sets."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..errors import MalformedUri
from ..uri import extension_token, normalize_page_uri, parse_uri

log = logging.getLogger(__name__)

DEFAULT_BINARY_EXTENSIONS = frozenset({"pdf", "doc", "xls", "docx", "xlsx", "ppt", "pptx"})
MAX_RANK = 50


@dataclass(frozen=True)
class SearchResult:
    term: str
    rank: int
    uri: str
    provenance: str = ""


@dataclass(frozen=True)
class PageListEntry:
    normalized_uri: str
    source_term: str
    rank: int
    provenance: str


@dataclass
class PageList:
    entries: list[PageListEntry] = field(default_factory=list)
    malformed: int = 0
    binary: int = 0
    duplicates: int = 0
    out_of_range: int = 0

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def build_page_list(result_sets: Iterable[SearchResult],
                    binary_extensions=DEFAULT_BINARY_EXTENSIONS) -> PageList:
    """Normalize, deduplicate (lowest rank wins) and drop binary documents.

    Output is ordered by (term, rank, uri) so identical input yields an
    identical list regardless of input order.
    """
    out = PageList()
    best: dict[str, PageListEntry] = {}
    for result in result_sets:
        if not 1 <= int(result.rank) <= MAX_RANK:
            out.out_of_range += 1
            continue
        try:
            key = normalize_page_uri(result.uri)
            ext = extension_token(parse_uri(key).path)
        except MalformedUri:
            out.malformed += 1
            continue
        if ext in binary_extensions:
            out.binary += 1
            continue
        entry = PageListEntry(key, result.term, int(result.rank), result.provenance)
        prior = best.get(key)
        if prior is not None:
            out.duplicates += 1
            if (entry.rank, entry.source_term, entry.provenance) >= (prior.rank, prior.source_term, prior.provenance):
                continue
        best[key] = entry
    out.entries = sorted(best.values(), key=lambda e: (e.source_term, e.rank, e.normalized_uri))
    if out.malformed:
        log.warning("dropped %d malformed search results", out.malformed)
    return out


def read_result_set(path) -> list[SearchResult]:
    """Tab-separated ``term, rank, uri`` records; extra columns (title) ignored."""
    path = Path(path)
    results = []
    with path.open(encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE):
            if not row or row[0].startswith("#") or len(row) < 3:
                continue
            try:
                rank = int(row[1])
            except ValueError:
                continue
            results.append(SearchResult(row[0].strip(), rank, row[2].strip(), path.stem))
    return results


def write_page_list(page_list: PageList, path) -> Path:
    """Write URIs one per line plus ``<name>.provenance.tsv`` alongside."""
    path = Path(path)
    path.write_text("".join(e.normalized_uri + "\n" for e in page_list), encoding="utf-8")
    sidecar = path.with_suffix(".provenance.tsv")
    with sidecar.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["uri", "term", "rank", "provenance"])
        for e in page_list:
            writer.writerow([e.normalized_uri, e.source_term, e.rank, e.provenance])
    return sidecar


def read_page_list(path) -> list[PageListEntry]:
    path = Path(path)
    sidecar = path.with_suffix(".provenance.tsv")
    meta = {}
    if sidecar.exists():
        with sidecar.open(encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh, delimiter="\t"):
                meta[row["uri"]] = row
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        uri = line.strip()
        if not uri or uri.startswith("#"):
            continue
        row = meta.get(uri, {})
        entries.append(PageListEntry(uri, row.get("term", ""), int(row.get("rank") or 1), row.get("provenance", "")))
    return entries
