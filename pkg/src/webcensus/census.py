"""Corpus statistics: prevalence by TLD category, top elements, owner reach.

Aggregation goes through :class:`CensusAccumulator`, a mergeable bag of
counts; percentages appear only when an accumulator is finalized, so
partial accumulators built by independent workers combine exactly.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable

from .capture.models import LoadStatus, PageLoadResult
from .classify import ElementRecord, PageFlags, analyze_page
from .errors import EmptyCorpus, MalformedUri, VersionMismatch
from .ownership import OwnershipDb, OwnerShare, owners_on_page, ranked_shares
from .percent import as_int, percent
from .uri import (DEFAULT_DYNAMIC_EXTENSIONS, ElementKind, ExtensionClass, PublicSuffixRuleset,
                  TldCategory, TldKind, default_ruleset, parse_uri, tld_category)

CATEGORY_ROWS = ("all", "com", "org", "gov", "edu", "other")
HISTOGRAM_ORDER = (ElementKind.NO_EXTENSION, ElementKind.JAVASCRIPT, ElementKind.IMAGE,
                   ElementKind.DYNAMIC_PAGE, ElementKind.OTHER)


@dataclass(frozen=True)
class CensusRecord:
    page_uri: str
    final_uri: str
    tld_category: TldCategory
    load_status: LoadStatus
    flags: PageFlags | None = None
    third_party_domains: tuple[str, ...] = ()
    elements: tuple[ElementRecord, ...] = ()
    https: bool = False
    error_reason: str | None = None
    third_party_cookie_domains: tuple[str, ...] = ()
    diagnostics: tuple[tuple[str, int], ...] = ()

    @property
    def loaded(self) -> bool:
        return self.load_status is LoadStatus.LOADED


def build_record(result: PageLoadResult, ruleset: PublicSuffixRuleset | None = None,
                 dynamic_extensions=DEFAULT_DYNAMIC_EXTENSIONS) -> CensusRecord:
    """Classify one captured page; Timeout/Error pages keep only their status."""
    basis = result.final_uri if result.loaded else (result.final_uri or result.requested_uri)
    try:
        parsed = parse_uri(basis)
        category, https = tld_category(parsed.host), parsed.scheme == "https"
    except MalformedUri:
        category, https = TldCategory(TldKind.OTHER, ""), False
    if not result.loaded:
        return CensusRecord(result.requested_uri, result.final_uri, category, result.status,
                            https=https, error_reason=result.error_reason)
    page = analyze_page(result, ruleset, dynamic_extensions)
    return CensusRecord(
        page_uri=result.requested_uri,
        final_uri=result.final_uri,
        tld_category=category,
        load_status=result.status,
        flags=page.flags,
        third_party_domains=tuple(sorted(page.third_party_domains)),
        elements=tuple(page.elements[k] for k in sorted(page.elements)),
        https=https,
        third_party_cookie_domains=tuple(sorted(page.third_party_cookie_domains)),
        diagnostics=tuple(sorted(page.diagnostics.items())),
    )


def extension_histogram(top_elements) -> dict[ElementKind, int]:
    """Integer share of each element class among ``top_elements``.

    Named classes round half-up; Other takes the residual so the total is
    exactly 100. Classes with no elements and no residual are omitted.
    """
    classes = [_extension_class(e).kind for e in top_elements]
    if not classes:
        raise ValueError("histogram of an empty element list")
    counts = Counter(classes)
    shares = {k: as_int(percent(counts[k], len(classes))) for k in HISTOGRAM_ORDER
              if k is not ElementKind.OTHER and counts[k]}
    residual = 100 - sum(shares.values())
    # Half-up rounding of several .5 shares can overshoot 100; shave the largest.
    while residual < 0:
        biggest = max(shares, key=lambda k: (shares[k], -HISTOGRAM_ORDER.index(k)))
        shares[biggest] -= 1
        residual += 1
    if residual or counts[ElementKind.OTHER]:
        shares[ElementKind.OTHER] = residual
    return {k: shares[k] for k in HISTOGRAM_ORDER if k in shares}


def _extension_class(item) -> ExtensionClass:
    if isinstance(item, ExtensionClass):
        return item
    if isinstance(item, ElementRecord):
        return item.extension_class
    return item.extension_class if hasattr(item, "extension_class") else item[1]


@dataclass(frozen=True)
class CategoryRow:
    pages: int
    pct_third_party_requests: Decimal
    pct_third_party_js: Decimal
    pct_third_party_cookies: Decimal


@dataclass(frozen=True)
class TopElement:
    stripped_uri: str
    extension_class: ExtensionClass
    pages: int
    percent: Decimal


@dataclass(frozen=True)
class CensusSummary:
    pages_total: int
    pages_loaded: int
    per_category: dict[str, CategoryRow]
    extension_histogram: dict[ElementKind, int]
    top_elements: tuple[TopElement, ...]
    owner_ranking: tuple[OwnerShare, ...]
    unattributed_pages: int
    unattributed_percent: Decimal
    https_share: Decimal
    load_failures: dict[str, int]
    diagnostics: dict[str, int]
    top_n: int
    provenance: dict[str, str] = field(default_factory=dict)
    leakage: object | None = None  # LeakageSampleReport, attached by the report stage


def _zero_row():
    return [0, 0, 0, 0]  # loaded, requests, js, cookies


@dataclass
class CensusAccumulator:
    top_n: int = 100
    provenance: dict[str, str] = field(default_factory=dict)
    db: OwnershipDb | None = None
    pages_total: int = 0
    pages_loaded: int = 0
    https_pages: int = 0
    categories: dict[str, list[int]] = field(default_factory=dict)
    element_pages: Counter = field(default_factory=Counter)
    element_classes: dict[str, ExtensionClass] = field(default_factory=dict)
    owner_pages: Counter = field(default_factory=Counter)
    unattributed_pages: int = 0
    load_failures: Counter = field(default_factory=Counter)
    diagnostics: Counter = field(default_factory=Counter)

    def add(self, record: CensusRecord) -> "CensusAccumulator":
        self.pages_total += 1
        if not record.loaded:
            reason = record.load_status.value
            if record.error_reason:
                reason += f":{record.error_reason}"
            self.load_failures[reason] += 1
            return self
        flags = record.flags or PageFlags()
        self.pages_loaded += 1
        self.https_pages += record.https
        kind = record.tld_category.kind.value
        for key in ("all", kind):
            row = self.categories.setdefault(key, _zero_row())
            row[0] += 1
            row[1] += flags.has_third_party_request
            row[2] += flags.has_third_party_javascript
            row[3] += flags.has_third_party_cookie
        for element in {e.stripped_uri: e for e in record.elements}.values():
            self.element_pages[element.stripped_uri] += 1
            self.element_classes[element.stripped_uri] = element.extension_class
        if self.db is not None:
            owners, unattributed = owners_on_page(record.third_party_domains, self.db)
            self.owner_pages.update(owners)
            self.unattributed_pages += unattributed
        self.diagnostics.update(dict(record.diagnostics))
        return self

    def extend(self, records: Iterable[CensusRecord]) -> "CensusAccumulator":
        for record in records:
            self.add(record)
        return self

    def empty_like(self) -> "CensusAccumulator":
        return CensusAccumulator(self.top_n, dict(self.provenance), self.db)

    def finalize(self) -> CensusSummary:
        if not self.pages_loaded:
            raise EmptyCorpus("no loaded pages to summarize")
        per_category = {}
        for key in CATEGORY_ROWS:
            loaded, req, js, ck = self.categories.get(key, _zero_row())
            if loaded:
                per_category[key] = CategoryRow(loaded, percent(req, loaded), percent(js, loaded), percent(ck, loaded))
        ranked = sorted(self.element_pages.items(), key=lambda kv: (-kv[1], kv[0]))[: self.top_n]
        top = tuple(TopElement(uri, self.element_classes[uri], pages, percent(pages, self.pages_loaded))
                    for uri, pages in ranked)
        owners = tuple(ranked_shares(self.owner_pages, self.pages_loaded, self.db)) if self.db else ()
        return CensusSummary(
            pages_total=self.pages_total,
            pages_loaded=self.pages_loaded,
            per_category=per_category,
            extension_histogram=extension_histogram(top) if top else {},
            top_elements=top,
            owner_ranking=owners,
            unattributed_pages=self.unattributed_pages,
            unattributed_percent=percent(self.unattributed_pages, self.pages_loaded),
            https_share=percent(self.https_pages, self.pages_loaded),
            load_failures=dict(sorted(self.load_failures.items())),
            diagnostics=dict(sorted(self.diagnostics.items())),
            top_n=self.top_n,
            provenance=dict(sorted(self.provenance.items())),
        )


def merge(a: CensusAccumulator, b: CensusAccumulator) -> CensusAccumulator:
    """Count-wise sum of two accumulators built under the same configuration."""
    if a.top_n != b.top_n or a.provenance != b.provenance:
        raise VersionMismatch(f"cannot merge accumulators: {a.provenance}/{a.top_n} vs {b.provenance}/{b.top_n}")
    if (a.db is None) != (b.db is None) or (a.db and b.db and a.db.version != b.db.version):
        raise VersionMismatch("accumulators built against different ownership databases")
    out = a.empty_like()
    for part in (a, b):
        out.pages_total += part.pages_total
        out.pages_loaded += part.pages_loaded
        out.https_pages += part.https_pages
        for key, row in part.categories.items():
            mine = out.categories.setdefault(key, _zero_row())
            for i, value in enumerate(row):
                mine[i] += value
        out.element_pages.update(part.element_pages)
        out.element_classes.update(part.element_classes)
        out.owner_pages.update(part.owner_pages)
        out.unattributed_pages += part.unattributed_pages
        out.load_failures.update(part.load_failures)
        out.diagnostics.update(part.diagnostics)
    return out


def accumulate(records: Iterable[CensusRecord], top_n: int = 100, db: OwnershipDb | None = None,
               provenance: dict[str, str] | None = None) -> CensusAccumulator:
    return CensusAccumulator(top_n, dict(provenance or {}), db).extend(records)


def summarize(records: Iterable[CensusRecord], top_n: int = 100, db: OwnershipDb | None = None,
              provenance: dict[str, str] | None = None) -> CensusSummary:
    """Prevalence = 100 * pages-with-flag / loaded pages, overall and per TLD category.

    Top elements are third-party argument-stripped URIs ranked by the number
    of distinct pages requesting them (ties lexicographic); the extension
    histogram covers the first ``top_n`` of them.
    """
    if top_n < 1:
        raise ValueError("top_n must be at least 1")
    return accumulate(records, top_n, db, provenance).finalize()


def records_from_results(results: Iterable[PageLoadResult], ruleset: PublicSuffixRuleset | None = None,
                         dynamic_extensions=DEFAULT_DYNAMIC_EXTENSIONS) -> list[CensusRecord]:
    ruleset = ruleset or default_ruleset()
    return [build_record(r, ruleset, dynamic_extensions) for r in results]
