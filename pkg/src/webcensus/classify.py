"""First/third-party decisions for requests and cookies, and per-page flags."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .capture.models import CapturedCookie, CapturedRequest, PageLoadResult
from .errors import HostIsPublicSuffix, MalformedUri, PageNotLoaded
from .uri import (DEFAULT_DYNAMIC_EXTENSIONS, ElementKind, ExtensionClass, PublicSuffixRuleset,
                  RegistrableDomain, default_ruleset, extract_extension, parse_uri, strip_arguments)

SCRIPT_CONTENT_TOKENS = ("javascript", "ecmascript")


class PartyClass(str, Enum):
    FIRST_PARTY = "first-party"
    THIRD_PARTY = "third-party"


@dataclass(frozen=True)
class PageFlags:
    has_third_party_request: bool = False
    has_third_party_javascript: bool = False
    has_third_party_cookie: bool = False


@dataclass(frozen=True)
class ElementRecord:
    stripped_uri: str
    extension_class: ExtensionClass
    request_registrable_domain: str


def _domain_value(domain) -> str:
    return (domain.value if isinstance(domain, RegistrableDomain) else str(domain)).lower()


def classify_party(page_domain, request_domain) -> PartyClass:
    if _domain_value(page_domain) == _domain_value(request_domain):
        return PartyClass.FIRST_PARTY
    return PartyClass.THIRD_PARTY


def domain_or_host(host: str, ruleset: PublicSuffixRuleset) -> tuple[str, bool]:
    """Registrable domain of ``host``; a bare public suffix stands for itself (flagged)."""
    try:
        return ruleset.registrable_domain(host).value, False
    except HostIsPublicSuffix:
        return host.lower().strip("."), True


def classify_cookie(page_domain, cookie: CapturedCookie, ruleset: PublicSuffixRuleset | None = None,
                    diagnostics: Counter | None = None) -> PartyClass:
    """Party of a cookie from its Domain attribute.

    A cookie scoped to a whole public suffix is always third-party and
    counted under ``cookie_public_suffix`` in ``diagnostics``.
    """
    if not cookie.domain_attribute:
        raise ValueError(f"cookie {cookie.name!r} has no domain to classify")
    try:
        domain = (ruleset or default_ruleset()).registrable_domain(cookie.domain_attribute)
    except HostIsPublicSuffix:
        if diagnostics is not None:
            diagnostics["cookie_public_suffix"] += 1
        return PartyClass.THIRD_PARTY
    return classify_party(page_domain, domain)


def classify_element(request: CapturedRequest | str, ruleset: PublicSuffixRuleset | None = None,
                     dynamic_extensions=DEFAULT_DYNAMIC_EXTENSIONS) -> ElementRecord:
    uri = parse_uri(request.uri if isinstance(request, CapturedRequest) else request)
    domain, _ = domain_or_host(uri.host, ruleset or default_ruleset())
    return ElementRecord(strip_arguments(uri), extract_extension(uri, dynamic_extensions), domain)


def is_script(request: CapturedRequest, element: ElementRecord) -> bool:
    if element.extension_class.kind is ElementKind.JAVASCRIPT:
        return True
    ctype = (request.content_type or "").lower()
    return any(token in ctype for token in SCRIPT_CONTENT_TOKENS)


@dataclass
class PageAnalysis:
    page_domain: str
    flags: PageFlags
    third_party_domains: set[str] = field(default_factory=set)
    third_party_cookie_domains: set[str] = field(default_factory=set)
    elements: dict[str, ElementRecord] = field(default_factory=dict)
    diagnostics: Counter = field(default_factory=Counter)


def analyze_page(result: PageLoadResult, ruleset: PublicSuffixRuleset | None = None,
                 dynamic_extensions=DEFAULT_DYNAMIC_EXTENSIONS) -> PageAnalysis:
    """Classify every request and cookie of a loaded page against its final URI."""
    if not result.loaded:
        raise PageNotLoaded(f"{result.requested_uri}: status {result.status.value}")
    ruleset = ruleset or default_ruleset()
    page_domain, _ = domain_or_host(parse_uri(result.final_uri).host, ruleset)
    diag: Counter = Counter()
    third_domains: set[str] = set()
    elements: dict[str, ElementRecord] = {}
    has_js = False

    for request in result.requests:
        try:
            element = classify_element(request, ruleset, dynamic_extensions)
        except MalformedUri:
            diag["malformed_request_uri"] += 1
            continue
        if classify_party(page_domain, element.request_registrable_domain) is PartyClass.FIRST_PARTY:
            continue
        third_domains.add(element.request_registrable_domain)
        elements.setdefault(element.stripped_uri, element)
        has_js = has_js or is_script(request, element)

    cookie_domains: set[str] = set()
    for cookie in result.cookies:
        if not cookie.domain_attribute:
            diag["cookie_unknown_domain"] += 1
            continue
        if classify_cookie(page_domain, cookie, ruleset, diag) is PartyClass.THIRD_PARTY:
            cookie_domains.add(domain_or_host(cookie.domain_attribute, ruleset)[0])

    flags = PageFlags(bool(third_domains), has_js, bool(cookie_domains))
    return PageAnalysis(page_domain, flags, third_domains, cookie_domains, elements, diag)


def derive_page_flags(result: PageLoadResult, ruleset: PublicSuffixRuleset | None = None) -> PageFlags:
    return analyze_page(result, ruleset).flags
