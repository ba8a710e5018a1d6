from collections import Counter

import pytest

from webcensus.capture import CapturedCookie, CapturedRequest, CookieSource, LoadStatus, PageLoadResult
from webcensus.classify import (PartyClass, analyze_page, classify_cookie, classify_element, classify_party,
                                derive_page_flags)
from webcensus.errors import PageNotLoaded
from webcensus.uri import ElementKind, registrable_domain


def _page(final, requests=(), cookies=()):
    reqs = [r if isinstance(r, CapturedRequest) else CapturedRequest(r, referer=final) for r in requests]
    return PageLoadResult(final, final, requests=reqs, cookies=list(cookies))


def test_subdomain_of_page_is_first_party():
    page = registrable_domain("example.com")
    assert classify_party(page, registrable_domain("images.example.com")) is PartyClass.FIRST_PARTY


def test_analytics_host_is_third_party():
    page = registrable_domain("example.com")
    assert classify_party(page, registrable_domain("google-analytics.com")) is PartyClass.THIRD_PARTY


def test_naive_last_two_labels_would_be_wrong_on_co_uk():
    a, b = registrable_domain("www.clinic1.co.uk"), registrable_domain("cdn.partner2.co.uk")
    assert classify_party(a, b) is PartyClass.THIRD_PARTY


def test_ga_js_element_is_stripped_javascript():
    el = classify_element("http://www.google-analytics.com/ga.js?SITEID=4f1c&utmac=UA-1")
    assert el.stripped_uri == "http://www.google-analytics.com/ga.js"
    assert el.extension_class.kind is ElementKind.JAVASCRIPT
    assert el.request_registrable_domain == "google-analytics.com"


def test_flags_from_requests_and_cookies():
    page = _page("http://www.example.com/conditions/asthma/", [
        "http://www.example.com/logo.gif",
        "http://static.example.com/site.js",
        "http://pixel.tracker.net/p",
    ], [CapturedCookie.from_attribute("sid", "www.example.com")])
    assert derive_page_flags(page).has_third_party_request
    assert not derive_page_flags(page).has_third_party_javascript
    assert not derive_page_flags(page).has_third_party_cookie


def test_script_detected_by_content_type():
    page = _page("http://www.example.com/", [
        CapturedRequest("http://www.google.com/jsapi?x=1", content_type="text/javascript; charset=UTF-8")])
    flags = derive_page_flags(page)
    assert flags.has_third_party_request and flags.has_third_party_javascript


def test_third_party_cookie_and_public_suffix_cookie():
    diag = Counter()
    page = registrable_domain("www.example.co.uk")
    assert classify_cookie(page, CapturedCookie.from_attribute("a", ".example.co.uk"), diagnostics=diag) \
        is PartyClass.FIRST_PARTY
    assert classify_cookie(page, CapturedCookie.from_attribute("b", ".doubleclick.net"), diagnostics=diag) \
        is PartyClass.THIRD_PARTY
    assert classify_cookie(page, CapturedCookie.from_attribute("c", ".co.uk"), diagnostics=diag) \
        is PartyClass.THIRD_PARTY
    assert diag == {"cookie_public_suffix": 1}


def test_analyze_page_counts_diagnostics_and_dedups_elements():
    page = _page("https://www.example.org/a", [
        "data:image/gif;base64,R0lGOD",
        "http://www.google-analytics.com/__utm.gif?n=1",
        "http://www.google-analytics.com/__utm.gif?n=2",
    ], [CapturedCookie("u", "", CookieSource.UNKNOWN)])
    out = analyze_page(page)
    assert out.diagnostics == {"malformed_request_uri": 1, "cookie_unknown_domain": 1}
    assert list(out.elements) == ["http://www.google-analytics.com/__utm.gif"]
    assert out.third_party_domains == {"google-analytics.com"}


def test_unloaded_page_is_rejected():
    failed = PageLoadResult("http://x.com/", "http://x.com/", LoadStatus.TIMEOUT)
    with pytest.raises(PageNotLoaded):
        analyze_page(failed)


def test_ip_address_pages():
    page = _page("http://10.0.0.5/x", ["http://10.0.0.5/y.js", "http://10.0.0.6/z.js"])
    assert analyze_page(page).third_party_domains == {"10.0.0.6"}
