from decimal import Decimal

import pytest

from webcensus.capture import CapturedCookie, CapturedRequest, LoadStatus, PageLoadResult
from webcensus.census import accumulate, build_record, extension_histogram, merge, summarize
from webcensus.errors import EmptyCorpus, VersionMismatch
from webcensus.ownership import load_owner_db_file
from webcensus.percent import as_int, percent
from webcensus.uri import ElementKind, ExtensionClass

from .oracles import int_from_2dp, pct_half_up


def _result(final, requests=(), cookies=(), status=LoadStatus.LOADED):
    return PageLoadResult(final, final, status, requests=[CapturedRequest(u) for u in requests],
                          cookies=[CapturedCookie.from_attribute(n, d) for n, d in cookies])


@pytest.fixture(scope="module")
def small_records():
    results = [
        _result("http://www.a.com/", ["http://www.google-analytics.com/ga.js", "http://ad.doubleclick.net/x"],
                [("IDE", ".doubleclick.net")]),
        _result("http://www.b.com/", ["http://www.google-analytics.com/ga.js?id=2"]),
        _result("http://www.c.gov/", ["http://static.c.gov/app.js"]),
        _result("http://www.d.edu/", ["http://b.scorecardresearch.com/b?c=1", "http://tail.example.net/i.png"]),
        _result("http://www.e.co.uk/", []),
        _result("http://gone.com/", status=LoadStatus.TIMEOUT),
    ]
    return [build_record(r) for r in results]


def test_prevalence_by_category(small_records):
    s = summarize(small_records)
    assert s.pages_total == 6 and s.pages_loaded == 5
    row = s.per_category["all"]
    assert (row.pct_third_party_requests, row.pct_third_party_js, row.pct_third_party_cookies) == \
        (Decimal("60.00"), Decimal("40.00"), Decimal("20.00"))
    assert s.per_category["com"].pct_third_party_requests == Decimal("100.00")
    assert s.per_category["gov"].pct_third_party_requests == Decimal("0.00")
    assert s.load_failures == {"timeout": 1}


def test_top_elements_ranked_by_pages_then_uri(small_records):
    s = summarize(small_records, top_n=3)
    assert [(e.stripped_uri, e.pages) for e in s.top_elements] == [
        ("http://www.google-analytics.com/ga.js", 2),
        ("http://ad.doubleclick.net/x", 1),
        ("http://b.scorecardresearch.com/b", 1),
    ]


def test_owner_ranking(small_records):
    s = summarize(small_records, db=load_owner_db_file())
    assert [(o.owner_id, o.pages) for o in s.owner_ranking] == [("google", 2), ("comscore", 1)]
    assert s.unattributed_pages == 1


def test_empty_corpus_raises():
    failed = build_record(_result("http://x.com/", status=LoadStatus.ERROR))
    with pytest.raises(EmptyCorpus):
        summarize([failed])


def test_merge_refuses_mismatched_provenance(small_records):
    a = accumulate(small_records[:2], provenance={"ruleset": "r1"})
    b = accumulate(small_records[2:], provenance={"ruleset": "r2"})
    with pytest.raises(VersionMismatch):
        merge(a, b)
    with pytest.raises(VersionMismatch):
        merge(accumulate([], top_n=10), accumulate([], top_n=20))


def _elements(counts):
    kinds = {"n": ElementKind.NO_EXTENSION, "j": ElementKind.JAVASCRIPT, "i": ElementKind.IMAGE,
             "d": ElementKind.DYNAMIC_PAGE, "o": ElementKind.OTHER}
    return [ExtensionClass(kinds[k]) for k, n in counts.items() for _ in range(n)]


def test_histogram_matches_table_shape():
    hist = extension_histogram(_elements({"n": 47, "j": 33, "i": 8, "d": 4, "o": 8}))
    assert [(k.value, v) for k, v in hist.items()] == [
        ("No Extension", 47), ("Javascript", 33), ("Image", 8), ("Dynamic Page", 4), ("Other", 8)]


@pytest.mark.parametrize("counts", [
    {"n": 1, "j": 1, "i": 1},  # thirds: 33.33 each, Other gets the residual 1
    {"n": 1, "j": 1, "i": 1, "d": 1, "o": 4},  # eighths round 12.5 up to 13
    {"n": 1, "j": 1, "i": 1, "d": 1, "o": 0},
    {"n": 7},
])
def test_histogram_sums_to_100(counts):
    hist = extension_histogram(_elements(counts))
    assert sum(hist.values()) == 100
    assert all(v >= 0 for v in hist.values())


def test_histogram_overshoot_is_shaved():
    # eighths: 12.5 -> 13 and 37.5 -> 38 sum to 102 before shaving
    hist = extension_histogram(_elements({"n": 1, "j": 3, "i": 3, "d": 1}))
    assert sum(hist.values()) == 100
    assert [hist[k] for k in (ElementKind.NO_EXTENSION, ElementKind.JAVASCRIPT, ElementKind.IMAGE,
                              ElementKind.DYNAMIC_PAGE)] == [13, 37, 37, 13]
    assert ElementKind.OTHER not in hist


@pytest.mark.parametrize("count,total", [(1, 3), (2, 3), (1, 8), (9100, 10000), (324, 10000), (5, 200), (1, 400)])
def test_percent_against_fraction_oracle(count, total):
    assert str(percent(count, total)) == pct_half_up(count, total)
    assert as_int(percent(count, total)) == int_from_2dp(pct_half_up(count, total))
