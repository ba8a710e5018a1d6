import re

import pytest

from webcensus.errors import HostIsPublicSuffix, MalformedUri
from webcensus.uri import (ElementKind, ExtensionClass, TldKind, default_ruleset, extract_extension,
                           normalize_page_uri, parse_ruleset, parse_uri, registrable_domain, strip_arguments,
                           tld_category)

from .conftest import DATA
from .oracles import BruteForceSuffixOracle, load_rules

VECTOR = re.compile(r"^checkPublicSuffix\((null|'[^']*'), (null|'[^']*')\);")


def _vectors():
    out = []
    for line in (DATA / "psl_test_vectors.txt").read_text(encoding="utf-8").splitlines():
        m = VECTOR.match(line)
        if m and m.group(1) != "null":
            expected = None if m.group(2) == "null" else m.group(2).strip("'")
            out.append((m.group(1).strip("'"), expected))
    return out


@pytest.mark.parametrize("host,expected", _vectors())
def test_psl_reference_vectors(host, expected):
    # the reference vectors assume the full list, private section included
    ruleset = default_ruleset(include_private=True)
    if expected is None:
        with pytest.raises((HostIsPublicSuffix, MalformedUri)):
            ruleset.registrable_domain(host)
    else:
        assert ruleset.registrable_domain(host).value == expected


def test_icann_only_by_default():
    assert registrable_domain("foo.blogspot.com").value == "blogspot.com"
    assert default_ruleset(True).registrable_domain("foo.blogspot.com").value == "foo.blogspot.com"
    assert default_ruleset().snapshot_id != default_ruleset(True).snapshot_id


@pytest.mark.parametrize("host,expected", [
    ("images.example.com", "example.com"),
    ("www.google-analytics.com", "google-analytics.com"),
    ("www.nhs.uk", "www.nhs.uk"),  # nhs.uk is itself a listed suffix
    ("a.b.foo.co.uk", "foo.co.uk"),
    ("www.health.state.ny.us", "state.ny.us"),
    ("cdn.city.kawasaki.jp", "city.kawasaki.jp"),
    ("x.y.kawasaki.jp", "x.y.kawasaki.jp"),
    ("192.168.0.7", "192.168.0.7"),
])
def test_registrable_domain_examples(host, expected):
    assert registrable_domain(host).value == expected


def test_registrable_domain_matches_oracle_on_tricky_hosts():
    oracle = BruteForceSuffixOracle(load_rules())
    ruleset = default_ruleset()
    hosts = ["a.b.c.d.example.co.uk", "www.ck", "www.www.ck", "foo.bar.nom.br", "x.sch.uk", "a.b.sch.uk",
             "city.yokohama.jp", "a.city.yokohama.jp", "metro.tokyo.jp", "uk.com", "xn--85x722f.com.cn",
             "app.herokuapp.com", "pages.github.io", "s3.amazonaws.com", "a.b.gov.au", "foo.k12.ca.us"]
    for host in hosts:
        want = oracle.registrable(host)
        if want is None:
            with pytest.raises(HostIsPublicSuffix):
                ruleset.registrable_domain(host)
        else:
            assert ruleset.registrable_domain(host).value == want, host


def test_unlisted_tld_is_heuristic():
    got = registrable_domain("a.b.example.notarealtld")
    assert got.value == "example.notarealtld" and got.heuristic
    assert not registrable_domain("a.example.com").heuristic


def test_host_that_is_a_suffix_raises():
    with pytest.raises(HostIsPublicSuffix):
        registrable_domain("co.uk")
    with pytest.raises(HostIsPublicSuffix):
        registrable_domain("com")


def test_custom_ruleset_wildcard_and_exception():
    rs = parse_ruleset("test\n*.w.test\n!keep.w.test\n", snapshot_id="t")
    assert rs.registrable_domain("a.b.w.test").value == "a.b.w.test"
    assert rs.registrable_domain("x.keep.w.test").value == "keep.w.test"
    with pytest.raises(HostIsPublicSuffix):
        rs.registrable_domain("b.w.test")


def test_parse_uri_components():
    u = parse_uri("HTTP://WWW.Example.com:8080/a/b.php?x=1#frag")
    assert (u.scheme, u.host, u.port, u.path, u.query, u.fragment) == ("http", "www.example.com", 8080,
                                                                        "/a/b.php", "x=1", "frag")
    assert parse_uri("http://example.com").path == "/"


@pytest.mark.parametrize("raw", ["", "   ", "/relative/path", "example.com/page", "http://", "http://a b.com/",
                                 "http://exa..mple.com/", "data:image/gif;base64,R0lGOD", "http://x.com:99999/"])
def test_parse_uri_rejects(raw):
    with pytest.raises(MalformedUri):
        parse_uri(raw)


def test_strip_arguments():
    assert strip_arguments("http://www.google-analytics.com/ga.js?SITEID=123&x=y") == \
        "http://www.google-analytics.com/ga.js"
    assert strip_arguments("https://a.com:443/p#top") == "https://a.com/p"
    assert strip_arguments("http://a.com:8080/p?q") == "http://a.com:8080/p"


def test_normalize_page_uri_keeps_query():
    assert normalize_page_uri("http://A.com:80/x?q=1#frag") == "http://a.com/x?q=1"


@pytest.mark.parametrize("target,kind,ext", [
    ("http://www.google-analytics.com/ga.js?SITEID=1", ElementKind.JAVASCRIPT, "js"),
    ("__utm.gif", ElementKind.IMAGE, "gif"),
    ("/pixel", ElementKind.NO_EXTENSION, None),
    ("http://x.com/path.to/dir/", ElementKind.NO_EXTENSION, None),
    ("http://x.com/like.php?x=1", ElementKind.DYNAMIC_PAGE, "php"),
    ("http://x.com/fpc.PL", ElementKind.DYNAMIC_PAGE, "pl"),
    ("http://x.com/a.JPEG", ElementKind.IMAGE, "jpeg"),
    ("http://x.com/s.css", ElementKind.OTHER, "css"),
    ("http://x.com/v.toolongext", ElementKind.NO_EXTENSION, None),
    ("http://x.com/file.", ElementKind.NO_EXTENSION, None),
])
def test_extract_extension(target, kind, ext):
    assert extract_extension(target) == ExtensionClass(kind, ext)


def test_dynamic_extensions_are_configurable():
    assert extract_extension("http://x.com/a.cfm").kind is ElementKind.OTHER
    assert extract_extension("http://x.com/a.cfm", frozenset({"cfm"})).kind is ElementKind.DYNAMIC_PAGE


@pytest.mark.parametrize("host,kind,label", [
    ("www.cdc.gov", TldKind.GOV, "gov"), ("mayo.EDU", TldKind.EDU, "edu"), ("a.org.", TldKind.ORG, "org"),
    ("www.nhs.uk", TldKind.OTHER, "uk"), ("x.com", TldKind.COM, "com"),
])
def test_tld_category(host, kind, label):
    cat = tld_category(host)
    assert (cat.kind, cat.label) == (kind, label)
