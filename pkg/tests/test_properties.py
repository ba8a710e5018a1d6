import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from webcensus.census import extension_histogram
from webcensus.classify import PartyClass, classify_party
from webcensus.errors import HostIsPublicSuffix
from webcensus.uri import ElementKind, ExtensionClass, default_ruleset, parse_uri, strip_arguments

from .oracles import BruteForceSuffixOracle, load_rules


def tuned(**kw):
    return settings(deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow,
                                                          HealthCheck.data_too_large], **kw)


# --- URI laws ---------------------------------------------------------------

label = st.from_regex(r"[a-z0-9]([a-z0-9-]{0,8}[a-z0-9])?", fullmatch=True)
hosts = st.lists(label, min_size=1, max_size=4).map(".".join).flatmap(
    lambda h: st.sampled_from(["com", "co.uk", "org", "gov", "edu", "kawasaki.jp", "ck", "nom.br"]).map(
        lambda s: f"{h}.{s}"))
paths = st.lists(st.from_regex(r"[A-Za-z0-9_.~%-]{0,10}", fullmatch=True), max_size=4).map(lambda p: "/" + "/".join(p))
queries = st.none() | st.from_regex(r"[A-Za-z0-9=&;%_.-]{0,20}", fullmatch=True)
uris = st.builds(lambda sch, h, port, p, q, f: f"{sch}://{h}{port}{p}" + (f"?{q}" if q is not None else "")
                 + (f"#{f}" if f else ""),
                 st.sampled_from(["http", "https", "HTTP"]), hosts, st.sampled_from(["", ":80", ":443", ":8080"]),
                 paths, queries, st.none() | st.text("abc", max_size=3))


@given(uris)
def test_strip_arguments_removes_query_and_fragment(uri):
    once = strip_arguments(uri)
    assert "?" not in once and "#" not in once


@given(uris)
def test_parse_serialize_round_trip(uri):
    parsed = parse_uri(uri)
    assert parse_uri(parsed.serialize()).components() == parsed.components()


@pytest.fixture(scope="module")
def oracle():
    return BruteForceSuffixOracle(load_rules())


@tuned()
@given(hosts)
def test_registrable_domain_matches_oracle(oracle, host):
    want = oracle.registrable(host)
    if want is None:
        with pytest.raises(HostIsPublicSuffix):
            default_ruleset().registrable_domain(host)
        return
    got = default_ruleset().registrable_domain(host).value
    assert got == want
    assert host == got or host.endswith("." + got)


@given(hosts, hosts)
def test_party_symmetric_and_reflexive(a, b):
    rs = default_ruleset()
    try:
        da, db = rs.registrable_domain(a), rs.registrable_domain(b)
    except HostIsPublicSuffix:
        return
    assert classify_party(da, da) is PartyClass.FIRST_PARTY
    assert classify_party(da, db) is classify_party(db, da)


# --- histogram ---------------------------------------------------


@given(st.lists(st.sampled_from(list(ElementKind)), min_size=1, max_size=150))
def test_histogram_total_is_exactly_100(kinds):
    hist = extension_histogram([ExtensionClass(k) for k in kinds])
    assert sum(hist.values()) == 100 and min(hist.values()) >= 0
