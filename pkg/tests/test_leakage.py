import pytest

from webcensus.errors import EmptyCorpus
from webcensus.fixtures import leakage_fixture_uris
from webcensus.leakage import (Lexicon, assess_sample, detect_sensitive, draw_sample, find_terms, https_share,
                               load_lexicon, normalize_uri_text, parse_lexicon)


@pytest.fixture(scope="module")
def lexicon():
    return load_lexicon()


def test_nhs_breast_lump_is_sensitive(lexicon):
    verdict = detect_sensitive("http://www.nhs.uk/conditions/breast-lump/Pages/Introduction.aspx", lexicon)
    assert verdict.sensitive
    assert "breast lump" in [term for term, _ in verdict.matches]


def test_pubmed_numeric_is_not_sensitive(lexicon):
    assert not detect_sensitive("http://www.ncbi.nlm.nih.gov/pubmed/21722252", lexicon).sensitive


def test_normalization():
    assert normalize_uri_text("http://Cancer.org/Breast_Cancer/early-signs.html?q=HIV%20test&x=1") == \
        "breast cancer early signs html q hiv test x 1"
    assert "cancer" in normalize_uri_text("http://cancer.org/x", include_host=True)


def test_whole_word_only():
    lex = Lexicon.from_terms(["flu", "aids"])
    assert find_terms("influenza hearing aids", lex) == [("aids", (18, 22))]


def test_byte_spans_are_utf8():
    lex = Lexicon.from_terms(["grippe"])
    assert find_terms("très grippe", lex) == [("grippe", (6, 12))]


def test_host_excluded_by_default(lexicon):
    assert not detect_sensitive("http://www.cancer.org/about/", lexicon).sensitive
    assert detect_sensitive("http://www.cancer.org/about/", lexicon, include_host=True).sensitive


def test_lexicon_parsing_skips_comments_and_blanks():
    lex = parse_lexicon("# header\n\nBreast_Lump  # inline\nHIV\n")
    assert lex.terms == {"breast lump", "hiv"}
    assert lex.source_id.startswith("sha256:")


def test_fixture_with_seventy_sensitive(lexicon):
    uris = leakage_fixture_uris()
    report = assess_sample(uris, 100, seed=1, lexicon=lexicon)
    assert (report.sample_size, report.sensitive_count, str(report.sensitive_share)) == (100, 70, "70.00")
    assert not report.clamped


def test_sample_clamps_to_population(lexicon):
    report = assess_sample(["http://a.com/asthma", "http://b.com/x"], 500, seed=0, lexicon=lexicon)
    assert report.clamped and report.sample_size == 2 and report.population_size == 2


def test_draw_sample_independent_of_input_order():
    uris = [f"http://s{i}.com/" for i in range(50)]
    assert draw_sample(uris, 10, 3) == draw_sample(list(reversed(uris)), 10, 3)
    assert draw_sample(uris, 10, 3) != draw_sample(uris, 10, 4)


def test_https_share():
    pages = ["https://a.com/"] + [f"http://b{i}.com/" for i in range(3)]
    assert str(https_share(pages)) == "25.00"
    with pytest.raises(EmptyCorpus):
        https_share([])
