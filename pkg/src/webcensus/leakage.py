"""Sensitive-term detection in page URIs and the HTTPS share of a corpus.

A page URI is what third parties receive in the Referer header, so a
condition name in the path or query is treated as leaked.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Iterable
from urllib.parse import unquote

from .errors import EmptyCorpus, MalformedUri
from .percent import percent
from .uri import ParsedUri, parse_uri

# "&", ";" and "," delimit query parameters; treating them as word breaks
# keeps "q=hiv&x=1" from hiding the term.
_SEPARATORS = re.compile(r"[/\-_+.=&;,]+")
_SPACES = re.compile(r"\s+")

SAMPLER = "python-random.Random(seed).sample/MT19937 over lexicographically sorted URIs"
DEFAULT_SAMPLE_N = 500


def normalize_text(text: str) -> str:
    text = unquote(text, errors="replace").lower()
    return _SPACES.sub(" ", _SEPARATORS.sub(" ", text)).strip()


def normalize_uri_text(uri: ParsedUri | str, include_host: bool = False) -> str:
    """Path and query, percent-decoded, lowercased, separators as single spaces."""
    if isinstance(uri, str):
        uri = parse_uri(uri)
    parts = [uri.host] if include_host else []
    parts.append(uri.path)
    if uri.query:
        parts.append(uri.query)
    return normalize_text(" ".join(parts))


@dataclass(frozen=True)
class Lexicon:
    terms: frozenset[str]
    source_id: str

    def __post_init__(self):
        by_len: dict[int, set[tuple[str, ...]]] = {}
        for term in self.terms:
            by_len.setdefault(len(term.split(" ")), set()).add(tuple(term.split(" ")))
        object.__setattr__(self, "_by_length", {n: frozenset(v) for n, v in sorted(by_len.items())})

    @classmethod
    def from_terms(cls, terms: Iterable[str], source_id: str | None = None) -> "Lexicon":
        cleaned = frozenset(t for t in (normalize_text(str(t)) for t in terms) if t)
        if source_id is None:
            source_id = "sha256:" + hashlib.sha256("\n".join(sorted(cleaned)).encode()).hexdigest()
        return cls(cleaned, source_id)

    def __len__(self):
        return len(self.terms)


def parse_lexicon(text: str) -> Lexicon:
    terms = [line.split("#", 1)[0] for line in text.splitlines()]
    return Lexicon.from_terms(terms, "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest())


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    if path is None:
        text = resources.files("webcensus.data").joinpath("lexicon.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_lexicon(text)


@dataclass(frozen=True)
class LeakageVerdict:
    uri: str
    sensitive: bool
    matches: tuple[tuple[str, tuple[int, int]], ...] = ()


def find_terms(text: str, lexicon: Lexicon) -> list[tuple[str, tuple[int, int]]]:
    """Every lexicon term occurring as a whole-word sequence, with UTF-8 byte spans."""
    tokens, offsets, pos = text.split(" ") if text else [], [], 0
    for tok in tokens:
        start = pos
        pos += len(tok.encode("utf-8"))
        offsets.append((start, pos))
        pos += 1
    matches = []
    for i in range(len(tokens)):
        for length, grams in lexicon._by_length.items():
            if i + length > len(tokens):
                break
            gram = tuple(tokens[i:i + length])
            if gram in grams:
                matches.append((" ".join(gram), (offsets[i][0], offsets[i + length - 1][1])))
    matches.sort(key=lambda m: (m[1], m[0]))
    return matches


def detect_sensitive(uri: ParsedUri | str, lexicon: Lexicon, include_host: bool = False) -> LeakageVerdict:
    parsed = parse_uri(uri) if isinstance(uri, str) else uri
    matches = find_terms(normalize_uri_text(parsed, include_host), lexicon)
    return LeakageVerdict(parsed.raw, bool(matches), tuple(matches))


def _page_uris(pages) -> list[str]:
    """Final URIs of loaded pages; plain strings are taken as already loaded."""
    uris = []
    for page in pages:
        if isinstance(page, str):
            uris.append(page)
        elif getattr(page, "loaded", True):
            uris.append(page.final_uri)
    return uris


def https_share(pages) -> Decimal:
    uris = _page_uris(pages)
    if not uris:
        raise EmptyCorpus("no loaded pages")
    secure = 0
    for uri in uris:
        try:
            secure += parse_uri(uri).scheme == "https"
        except MalformedUri:
            continue
    return percent(secure, len(uris))


@dataclass(frozen=True)
class LeakageSampleReport:
    population_size: int
    sample_size: int
    seed: int
    sensitive_share: Decimal
    https_share: Decimal
    sensitive_count: int = 0
    clamped: bool = False
    generator: str = SAMPLER
    lexicon_source: str = ""


def draw_sample(uris: Iterable[str], n: int, seed: int) -> list[str]:
    """Seeded draw without replacement; the whole population when ``n`` exceeds it."""
    population = sorted(uris)
    if n >= len(population):
        return population
    return random.Random(seed).sample(population, n)


def assess_sample(pages, n: int, seed: int, lexicon: Lexicon, include_host: bool = False) -> LeakageSampleReport:
    if n < 1:
        raise ValueError("sample size must be at least 1")
    uris = _page_uris(pages)
    if not uris:
        raise EmptyCorpus("no loaded pages to sample")
    sample = draw_sample(uris, n, seed)
    sensitive = 0
    for uri in sample:
        try:
            sensitive += detect_sensitive(uri, lexicon, include_host).sensitive
        except MalformedUri:
            continue
    return LeakageSampleReport(
        population_size=len(uris),
        sample_size=len(sample),
        seed=seed,
        sensitive_share=percent(sensitive, len(sample)),
        https_share=https_share(uris),
        sensitive_count=sensitive,
        clamped=n > len(uris),
        lexicon_source=lexicon.source_id,
    )
