"""URI decomposition, public-suffix registrable domains and element taxonomy.

Party decisions throughout the pipeline compare *registrable domains*
(eTLD+1) computed here from a pinned public-suffix list snapshot.
"""
from __future__ import annotations

import hashlib
import ipaddress
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable
from urllib.parse import urlsplit

from .errors import HostIsPublicSuffix, MalformedUri

DEFAULT_PORTS = {"http": 80, "https": 443, "ws": 80, "wss": 443, "ftp": 21}

DEFAULT_DYNAMIC_EXTENSIONS = frozenset({"php", "asp", "aspx", "jsp", "cgi", "pl"})
IMAGE_EXTENSIONS = frozenset({"gif", "jpg", "jpeg", "png", "webp", "svg", "ico", "bmp"})
JAVASCRIPT_EXTENSIONS = frozenset({"js"})
MAX_EXTENSION_LENGTH = 6

PRIVATE_SECTION_MARKER = "===BEGIN PRIVATE DOMAINS==="


@dataclass(frozen=True)
class ParsedUri:
    raw: str
    scheme: str
    host: str
    port: int | None
    path: str
    query: str | None = None
    fragment: str | None = None

    @property
    def netloc(self) -> str:
        host = f"[{self.host}]" if ":" in self.host else self.host
        return host if self.port is None else f"{host}:{self.port}"

    def serialize(self) -> str:
        out = f"{self.scheme}://{self.netloc}{self.path}"
        if self.query is not None:
            out += "?" + self.query
        if self.fragment is not None:
            out += "#" + self.fragment
        return out

    def components(self) -> tuple:
        return (self.scheme, self.host, self.port, self.path, self.query, self.fragment)


def parse_uri(raw: str) -> ParsedUri:
    """Split an absolute URI into lowercased scheme/host and verbatim path/query.

    Relative references are rejected with :class:`MalformedUri`.
    """
    if not raw or not raw.strip():
        raise MalformedUri(raw, "empty")
    text = raw.strip()
    if any(ch.isspace() for ch in text):
        raise MalformedUri(raw, "embedded whitespace")
    try:
        parts = urlsplit(text)
        port = parts.port
    except ValueError as exc:
        raise MalformedUri(raw, str(exc)) from None
    if not parts.scheme or not parts.netloc:
        raise MalformedUri(raw)
    host = (parts.hostname or "").rstrip(".")
    if not host or ".." in host or host.startswith("."):
        raise MalformedUri(raw, "missing or invalid host")
    query = parts.query if "?" in text.split("#", 1)[0] else None
    fragment = parts.fragment if "#" in text else None
    return ParsedUri(
        raw=raw,
        scheme=parts.scheme.lower(),
        host=host.lower(),
        port=port,
        path=parts.path or "/",
        query=query,
        fragment=fragment,
    )


def _as_parsed(uri: ParsedUri | str) -> ParsedUri:
    return uri if isinstance(uri, ParsedUri) else parse_uri(uri)


def strip_arguments(uri: ParsedUri | str) -> str:
    """Drop query and fragment; keeps scheme, host, explicit non-default port and path."""
    uri = _as_parsed(uri)
    port = None if uri.port == DEFAULT_PORTS.get(uri.scheme) else uri.port
    return ParsedUri(uri.raw, uri.scheme, uri.host, port, uri.path).serialize()


def normalize_page_uri(raw: str) -> str:
    """Deduplication key for page lists: fragment and default port removed, query kept."""
    uri = parse_uri(raw)
    port = None if uri.port == DEFAULT_PORTS.get(uri.scheme) else uri.port
    return ParsedUri(raw, uri.scheme, uri.host, port, uri.path, uri.query).serialize()


# --- public suffix rules -------------------------------------------------


@dataclass(frozen=True)
class RegistrableDomain:
    value: str
    heuristic: bool = False  # no explicit rule matched; last-two-labels fallback

    def __str__(self) -> str:
        return self.value


def _idna_variant(rule: str) -> str | None:
    try:
        encoded = rule.encode("idna").decode("ascii")
    except UnicodeError:
        return None
    return encoded if encoded != rule else None


class PublicSuffixRuleset:
    """Plain, wildcard (``*.``) and exception (``!``) rules from a suffix list.

    Unicode rules are also registered in their punycode form so that the
    ASCII hosts browsers emit match; host labels themselves are never converted.
    """

    def __init__(self, rules: Iterable[str], snapshot_id: str):
        self.snapshot_id = snapshot_id
        self.rules: frozenset[str] = frozenset(rules)
        self._exact: set[str] = set()
        self._wildcard: set[str] = set()
        self._exception: set[str] = set()
        for rule in self.rules:
            for form in filter(None, (rule, _idna_variant(rule))):
                if form.startswith("!"):
                    self._exception.add(form[1:])
                elif form.startswith("*."):
                    self._wildcard.add(form[2:])
                else:
                    self._exact.add(form)
        self._cache: dict[str, RegistrableDomain] = {}

    def __repr__(self) -> str:
        return f"PublicSuffixRuleset({len(self.rules)} rules, {self.snapshot_id[:19]})"

    def public_suffix_length(self, labels: list[str]) -> tuple[int, bool]:
        """Label count of the prevailing rule and whether it was explicit."""
        n = len(labels)
        best = 0
        for i in range(n):
            suffix = ".".join(labels[i:])
            if suffix in self._exception:
                return n - i - 1, True
            if suffix in self._exact or (i + 1 < n and ".".join(labels[i + 1:]) in self._wildcard):
                best = max(best, n - i)
        if best:
            return best, True
        return 1, False

    def registrable_domain(self, host: str) -> RegistrableDomain:
        cached = self._cache.get(host)
        if cached is not None:
            return cached
        result = self._compute(host)
        self._cache[host] = result
        return result

    def _compute(self, host: str) -> RegistrableDomain:
        if not host:
            raise MalformedUri(host, "empty host")
        host = host.lower()
        if host.endswith("."):
            host = host[:-1]
        try:
            ipaddress.ip_address(host.strip("[]"))
        except ValueError:
            pass
        else:
            return RegistrableDomain(host)
        labels = host.split(".")
        if any(not label for label in labels):
            raise MalformedUri(host, "empty label")
        suffix_len, explicit = self.public_suffix_length(labels)
        if suffix_len >= len(labels):
            raise HostIsPublicSuffix(host)
        return RegistrableDomain(".".join(labels[-(suffix_len + 1):]), heuristic=not explicit)


def parse_ruleset(text: str, include_private: bool = False, snapshot_id: str | None = None) -> PublicSuffixRuleset:
    rules = []
    for line in text.splitlines():
        if PRIVATE_SECTION_MARKER in line and not include_private:
            break
        rule = line.strip().split()[0] if line.strip() else ""
        if not rule or rule.startswith("//"):
            continue
        rules.append(rule.lower())
    if snapshot_id is None:
        snapshot_id = "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
        if include_private:
            snapshot_id += "+private"
    return PublicSuffixRuleset(rules, snapshot_id)


def load_ruleset(path: str | Path | None = None, include_private: bool = False) -> PublicSuffixRuleset:
    if path is None:
        return default_ruleset(include_private)
    return parse_ruleset(Path(path).read_text(encoding="utf-8"), include_private)


@lru_cache(maxsize=2)
def default_ruleset(include_private: bool = False) -> PublicSuffixRuleset:
    text = resources.files("webcensus.data").joinpath("public_suffix_list.dat").read_text(encoding="utf-8")
    return parse_ruleset(text, include_private)


def registrable_domain(host: str, ruleset: PublicSuffixRuleset | None = None) -> RegistrableDomain:
    """eTLD+1 of ``host``.

    Raises :class:`HostIsPublicSuffix` when the host is itself a suffix. Hosts
    matching no rule fall back to their last two labels with ``heuristic`` set.
    """
    return (ruleset or default_ruleset()).registrable_domain(host)


# --- TLD categories and element classes ---------------------------------


class TldKind(str, Enum):
    COM = "com"
    ORG = "org"
    GOV = "gov"
    EDU = "edu"
    OTHER = "other"


@dataclass(frozen=True)
class TldCategory:
    kind: TldKind
    label: str

    def __str__(self) -> str:
        return self.kind.value if self.kind is not TldKind.OTHER else f"other:{self.label}"


_NAMED_TLDS = {kind.value: kind for kind in TldKind if kind is not TldKind.OTHER}


def tld_category(host: str) -> TldCategory:
    label = host.lower().rstrip(".").rsplit(".", 1)[-1]
    return TldCategory(_NAMED_TLDS.get(label, TldKind.OTHER), label)


class ElementKind(str, Enum):
    NO_EXTENSION = "No Extension"
    JAVASCRIPT = "Javascript"
    IMAGE = "Image"
    DYNAMIC_PAGE = "Dynamic Page"
    OTHER = "Other"


@dataclass(frozen=True)
class ExtensionClass:
    kind: ElementKind
    ext: str | None = None

    def __str__(self) -> str:
        return self.kind.value if self.ext is None else f"{self.kind.value}({self.ext})"


NO_EXTENSION = ExtensionClass(ElementKind.NO_EXTENSION)


def extension_token(path: str) -> str | None:
    segment = path.rsplit("/", 1)[-1].split(";", 1)[0]
    if "." not in segment:
        return None
    ext = segment.rsplit(".", 1)[1]
    if not (1 <= len(ext) <= MAX_EXTENSION_LENGTH) or not (ext.isascii() and ext.isalnum()):
        return None
    return ext.lower()


def classify_extension(ext: str | None, dynamic_extensions=DEFAULT_DYNAMIC_EXTENSIONS) -> ExtensionClass:
    if ext is None:
        return NO_EXTENSION
    if ext in JAVASCRIPT_EXTENSIONS:
        return ExtensionClass(ElementKind.JAVASCRIPT, ext)
    if ext in IMAGE_EXTENSIONS:
        return ExtensionClass(ElementKind.IMAGE, ext)
    if ext in dynamic_extensions:
        return ExtensionClass(ElementKind.DYNAMIC_PAGE, ext)
    return ExtensionClass(ElementKind.OTHER, ext)


def extract_extension(uri: ParsedUri | str, dynamic_extensions=DEFAULT_DYNAMIC_EXTENSIONS) -> ExtensionClass:
    if isinstance(uri, str) and uri.startswith("/"):
        path = uri
    elif isinstance(uri, str) and "://" not in uri:
        path = "/" + uri  # bare file name such as "__utm.gif"
    else:
        path = _as_parsed(uri).path
    return classify_extension(extension_token(path), dynamic_extensions)
