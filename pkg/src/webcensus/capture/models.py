from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from ..uri import parse_uri


class LoadStatus(str, Enum):
    LOADED = "loaded"
    TIMEOUT = "timeout"
    ERROR = "error"


class CookieSource(str, Enum):
    HEADER = "header"
    SCRIPT = "script"
    UNKNOWN = "unknown"


def parse_timestamp(value) -> datetime:
    """ISO-8601 (HAR ``startedDateTime``) or epoch seconds to an aware UTC datetime."""
    if isinstance(value, datetime):
        return value if value.tzinfo else value.replace(tzinfo=timezone.utc)
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(value, tz=timezone.utc)
    text = str(value).strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    return stamp if stamp.tzinfo else stamp.replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class CapturedRequest:
    uri: str
    method: str = "GET"
    referer: str | None = None
    user_agent: str | None = None
    response_status: int | None = None
    content_type: str | None = None
    timestamp: datetime | None = None


@dataclass(frozen=True)
class CapturedCookie:
    name: str
    domain_attribute: str
    source: CookieSource = CookieSource.HEADER
    timestamp: datetime | None = None
    domain_wide: bool = False  # attribute carried a leading "."

    @classmethod
    def from_attribute(cls, name, domain, source=CookieSource.HEADER, timestamp=None):
        domain = (domain or "").strip().lower()
        wide = domain.startswith(".")
        return cls(name, domain.lstrip("."), source, timestamp, wide)


@dataclass
class PageLoadResult:
    requested_uri: str
    final_uri: str
    status: LoadStatus = LoadStatus.LOADED
    error_reason: str | None = None
    started_at: datetime | None = None
    settle_seconds: int = 0
    requests: list[CapturedRequest] = field(default_factory=list)
    cookies: list[CapturedCookie] = field(default_factory=list)

    @property
    def loaded(self) -> bool:
        return self.status is LoadStatus.LOADED

    def validate(self) -> None:
        if self.loaded:
            parse_uri(self.final_uri)


def parse_set_cookie(header_value: str, request_host: str | None, timestamp=None,
                     source=CookieSource.HEADER) -> CapturedCookie | None:
    """Name and effective domain from one ``Set-Cookie`` value.

    A missing Domain attribute scopes the cookie to the setting request's
    host; when that host is unknown too the cookie is marked UNKNOWN.
    """
    parts = [p.strip() for p in header_value.split(";")]
    if not parts or "=" not in parts[0]:
        return None
    name = parts[0].split("=", 1)[0].strip()
    domain = None
    for attr in parts[1:]:
        key, _, value = attr.partition("=")
        if key.strip().lower() == "domain" and value.strip():
            domain = value.strip()
    if domain is None:
        if not request_host:
            return CapturedCookie(name, "", CookieSource.UNKNOWN, timestamp)
        return CapturedCookie.from_attribute(name, request_host, source, timestamp)
    return CapturedCookie.from_attribute(name, domain, source, timestamp)
