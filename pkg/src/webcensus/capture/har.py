"""HTTP Archive (HAR 1.2) ingestion, the offline capture path.

Besides the standard fields, pages may carry the custom keys ``_status``
(``loaded``/``timeout``/``error``), ``_error``, ``_requestedUri``,
``_finalUri``, ``_settleSeconds`` and ``_cookies`` (which also carries
script-set cookies); ``scan`` writes these so that live captures
round-trip through the same reader.
"""
from __future__ import annotations

import json
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urljoin

from ..errors import MalformedUri, SchemaError
from ..uri import parse_uri
from .models import (CapturedCookie, CapturedRequest, CookieSource, LoadStatus,
                     PageLoadResult, parse_set_cookie, parse_timestamp)

SUPPORTED_VERSIONS = {"1.1", "1.2"}
NO_PAGE = "\0"


def _header(headers, name):
    wanted = name.lower()
    for h in headers or ():
        if str(h.get("name", "")).lower() == wanted:
            return h.get("value")
    return None


def _headers(headers, name):
    wanted = name.lower()
    return [h.get("value", "") for h in headers or () if str(h.get("name", "")).lower() == wanted]


def _host(uri):
    try:
        return parse_uri(uri).host
    except MalformedUri:
        return None


def _entry_request(entry) -> CapturedRequest:
    req = entry.get("request")
    if not isinstance(req, dict) or not req.get("url"):
        raise SchemaError("entry without request.url")
    resp = entry.get("response") or {}
    content_type = (resp.get("content") or {}).get("mimeType") or _header(resp.get("headers"), "content-type")
    status = resp.get("status")
    return CapturedRequest(
        uri=req["url"],
        method=req.get("method", "GET"),
        referer=_header(req.get("headers"), "referer"),
        user_agent=_header(req.get("headers"), "user-agent"),
        response_status=status if isinstance(status, int) and status > 0 else None,
        content_type=content_type or None,
        timestamp=_entry_time(entry) if entry.get("startedDateTime") else None,
    )


def _entry_cookies(entry, request: CapturedRequest) -> list[CapturedCookie]:
    resp = entry.get("response") or {}
    host = _host(request.uri)
    cookies = []
    for value in _headers(resp.get("headers"), "set-cookie"):
        # Firefox folds repeated Set-Cookie headers into one newline-joined value
        for line in str(value).split("\n"):
            cookie = parse_set_cookie(line, host, request.timestamp)
            if cookie is not None:
                cookies.append(cookie)
    if not cookies:
        for c in resp.get("cookies") or ():
            if not c.get("name"):
                continue
            if c.get("domain"):
                cookies.append(CapturedCookie.from_attribute(c["name"], c["domain"], CookieSource.HEADER, request.timestamp))
            elif host:
                cookies.append(CapturedCookie.from_attribute(c["name"], host, CookieSource.HEADER, request.timestamp))
    return cookies


def _final_uri(entries, requested):
    by_url = {}
    for e in entries:
        by_url.setdefault(e["request"]["url"], e)
    current = by_url.get(requested)
    seen = {requested}
    uri = requested
    while current is not None:
        resp = current.get("response") or {}
        target = resp.get("redirectURL") or _header(resp.get("headers"), "location")
        if not (300 <= (resp.get("status") or 0) < 400 and target):
            break
        uri = urljoin(uri, target)
        if uri in seen:
            break
        seen.add(uri)
        current = by_url.get(uri)
    return uri


def _load_document(document):
    if isinstance(document, (str, bytes, bytearray)):
        try:
            document = json.loads(document)
        except ValueError as exc:
            raise SchemaError(f"HAR is not valid JSON: {exc}") from None
    if not isinstance(document, dict) or not isinstance(document.get("log"), dict):
        raise SchemaError("HAR document has no 'log' object")
    log = document["log"]
    if not isinstance(log.get("entries"), list):
        raise SchemaError("HAR log has no 'entries' list")
    version = str(log.get("version", ""))
    if version not in SUPPORTED_VERSIONS:
        raise SchemaError(f"unsupported HAR version {version!r}")
    return log


def ingest_har(document) -> list[PageLoadResult]:
    """One :class:`PageLoadResult` per HAR page, in document order.

    Entries without a ``pageref`` (or archives without ``pages``) form a
    single anonymous page.
    """
    log = _load_document(document)
    grouped = defaultdict(list)
    for entry in log["entries"]:
        if not isinstance(entry, dict):
            raise SchemaError("HAR entry is not an object")
        grouped[entry.get("pageref", NO_PAGE)].append(entry)

    pages = list(log.get("pages") or ())
    if not pages and grouped:
        pages = [{"id": NO_PAGE}]
    known = {p.get("id") for p in pages}
    for ref in grouped:
        if ref not in known:
            pages.append({"id": ref})
            known.add(ref)

    results = []
    for page in pages:
        entries = sorted(grouped.get(page.get("id"), []), key=_entry_time)
        results.append(_page_result(page, entries))
    return results


_UNDATED = datetime.min.replace(tzinfo=timezone.utc)


def _entry_time(entry):
    # stable sort: undated entries keep document order ahead of dated ones
    stamp = entry.get("startedDateTime")
    try:
        return parse_timestamp(stamp) if stamp else _UNDATED
    except ValueError:
        raise SchemaError(f"bad startedDateTime {stamp!r}") from None


def _page_result(page, entries) -> PageLoadResult:
    requests, cookies = [], []
    for entry in entries:
        req = _entry_request(entry)
        requests.append(req)
        cookies.extend(_entry_cookies(entry, req))
    if "_cookies" in page:
        cookies = [_custom_cookie(c) for c in page["_cookies"]]

    requested = page.get("_requestedUri") or (entries[0]["request"]["url"] if entries else page.get("title", ""))
    final = page.get("_finalUri") or (_final_uri(entries, requested) if entries else requested)
    started = page.get("startedDateTime") or (entries[0].get("startedDateTime") if entries else None)

    status = LoadStatus(page.get("_status", LoadStatus.LOADED.value))
    reason = page.get("_error")
    if not entries and status is LoadStatus.LOADED:
        status, reason = LoadStatus.ERROR, "empty"
    if status is LoadStatus.LOADED:
        try:
            parse_uri(final)
        except MalformedUri:
            status, reason = LoadStatus.ERROR, "final-uri"

    return PageLoadResult(
        requested_uri=requested,
        final_uri=final,
        status=status,
        error_reason=reason,
        started_at=parse_timestamp(started) if started else None,
        settle_seconds=int(page.get("_settleSeconds", 0)),
        requests=requests,
        cookies=cookies,
    )


def _custom_cookie(c) -> CapturedCookie:
    return CapturedCookie(
        name=c["name"],
        domain_attribute=c.get("domain", ""),
        source=CookieSource(c.get("source", CookieSource.HEADER.value)),
        timestamp=parse_timestamp(c["timestamp"]) if c.get("timestamp") else None,
        domain_wide=bool(c.get("domainWide", False)),
    )


def _iso(stamp):
    return stamp.isoformat().replace("+00:00", "Z") if stamp else None


def to_har(results, creator="webcensus") -> dict:
    """Serialize captured pages as HAR 1.2.

    Cookies travel in the page-level ``_cookies`` list because script-set
    cookies have no originating response header.
    """
    pages, entries = [], []
    for i, res in enumerate(results):
        page_id = f"page_{i + 1}"
        pages.append({
            "id": page_id,
            "title": res.final_uri,
            "startedDateTime": _iso(res.started_at),
            "pageTimings": {},
            "_requestedUri": res.requested_uri,
            "_finalUri": res.final_uri,
            "_status": res.status.value,
            **({"_error": res.error_reason} if res.error_reason else {}),
            "_settleSeconds": res.settle_seconds,
            "_cookies": [
                {"name": c.name, "domain": c.domain_attribute, "source": c.source.value,
                 "timestamp": _iso(c.timestamp), "domainWide": c.domain_wide}
                for c in res.cookies
            ],
        })
        for req in res.requests:
            headers = []
            if req.referer is not None:
                headers.append({"name": "Referer", "value": req.referer})
            if req.user_agent is not None:
                headers.append({"name": "User-Agent", "value": req.user_agent})
            entries.append({
                "pageref": page_id,
                "startedDateTime": _iso(req.timestamp or res.started_at),
                "time": 0,
                "request": {"method": req.method, "url": req.uri, "httpVersion": "HTTP/1.1",
                            "headers": headers, "queryString": [], "cookies": [],
                            "headersSize": -1, "bodySize": -1},
                "response": {"status": req.response_status or 0, "statusText": "", "httpVersion": "HTTP/1.1",
                             "headers": [], "cookies": [],
                             "content": {"size": 0, "mimeType": req.content_type or ""},
                             "redirectURL": "", "headersSize": -1, "bodySize": -1},
                "cache": {}, "timings": {"send": 0, "wait": 0, "receive": 0},
            })
    return {"log": {"version": "1.2", "creator": {"name": creator, "version": "1"},
                    "pages": pages, "entries": entries}}


def read_har_file(path) -> list[PageLoadResult]:
    return ingest_har(Path(path).read_bytes())


def iter_har_paths(sources):
    """Expand files and directories into a sorted list of ``*.har`` paths."""
    paths = []
    for src in sources:
        src = Path(src)
        if src.is_dir():
            paths.extend(sorted(src.rglob("*.har")))
        else:
            paths.append(src)
    return paths
