"""Live capture through a headless browser's remote-debugging endpoint.

Only a handful of DevTools protocol methods are used: browser-context
creation (fresh cookie jar per page), navigation, Network events and
cookie enumeration.  Every page runs in its own disposable context.
"""
from __future__ import annotations

import json
import logging
import time
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone

from websockets.exceptions import WebSocketException
from websockets.sync.client import connect

from ..errors import CaptureError, MalformedUri
from ..uri import parse_uri
from .models import (CapturedCookie, CapturedRequest, CookieSource, LoadStatus,
                     PageLoadResult, parse_set_cookie)
from .pagelist import PageListEntry

log = logging.getLogger(__name__)

DNS_ERRORS = ("ERR_NAME_NOT_RESOLVED", "ERR_NAME_RESOLUTION_FAILED")


@dataclass(frozen=True)
class CaptureSettings:
    endpoint: str = "127.0.0.1:9222"  # host:port, or a ws:// debugger URL
    settle_seconds: float = 30
    hard_timeout_seconds: float = 60


def debugger_url(endpoint: str, timeout: float = 5.0) -> str:
    if endpoint.startswith(("ws://", "wss://")):
        return endpoint
    try:
        with urllib.request.urlopen(f"http://{endpoint}/json/version", timeout=timeout) as resp:
            return json.load(resp)["webSocketDebuggerUrl"]
    except (OSError, ValueError, KeyError) as exc:
        raise CaptureError("endpoint", f"{endpoint}: {exc}") from None


class CdpSession:
    """Request/response multiplexing over one DevTools websocket."""

    def __init__(self, ws):
        self.ws = ws
        self.next_id = 0
        self.events: list[dict] = []

    def send(self, method, params=None, session_id=None, timeout=30.0):
        self.next_id += 1
        msg = {"id": self.next_id, "method": method, "params": params or {}}
        if session_id:
            msg["sessionId"] = session_id
        self.ws.send(json.dumps(msg))
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError(method)
            reply = json.loads(self.ws.recv(timeout=remaining))
            if reply.get("id") == self.next_id:
                if "error" in reply:
                    raise CaptureError("protocol", f"{method}: {reply['error'].get('message')}")
                return reply.get("result", {})
            self.events.append(reply)

    def poll(self, timeout):
        """Buffered events first, then whatever arrives within ``timeout`` seconds."""
        if self.events:
            return self.events.pop(0)
        try:
            return json.loads(self.ws.recv(timeout=max(timeout, 0.0)))
        except TimeoutError:
            return None


class _Recorder:
    def __init__(self, started_at: datetime):
        self.started_at = started_at
        self.order: list[str] = []
        self.requests: dict[str, dict] = {}
        self.header_cookies: list[CapturedCookie] = []
        self.final_uri: str | None = None
        self.loaded = False

    def _slot(self, rid):
        if rid not in self.requests:
            self.order.append(rid)
            self.requests[rid] = {"headers": {}}
        return self.requests[rid]

    def handle(self, event):
        method, p = event.get("method"), event.get("params", {})
        if method == "Network.requestWillBeSent":
            rid = p["requestId"]
            if rid in self.requests and "url" in self.requests[rid]:
                rid = f"{rid}:{len(self.order)}"  # redirect hop reuses the id
            slot = self._slot(rid)
            slot.update(url=p["request"]["url"], method=p["request"].get("method", "GET"),
                        wall=p.get("wallTime"))
            slot["headers"].update({k.lower(): v for k, v in p["request"].get("headers", {}).items()})
        elif method == "Network.requestWillBeSentExtraInfo":
            self._slot(p["requestId"])["headers"].update({k.lower(): v for k, v in p.get("headers", {}).items()})
        elif method == "Network.responseReceived":
            resp = p.get("response", {})
            slot = self._slot(p["requestId"])
            slot.update(status=resp.get("status"), mime=resp.get("mimeType"))
        elif method == "Network.responseReceivedExtraInfo":
            slot = self._slot(p["requestId"])
            for k, v in p.get("headers", {}).items():
                if k.lower() == "set-cookie":
                    host = _host_of(slot.get("url"))
                    for line in str(v).split("\n"):
                        cookie = parse_set_cookie(line, host, _wall(slot.get("wall")))
                        if cookie is not None:
                            self.header_cookies.append(cookie)
        elif method == "Page.frameNavigated":
            frame = p.get("frame", {})
            if not frame.get("parentId"):
                self.final_uri = frame.get("url")
        elif method == "Page.loadEventFired":
            self.loaded = True

    def captured_requests(self) -> list[CapturedRequest]:
        out = []
        for rid in self.order:
            slot = self.requests[rid]
            if "url" not in slot or slot["url"].startswith("about:"):
                continue
            out.append(CapturedRequest(
                uri=slot["url"],
                method=slot.get("method", "GET"),
                referer=slot["headers"].get("referer"),
                user_agent=slot["headers"].get("user-agent"),
                response_status=slot.get("status"),
                content_type=slot.get("mime"),
                timestamp=_wall(slot.get("wall")) or self.started_at,
            ))
        return out


def _wall(value):
    return datetime.fromtimestamp(value, tz=timezone.utc) if value else None


def _host_of(url):
    try:
        return parse_uri(url).host
    except MalformedUri:
        return None


def capture_live(entry: PageListEntry | str, settings: CaptureSettings = CaptureSettings()) -> PageLoadResult:
    """Load one page in a fresh browser context and record its traffic.

    The page is given ``settle_seconds`` after navigation (longer if the
    load event has not fired yet), never more than ``hard_timeout_seconds``.
    """
    uri = entry.normalized_uri if isinstance(entry, PageListEntry) else entry
    started = datetime.now(timezone.utc)
    result = PageLoadResult(requested_uri=uri, final_uri=uri, started_at=started,
                            settle_seconds=int(settings.settle_seconds))
    try:
        ws_url = debugger_url(settings.endpoint)
        ws = connect(ws_url, max_size=None, open_timeout=10)
    except (CaptureError, OSError, WebSocketException) as exc:
        log.warning("browser endpoint unreachable: %s", exc)
        result.status, result.error_reason = LoadStatus.ERROR, "endpoint"
        return result

    with ws:
        cdp = CdpSession(ws)
        context_id = None
        try:
            context_id = cdp.send("Target.createBrowserContext", {"disposeOnDetach": True})["browserContextId"]
            target = cdp.send("Target.createTarget", {"url": "about:blank", "browserContextId": context_id})
            session = cdp.send("Target.attachToTarget", {"targetId": target["targetId"], "flatten": True})["sessionId"]
            cdp.send("Network.enable", session_id=session)
            cdp.send("Page.enable", session_id=session)
            _navigate_and_record(cdp, session, uri, settings, result, started)
            if result.status is not LoadStatus.ERROR:
                cookies = cdp.send("Storage.getCookies", {"browserContextId": context_id}).get("cookies", [])
                result.cookies = _merge_cookies(result.cookies, cookies, started)
        except (TimeoutError, WebSocketException, CaptureError) as exc:
            log.warning("capture of %s aborted: %s", uri, exc)
            if result.status is LoadStatus.LOADED:
                result.status, result.error_reason = LoadStatus.ERROR, "protocol"
        finally:
            if context_id:
                try:
                    cdp.send("Target.disposeBrowserContext", {"browserContextId": context_id}, timeout=5)
                except Exception:  # browser may already be gone
                    pass
    return result


def _navigate_and_record(cdp, session, uri, settings, result, started):
    rec = _Recorder(started)
    t0 = time.monotonic()
    hard_deadline = t0 + settings.hard_timeout_seconds
    settle_deadline = t0 + settings.settle_seconds
    nav = cdp.send("Page.navigate", {"url": uri}, session_id=session, timeout=settings.hard_timeout_seconds)
    error_text = nav.get("errorText")
    if error_text:
        result.status = LoadStatus.ERROR
        result.error_reason = "dns" if any(code in error_text for code in DNS_ERRORS) else error_text
    while result.status is LoadStatus.LOADED:
        now = time.monotonic()
        if now >= hard_deadline:
            result.status = LoadStatus.TIMEOUT
            break
        if now >= settle_deadline and rec.loaded:
            break
        event = cdp.poll(min(hard_deadline, max(settle_deadline, now + 0.05)) - now)
        if event is not None and event.get("sessionId") in (None, session):
            rec.handle(event)
    result.requests = rec.captured_requests()
    result.cookies = list(rec.header_cookies)
    if rec.final_uri:
        result.final_uri = rec.final_uri


def _merge_cookies(header_cookies, jar, started):
    seen = {(c.name, c.domain_attribute) for c in header_cookies}
    merged = list(header_cookies)
    for c in jar:
        cookie = CapturedCookie.from_attribute(c.get("name", ""), c.get("domain", ""), CookieSource.SCRIPT, started)
        if (cookie.name, cookie.domain_attribute) not in seen:
            seen.add((cookie.name, cookie.domain_attribute))
            merged.append(cookie)
    return merged


def probe_endpoint(endpoint: str) -> str:
    """Fail fast with ``CaptureError('endpoint')`` when no browser is listening."""
    url = debugger_url(endpoint)
    try:
        with connect(url, open_timeout=5):
            pass
    except (OSError, WebSocketException) as exc:
        raise CaptureError("endpoint", str(exc)) from None
    return url
