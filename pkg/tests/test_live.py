"""Live capture against a scripted fake DevTools endpoint. The real-browser run lives in the acceptance suite."""
import json
import threading

import pytest
from websockets.sync.server import serve

from webcensus.capture import CookieSource, LoadStatus
from webcensus.capture.live import CaptureSettings, capture_live, probe_endpoint
from webcensus.classify import analyze_page
from webcensus.errors import CaptureError
from webcensus.fixtures import expected_site_requests

PAGE_HOST, THIRD_HOST = "127.0.0.1:8731", "localhost:8731"
FAST = dict(settle_seconds=0.2, hard_timeout_seconds=3)


def _events(session, load=True):
    page = f"http://{PAGE_HOST}/index.html"
    out = []
    for i, (uri, referer) in enumerate(expected_site_requests(PAGE_HOST, THIRD_HOST)):
        headers = {"User-Agent": "FakeChrome/1"}
        if referer:
            headers["Referer"] = referer
        out.append({"method": "Network.requestWillBeSent", "sessionId": session,
                    "params": {"requestId": str(i), "wallTime": 1396310400 + i,
                               "request": {"url": uri, "method": "GET", "headers": headers}}})
        mime = "application/javascript" if uri.endswith(".js") else "text/html"
        out.append({"method": "Network.responseReceived", "sessionId": session,
                    "params": {"requestId": str(i), "response": {"status": 200, "mimeType": mime}}})
        if uri.endswith("tracker.js"):
            out.append({"method": "Network.responseReceivedExtraInfo", "sessionId": session,
                        "params": {"requestId": str(i), "headers": {"set-cookie": "uid=7; Domain=localhost"}}})
    out.append({"method": "Page.frameNavigated", "sessionId": session, "params": {"frame": {"id": "f", "url": page}}})
    if load:
        out.append({"method": "Page.loadEventFired", "sessionId": session, "params": {}})
    return out


class FakeBrowser:
    def __init__(self, nav_error=None, load=True):
        self.nav_error = nav_error
        self.load = load
        self.calls = []
        self.server = serve(self.handler, "127.0.0.1", 0)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        return f"ws://127.0.0.1:{self.server.socket.getsockname()[1]}/devtools/browser/fake"

    def handler(self, ws):
        for raw in ws:
            msg = json.loads(raw)
            self.calls.append(msg["method"])
            result = {}
            if msg["method"] == "Target.createBrowserContext":
                result = {"browserContextId": "ctx1"}
            elif msg["method"] == "Target.createTarget":
                result = {"targetId": "t1"}
            elif msg["method"] == "Target.attachToTarget":
                result = {"sessionId": "s1"}
            elif msg["method"] == "Page.navigate":
                if self.nav_error:
                    result = {"frameId": "f", "errorText": self.nav_error}
                else:
                    for event in _events("s1", self.load):
                        ws.send(json.dumps(event))
                    result = {"frameId": "f"}
            elif msg["method"] == "Storage.getCookies":
                result = {"cookies": [{"name": "seen", "domain": "127.0.0.1"},
                                      {"name": "uid", "domain": "localhost"}]}
            ws.send(json.dumps({"id": msg["id"], "result": result}))

    def close(self):
        self.server.shutdown()


@pytest.fixture
def browser():
    fake = FakeBrowser()
    yield fake
    fake.close()


def test_capture_records_requests_referers_and_cookies(browser):
    result = capture_live(f"http://{PAGE_HOST}/index.html", CaptureSettings(browser.url, **FAST))
    assert result.status is LoadStatus.LOADED
    assert [(r.uri, r.referer) for r in result.requests] == expected_site_requests(PAGE_HOST, THIRD_HOST)
    assert result.requests[3].content_type == "application/javascript"
    assert {(c.name, c.domain_attribute, c.source) for c in result.cookies} == {
        ("uid", "localhost", CookieSource.HEADER), ("seen", "127.0.0.1", CookieSource.SCRIPT)}
    assert browser.calls[0] == "Target.createBrowserContext"
    assert browser.calls[-1] == "Target.disposeBrowserContext"
    page = analyze_page(result)
    assert page.flags.has_third_party_javascript and page.flags.has_third_party_cookie


def test_missing_load_event_times_out():
    fake = FakeBrowser(load=False)
    try:
        result = capture_live("http://127.0.0.1:8731/index.html",
                              CaptureSettings(fake.url, settle_seconds=0.1, hard_timeout_seconds=0.5))
    finally:
        fake.close()
    assert result.status is LoadStatus.TIMEOUT


def test_dns_failure_is_error_dns():
    fake = FakeBrowser(nav_error="net::ERR_NAME_NOT_RESOLVED")
    try:
        result = capture_live("http://nx.invalid/", CaptureSettings(fake.url, **FAST))
    finally:
        fake.close()
    assert (result.status, result.error_reason) == (LoadStatus.ERROR, "dns")


def test_unreachable_endpoint(tmp_path):
    result = capture_live("http://a.com/", CaptureSettings("ws://127.0.0.1:9/devtools", **FAST))
    assert (result.status, result.error_reason) == (LoadStatus.ERROR, "endpoint")
    with pytest.raises(CaptureError) as err:
        probe_endpoint("ws://127.0.0.1:9/devtools")
    assert err.value.reason == "endpoint"


def test_probe_endpoint_accepts_live_socket(browser):
    assert probe_endpoint(browser.url) == browser.url
