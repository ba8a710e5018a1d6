"""Synthetic HAR corpus with known ground truth.

Pages are laid out on a line of positions 0..9999. Every third-party
element is requested by a contiguous run of positions, and the runs are
nested so that page flags come out exactly:

    [0, 7100)  third-party cookie, script and request
    [7100, 8600)  script and request, no cookie
    [8600, 9100)  request only
    [9100, 10000)  first-party traffic only

Category membership of each segment is fixed per TLD, which pins the
per-category prevalence. Owner reach and the top-element table follow
from the run lengths. Run ``python -m webcensus.fixtures OUT_DIR`` to
write the corpus.
"""
from __future__ import annotations

import argparse
import json
import random
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import yaml

from .leakage import load_lexicon
from .ownership import load_owner_db_file

LOADED_PAGES = 10_000
PAGES_PER_HAR = 100
EMPTY_PAGES = 30
TIMEOUT_PAGES = 20
HTTPS_PAGES = 324
SENSITIVE_PAGES = 7_000

REQUEST_END = 9_100
SCRIPT_END = 8_600
COOKIE_END = 7_100

# pages per (segment, category); segments in position order
SEGMENTS = [
    {"com": 4100, "edu": 500, "gov": 210, "org": 1560, "other": 730},
    {"com": 450, "edu": 230, "gov": 610, "org": 140, "other": 70},
    {"com": 100, "edu": 30, "gov": 80, "org": 180, "other": 110},
    {"com": 350, "edu": 240, "gov": 100, "org": 120, "other": 90},
]

OTHER_SUFFIXES = ["co.uk", "org.au", "de", "net", "info", "ca"]
USER_AGENT = ("Mozilla/5.0 (Macintosh; Intel Mac OS X 10_9_2) AppleWebKit/537.36 "
              "(KHTML, like Gecko) Chrome/34.0.1847.116 Safari/537.36")
EPOCH = datetime(2014, 4, 1, tzinfo=timezone.utc)

# owner id -> [start, stop) positions
OWNER_RUNS = {
    "google": (0, 7800),
    "comscore": (4800, 8600),
    "facebook": (6000, 9100),
    "appnexus": (0, 2200),
    "addthis": (2200, 4000),
    "twitter": (5000, 6800),
    "quantcast": (3000, 4600),
    "amazon": (7000, 8600),
    "adobe": (100, 1200),
    "yahoo": (1500, 2600),
    "experian": (0, 500),
    "acxiom": (200, 500),
}

JS = "application/javascript"
HTML = "text/html"
GIF = "image/gif"
PNG = "image/png"
CSS = "text/css"


@dataclass(frozen=True)
class ElementSpec:
    owner: str | None
    url: str
    start: int
    stop: int
    content_type: str
    query: str | None = None  # formatted with the page position
    set_cookie: str | None = None
    repeat: int = 1

    @property
    def script(self) -> bool:
        return self.url.endswith(".js") or "javascript" in self.content_type

    def covers(self, pos: int) -> bool:
        return self.start <= pos < self.stop


def _named_elements() -> list[ElementSpec]:
    E = ElementSpec
    return [
        # Google
        E("google", "http://www.google-analytics.com/ga.js", 0, 7800, JS),
        E("google", "http://www.google-analytics.com/__utm.gif", 0, 4500, GIF,
          query="utmwv=5.4.8&utmac=UA-{pos}-1&utmn={pos}", repeat=2),
        E("google", "http://www.google-analytics.com/collect", 0, 2500, GIF, query="v=1&tid=UA-{pos}-2"),
        E("google", "http://ad.doubleclick.net/activity", 0, COOKIE_END, GIF, query="src={pos};type=health",
          set_cookie="IDE=AHWqTU{pos}; expires=Fri, 01-Apr-2016 00:00:00 GMT; path=/; domain=.doubleclick.net",
          repeat=3),
        E("google", "http://ajax.googleapis.com/ajax/libs/jquery/1.8.3/jquery.min.js", 0, 3000, JS),
        E("google", "http://ajax.googleapis.com/ajax/libs/jqueryui/1.10.3/themes/smoothness/jquery-ui.css",
          0, 2000, CSS),
        E("google", "http://www.googletagservices.com/tag/js/gpt.js", 1000, 3500, JS),
        E("google", "http://s0.2mdn.net/879366/flashwrite_1_2.js", 500, 1500, JS),
        E("google", "http://www.googletagmanager.com/gtm.js", 4000, 5500, JS, query="id=GTM-{pos}"),
        E("google", "http://www.google.com/jsapi", 2000, 4000, "text/javascript", query="autoload={pos}"),
        E("google", "http://www.youtube.com/embed/videoseries", 3000, 3600, HTML, query="list=PL{pos}"),
        E("google", "http://s.ytimg.com/yts/cssbin/www-embed-player.css", 3000, 3500, CSS),
        E("google", "http://pagead2.googlesyndication.com/pagead/images/ad_choices_en.png", 0, 1200, PNG),
        E("google", "http://www.googleadservices.com/pagead/conversion.php", 1200, 1900, HTML, query="cid={pos}"),
        # comScore
        E("comscore", "http://b.scorecardresearch.com/beacon.js", 4800, 8600, JS),
        E("comscore", "http://b.scorecardresearch.com/b", 4800, 8000, GIF, query="c1=2&c2={pos}"),
        E("comscore", "http://b.scorecardresearch.com/p", 5000, 6000, GIF, query="c1=7&c2={pos}"),
        # Facebook
        E("facebook", "http://connect.facebook.net/en_US/all.js", 6000, SCRIPT_END, JS),
        E("facebook", "http://static.ak.fbcdn.net/rsrc.php/v2/yN/r/like_button.png", 7500, REQUEST_END, PNG),
        E("facebook", "http://www.facebook.com/plugins/like.php", 7600, 8400, HTML, query="href=page{pos}"),
        E("facebook", "http://www.facebook.com/tr", 6000, 7000, GIF, query="id={pos}&ev=PageView"),
        E("facebook", "http://static.ak.fbcdn.net/rsrc.php/v2/yK/r/styles.css", 6000, 7200, CSS),
        # AppNexus
        E("appnexus", "http://ib.adnxs.com/seg", 0, 2200, GIF, query="add={pos}",
          set_cookie="uuid2=81{pos}; path=/; domain=.adnxs.com; HttpOnly"),
        E("appnexus", "http://secure.adnxs.com/px", 0, 1500, GIF, query="id={pos}&t=2"),
        E("appnexus", "http://ib.adnxs.com/getuid", 500, 1200, GIF),
        E("appnexus", "http://cdn.adnxs.com/px/blank.gif", 0, 1100, GIF),
        E("appnexus", "http://ib.adnxs.com/if.html", 0, 900, HTML),
        # AddThis
        E("addthis", "http://s7.addthis.com/js/300/addthis_widget.js", 2200, 4000, JS, query="pubid=ra-{pos}"),
        E("addthis", "http://m.addthis.com/live/red_lojson/300lo.json", 2200, 3500, "application/json"),
        # Twitter
        E("twitter", "http://platform.twitter.com/widgets.js", 5000, 6800, JS),
        E("twitter", "http://syndication.twitter.com/i/jot", 5000, 6000, HTML),
        E("twitter", "http://platform.twitter.com/widgets/images/tweet.png", 5000, 6200, PNG),
        E("twitter", "http://platform.twitter.com/widgets/tweet_button.html", 5000, 6000, HTML),
        # Quantcast
        E("quantcast", "http://edge.quantserve.com/quant.js", 3000, 4600, JS),
        E("quantcast", "http://pixel.quantserve.com/pixel", 3000, 4600, GIF, query="a=p-{pos}"),
        E("quantcast", "http://pixel.quantserve.com/pixel/p-health.gif", 3000, 3900, GIF),
        E("quantcast", "http://edge.quantserve.com/choice.html", 3000, 3500, HTML),
        # Amazon
        E("amazon", "http://c.amazon-adsystem.com/aax2/amzn_ads.js", 7000, SCRIPT_END, JS),
        E("amazon", "http://aax.amazon-adsystem.com/e/dtb/bid", 7000, 8000, JS, query="src={pos}"),
        E("amazon", "http://g-ecx.images-amazon.com/images/G/01/ads/adchoices.png", 7000, 7900, PNG),
        E("amazon", "http://s3.amazonaws.com/fixture-ads/creative.swf", 7000, 7800, "application/x-shockwave-flash"),
        # Adobe
        E("adobe", "http://assets.adobedtm.com/satelliteLib.js", 100, 1200, JS),
        E("adobe", "http://healthrs.112.2o7.net/b/ss/healthrs/1/JS-1", 100, 1000, GIF, query="pageName=p{pos}"),
        E("adobe", "http://dpm.demdex.net/id.aspx", 200, 900, HTML, query="d_visid={pos}"),
        # Yahoo!
        E("yahoo", "http://s.yimg.com/zz/combo/yui-min.js", 1500, 2600, JS),
        E("yahoo", "http://ads.yahoo.com/pixel", 1500, 2300, GIF, query="id={pos}"),
        E("yahoo", "http://s.yimg.com/rq/darla/blank.gif", 1500, 2400, GIF),
        E("yahoo", "http://analytics.yahoo.com/fpc.pl", 1500, 2000, HTML),
        # data brokers
        E("experian", "http://pixel.experian.com/track", 0, 500, GIF, query="uid={pos}"),
        E("acxiom", "http://tag.acxiomdigital.com/sync", 200, 500, GIF),
    ]


def filler_owners() -> list[dict]:
    """Synthetic owners that put Experian at rank 31 and Acxiom at rank 47."""
    owners = []
    for k in range(20):
        count = 1000 - 20 * k
        start = (k * 331) % (SCRIPT_END - count)
        owners.append({"id": f"fixture-a{k + 1:02d}", "display_name": f"Fixture Adnet {k + 1:02d}",
                       "revenue_model": "Advertising", "domains": [f"trk{k + 1:02d}-metrics.com"],
                       "run": (start, start + count), "script": True})
    for k in range(15):
        count = 480 - 10 * k
        start = (k * 587) % (REQUEST_END - count)
        owners.append({"id": f"fixture-b{k + 1:02d}", "display_name": f"Fixture Exchange {k + 1:02d}",
                       "revenue_model": "Advertising", "domains": [f"px{k + 1:02d}-exchange.net"],
                       "run": (start, start + count), "script": False})
    return owners


def _filler_elements() -> list[ElementSpec]:
    out = []
    for k, owner in enumerate(filler_owners()):
        start, stop = owner["run"]
        domain = owner["domains"][0]
        if owner["script"]:
            out.append(ElementSpec(owner["id"], f"http://cdn.{domain}/tag.js", start, stop, JS))
            if k < 15:
                out.append(ElementSpec(owner["id"], f"http://cdn.{domain}/collect", start, (start + stop) // 2,
                                       GIF, query="cb={pos}"))
        else:
            out.append(ElementSpec(owner["id"], f"http://px.{domain}/sync", start, stop, GIF, query="uid={pos}"))
    return out


def element_specs() -> list[ElementSpec]:
    specs = _named_elements() + _filler_elements()
    for spec in specs:
        if spec.owner in OWNER_RUNS:
            lo, hi = OWNER_RUNS[spec.owner]
            assert lo <= spec.start and spec.stop <= hi, spec
        assert spec.stop <= REQUEST_END, spec
        assert not spec.script or spec.stop <= SCRIPT_END, spec
        assert not spec.set_cookie or spec.stop <= COOKIE_END, spec
    return specs


def _tail_elements(pos: int, host_suffix: str) -> list[tuple[str, str]]:
    """Low-prevalence, unattributed third-party requests."""
    out = []
    if pos < SCRIPT_END and pos % 50 == 0:
        out.append((f"http://widgets.tail{(pos // 50) % 40:02d}.com/embed.js", JS))
    if pos < REQUEST_END and host_suffix == "co.uk":
        out.append((f"http://cdn.partner{pos}.co.uk/badge.png", PNG))
    return out


@dataclass(frozen=True)
class PagePlan:
    pos: int
    category: str
    site: str  # registrable domain of the page
    path: str
    https: bool
    redirect: bool

    @property
    def final_uri(self) -> str:
        return f"{'https' if self.https else 'http'}://www.{self.site}{self.path}"

    @property
    def requested_uri(self) -> str:
        return f"http://{self.site}/go{self.path}" if self.redirect else self.final_uri


_SITE_WORDS = {"com": "healthsite", "org": "foundation", "gov": "agency", "edu": "univ", "other": "clinic"}


def _sensitive_terms() -> list[str]:
    return sorted(t for t in load_lexicon().terms if t.replace(" ", "").isalnum())


def plan_pages(seed: int = 2014) -> list[PagePlan]:
    rng = random.Random(seed)
    categories = []
    for segment in SEGMENTS:
        block = [cat for cat, n in sorted(segment.items()) for _ in range(n)]
        rng.shuffle(block)
        categories.extend(block)
    assert len(categories) == LOADED_PAGES
    https = set(rng.sample(range(LOADED_PAGES), HTTPS_PAGES))
    sensitive = set(rng.sample(range(LOADED_PAGES), SENSITIVE_PAGES))
    terms = _sensitive_terms()
    plans = []
    for pos, cat in enumerate(categories):
        if cat == "other":
            suffix = OTHER_SUFFIXES[pos % len(OTHER_SUFFIXES)]
        else:
            suffix = cat
        site = f"{_SITE_WORDS[cat]}{pos:05d}.{suffix}"
        if pos in sensitive:
            term = terms[pos % len(terms)].replace(" ", "-")
            path = [f"/conditions/{term}/", f"/health/{term}-overview", f"/search?q={term}"][pos % 3]
        else:
            path = [f"/pubmed/{21722252 + pos}", f"/article/{pos}", f"/news/story-{pos}"][pos % 3]
        plans.append(PagePlan(pos, cat, site, path, pos in https, pos % 9 == 0))
    return plans


def _entry(page_id, when, url, referer, status=200, mime=HTML, set_cookies=(), redirect=""):
    req_headers = [{"name": "User-Agent", "value": USER_AGENT}]
    if referer:
        req_headers.append({"name": "Referer", "value": referer})
    resp_headers = [{"name": "Content-Type", "value": mime}] if mime else []
    resp_headers += [{"name": "Set-Cookie", "value": c} for c in set_cookies]
    if redirect:
        resp_headers.append({"name": "Location", "value": redirect})
    return {
        "pageref": page_id,
        "startedDateTime": when.isoformat().replace("+00:00", "Z"),
        "time": 12,
        "request": {"method": "GET", "url": url, "httpVersion": "HTTP/1.1", "headers": req_headers,
                    "queryString": [], "cookies": [], "headersSize": -1, "bodySize": 0},
        "response": {"status": status, "statusText": "", "httpVersion": "HTTP/1.1", "headers": resp_headers,
                     "cookies": [], "content": {"size": 0, "mimeType": mime}, "redirectURL": redirect,
                     "headersSize": -1, "bodySize": 0},
        "cache": {},
        "timings": {"send": 0, "wait": 10, "receive": 2},
    }


def page_entries(plan: PagePlan, page_id: str, specs: list[ElementSpec]) -> list[dict]:
    start = EPOCH + timedelta(seconds=40 * plan.pos)
    tick = iter(range(1, 10_000))

    def at():
        return start + timedelta(milliseconds=15 * next(tick))

    final = plan.final_uri
    entries = []
    if plan.redirect:
        entries.append(_entry(page_id, start, plan.requested_uri, None, 301, "", redirect=final))
    entries.append(_entry(page_id, at(), final, None, set_cookies=(
        f"JSESSIONID=s{plan.pos}; Path=/; HttpOnly", f"site_pref=1; Domain=.{plan.site}; Path=/")))
    base = f"{final.split('://')[0]}://"
    entries.append(_entry(page_id, at(), f"{base}www.{plan.site}/images/logo.gif", final, mime=GIF))
    entries.append(_entry(page_id, at(), f"{base}static.{plan.site}/css/site.css", final, mime=CSS))
    entries.append(_entry(page_id, at(), f"{base}static.{plan.site}/js/site.js?v=3", final, mime=JS))
    for spec in specs:
        if not spec.covers(plan.pos):
            continue
        for r in range(spec.repeat):
            url = spec.url
            if spec.query:
                url += "?" + spec.query.format(pos=plan.pos) + (f"&r={r}" if r else "")
            cookies = (spec.set_cookie.format(pos=plan.pos),) if spec.set_cookie else ()
            entries.append(_entry(page_id, at(), url, final, mime=spec.content_type, set_cookies=cookies))
    suffix = plan.site.split(".", 1)[1]
    for url, mime in _tail_elements(plan.pos, suffix):
        entries.append(_entry(page_id, at(), url, final, mime=mime))
    if plan.pos % 97 == 0:
        entries.append(_entry(page_id, at(), "data:image/gif;base64,R0lGODlhAQABAAAAACw=", final, mime=GIF))
    return entries


def _failed_pages(specs) -> list[tuple[dict, list[dict]]]:
    out = []
    for k in range(EMPTY_PAGES):
        uri = f"http://www.unreachable{k:03d}.com/conditions/asthma/"
        out.append(({"id": f"empty_{k}", "title": uri, "_requestedUri": uri, "_status": "error",
                     "_error": "empty" if k % 2 else "dns", "pageTimings": {},
                     "startedDateTime": (EPOCH + timedelta(days=2, seconds=k)).isoformat().replace("+00:00", "Z")},
                    []))
    for k in range(TIMEOUT_PAGES):
        plan = PagePlan(k, "com", f"slowsite{k:03d}.com", "/conditions/migraine/", False, False)
        page_id = f"timeout_{k}"
        entries = page_entries(plan, page_id, specs)[:6]
        out.append(({"id": page_id, "title": plan.final_uri, "_status": "timeout",
                     "startedDateTime": entries[0]["startedDateTime"], "pageTimings": {}}, entries))
    return out


def fixture_owner_db() -> dict:
    base = load_owner_db_file()
    owners = [{"id": r.id, "display_name": r.display_name, "revenue_model": r.revenue_model,
               "domains": sorted(r.domains)} for r in base.records]
    owners += [{k: v for k, v in o.items() if k not in ("run", "script")} for o in filler_owners()]
    return {"version": f"fixture-{base.version}", "built_at": "2014-04-30T00:00:00+00:00", "owners": owners}


@dataclass
class CorpusFiles:
    har_dir: Path
    har_files: list[Path]
    ownership_db: Path
    pages: int


def write_corpus(out_dir, seed: int = 2014) -> CorpusFiles:
    """Write HAR files (100 pages each) and the matching ownership database."""
    out_dir = Path(out_dir)
    har_dir = out_dir / "har"
    har_dir.mkdir(parents=True, exist_ok=True)
    specs = element_specs()
    pages = []
    for plan in plan_pages(seed):
        page_id = f"page_{plan.pos:05d}"
        entries = page_entries(plan, page_id, specs)
        page = {"id": page_id, "title": plan.final_uri, "startedDateTime": entries[0]["startedDateTime"],
                "pageTimings": {"onLoad": 1800}, "_settleSeconds": 30}
        pages.append((page, entries))
    pages.extend(_failed_pages(specs))

    files = []
    for i in range(0, len(pages), PAGES_PER_HAR):
        chunk = pages[i:i + PAGES_PER_HAR]
        doc = {"log": {"version": "1.2", "creator": {"name": "webcensus-fixtures", "version": "1"},
                       "pages": [p for p, _ in chunk], "entries": [e for _, es in chunk for e in es]}}
        path = har_dir / f"corpus_{i // PAGES_PER_HAR:04d}.har"
        path.write_text(json.dumps(doc, separators=(",", ":")), encoding="utf-8")
        files.append(path)
    db_path = out_dir / "owners.yaml"
    db_path.write_text(yaml.safe_dump(fixture_owner_db(), sort_keys=False), encoding="utf-8")
    return CorpusFiles(har_dir, files, db_path, len(pages))


def leakage_fixture_uris() -> list[str]:
    """100 page URIs, exactly 70 of which carry a lexicon term in path or query."""
    terms = _sensitive_terms()
    uris = []
    for i in range(100):
        if i % 10 < 7:
            term = terms[(i * 7) % len(terms)].replace(" ", "-")
            uris.append(f"http://www.site{i:03d}.org/conditions/{term}/")
        else:
            uris.append(f"http://www.ncbi{i:03d}.nih.gov/pubmed/{21722252 + i}")
    return uris


# --- two-host site for the live capture smoke test -----------------------

SITE_FILES = {
    "index.html": """<!doctype html>
<html><head>
<meta name="referrer" content="unsafe-url">
<link rel="icon" href="data:,">
<link rel="stylesheet" href="/style.css">
<title>Asthma overview</title>
</head><body>
<img src="/logo.png" alt="">
<script src="http://{third}/tracker.js"></script>
</body></html>
""",
    "style.css": "body { font-family: sans-serif; }\n",
    "tracker.js": "new Image().src = 'http://{third}/pixel.gif';\n",
}
# 1x1 transparent GIF, used for both the logo and the tracking pixel
PIXEL = bytes.fromhex("47494638396101000100800000000000ffffff21f90401000000002c00000000010001000002024401003b")


def write_fixture_site(root, third_party_host: str) -> Path:
    """Static site served under two host names: the page on one, the tracker on the other."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for name, text in SITE_FILES.items():
        (root / name).write_text(text.replace("{third}", third_party_host), encoding="utf-8")
    (root / "logo.png").write_bytes(PIXEL)
    (root / "pixel.gif").write_bytes(PIXEL)
    return root / "index.html"


def expected_site_requests(page_host: str, third_party_host: str) -> list[tuple[str, str | None]]:
    """(uri, referer) for every request a browser makes loading the site's index page."""
    page = f"http://{page_host}/index.html"
    return [
        (page, None),
        (f"http://{page_host}/style.css", page),
        (f"http://{page_host}/logo.png", page),
        (f"http://{third_party_host}/tracker.js", page),
        (f"http://{third_party_host}/pixel.gif", page),
    ]


def expected_element_classes() -> Counter:
    """Class tally over element specs (generator self-check, not a test oracle)."""
    from .uri import extract_extension
    return Counter(extract_extension(s.url).kind.value for s in element_specs())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Write the synthetic census corpus.")
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=2014)
    args = parser.parse_args(argv)
    files = write_corpus(args.out_dir, args.seed)
    print(f"{files.pages} pages in {len(files.har_files)} HAR files under {files.har_dir}")
    print(f"ownership db: {files.ownership_db}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
