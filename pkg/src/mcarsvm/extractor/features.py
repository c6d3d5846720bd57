"""Per-feature extractors.

Each function returns 1 (legitimate-looking), 0 (suspicious) or -1
(phishing-looking).  URL features take a :class:`ParsedURL`; page features
take a :class:`PageInfo` collected from the HTML.
"""
from __future__ import annotations

import ipaddress
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from html.parser import HTMLParser
from importlib import resources
from urllib.parse import urljoin, urlsplit

from .lookups import UNAVAILABLE

_SECOND_LEVEL = {"co", "com", "org", "net", "ac", "gov", "edu", "ne", "or", "go", "gob", "nic"}


class URLParseError(ValueError):
    pass


def _data_text(name: str) -> str:
    return resources.files("mcarsvm").joinpath("data", name).read_text(encoding="utf-8")


def _host_list(name: str) -> frozenset[str]:
    lines = (ln.strip().lower() for ln in _data_text(name).splitlines())
    return frozenset(ln for ln in lines if ln and not ln.startswith("#"))


@lru_cache(maxsize=None)
def default_thresholds() -> dict:
    return json.loads(_data_text("thresholds.json"))


@lru_cache(maxsize=None)
def default_shorteners() -> frozenset[str]:
    return _host_list("shorteners.txt")


@lru_cache(maxsize=None)
def default_reported_hosts() -> frozenset[str]:
    return _host_list("reported_hosts.txt")


@dataclass(frozen=True)
class ParsedURL:
    url: str  # as given, without an added scheme
    scheme: str
    host: str
    port: int | None
    path: str


def parse_url(url: str) -> ParsedURL:
    raw = url.strip()
    if not raw or any(c.isspace() for c in raw):
        raise URLParseError(f"unparseable URL: {url!r}")
    target = raw if re.match(r"^[a-zA-Z][a-zA-Z0-9+.-]*://", raw) else "http://" + raw
    try:
        parts = urlsplit(target)
        port = parts.port
    except ValueError as exc:
        raise URLParseError(f"unparseable URL: {url!r} ({exc})") from None
    host = (parts.hostname or "").lower()
    if not host:
        raise URLParseError(f"unparseable URL: {url!r} (no host)")
    return ParsedURL(raw, parts.scheme.lower(), host, port, parts.path)


def is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
        return True
    except ValueError:
        pass
    # hex or dotted-hex forms such as 0x7f.0x0.0x0.0x1
    return bool(re.fullmatch(r"(0x[0-9a-f]+)(\.0x[0-9a-f]+){0,3}|0x[0-9a-f]{8}", host))


def registered_domain(host: str) -> str:
    """Best-effort registrable domain: the last two labels, or three when the
    second-to-last is a generic second level under a country code
    (``example.co.uk``)."""
    host = host.lower().rstrip(".")
    if is_ip(host):
        return host
    labels = host.split(".")
    if len(labels) >= 3 and len(labels[-1]) == 2 and labels[-2] in _SECOND_LEVEL:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


def _band(value, legitimate_below, phishing_above) -> int:
    if value < legitimate_below:
        return 1
    if value <= phishing_above:
        return 0
    return -1


# -- address bar ---------------------------------------------------------------


def ip_address_host(u: ParsedURL) -> int:
    return -1 if is_ip(u.host) else 1


def url_length(u: ParsedURL, thresholds: dict | None = None) -> int:
    t = (thresholds or default_thresholds())["url_length"]
    return _band(len(u.url), t["legitimate_below"], t["phishing_above"])


def shortening_service(u: ParsedURL, shorteners=None) -> int:
    shorteners = default_shorteners() if shorteners is None else shorteners
    host = u.host[4:] if u.host.startswith("www.") else u.host
    return -1 if host in shorteners else 1


def at_symbol(u: ParsedURL) -> int:
    return -1 if "@" in u.url else 1


def double_slash_redirecting(u: ParsedURL, thresholds: dict | None = None) -> int:
    limit = (thresholds or default_thresholds())["double_slash_max_position"]
    full = u.url if "://" in u.url else f"{u.scheme}://{u.url}"
    return -1 if full.rfind("//") > limit - 1 else 1


def prefix_suffix(u: ParsedURL) -> int:
    return -1 if "-" in u.host else 1


def sub_domain_count(u: ParsedURL, thresholds: dict | None = None) -> int:
    """Labels in front of the registered domain: www.example.com has one."""
    t = (thresholds or default_thresholds())["sub_domain_labels"]
    if is_ip(u.host):
        n = 0
    else:
        n = u.host.count(".") - registered_domain(u.host).count(".")
    if n <= t["legitimate_max"]:
        return 1
    if n <= t["suspicious_max"]:
        return 0
    return -1


def ssl_state(u: ParsedURL) -> int:
    return 1 if u.scheme == "https" else -1


def port_check(u: ParsedURL) -> int:
    return 1 if u.port in (None, 80, 443) else -1


def https_token_in_domain(u: ParsedURL) -> int:
    return -1 if "https" in u.host else 1


def statistical_report(u: ParsedURL, reported=None) -> int:
    reported = default_reported_hosts() if reported is None else reported
    return -1 if u.host in reported or registered_domain(u.host) in reported else 1


# -- page content --------------------------------------------------------------


@dataclass
class PageInfo:
    anchors: list[str] = field(default_factory=list)
    requests: list[str] = field(default_factory=list)
    tag_links: list[str] = field(default_factory=list)
    form_actions: list[str] = field(default_factory=list)
    favicons: list[str] = field(default_factory=list)
    iframes: int = 0
    meta_refresh: int = 0
    mouseover_handlers: list[str] = field(default_factory=list)
    scripts: list[str] = field(default_factory=list)
    raw: str = ""


class _PageParser(HTMLParser):
    _REQUEST_TAGS = {"img", "audio", "video", "embed", "source", "input"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.info = PageInfo()
        self._in_script = False

    def handle_starttag(self, tag, attrs):
        a = {k.lower(): (v or "") for k, v in attrs}
        info = self.info
        if tag == "a" and "href" in a:
            info.anchors.append(a["href"].strip())
        if tag in self._REQUEST_TAGS and a.get("src"):
            info.requests.append(a["src"].strip())
        if tag == "script":
            self._in_script = True
            if a.get("src"):
                info.tag_links.append(a["src"].strip())
        if tag == "link" and a.get("href"):
            rel = a.get("rel", "").lower()
            if "icon" in rel:
                info.favicons.append(a["href"].strip())
            else:
                info.tag_links.append(a["href"].strip())
        if tag == "meta":
            if a.get("http-equiv", "").lower() == "refresh":
                info.meta_refresh += 1
            m = re.search(r"url\s*=\s*(\S+)", a.get("content", ""), re.I)
            if m:
                info.tag_links.append(m.group(1).strip("'\""))
        if tag == "form":
            info.form_actions.append(a.get("action", "").strip())
        if tag in ("iframe", "frame"):
            info.iframes += 1
        if "onmouseover" in a:
            info.mouseover_handlers.append(a["onmouseover"])
        if "oncontextmenu" in a:
            info.scripts.append("oncontextmenu=" + a["oncontextmenu"])

    def handle_endtag(self, tag):
        if tag == "script":
            self._in_script = False

    def handle_data(self, data):
        if self._in_script:
            self.info.scripts.append(data)


def parse_page(html: str) -> PageInfo:
    parser = _PageParser()
    parser.feed(html)
    parser.close()
    parser.info.raw = html
    return parser.info


def _is_foreign(link: str, u: ParsedURL) -> bool:
    absolute = urljoin(f"{u.scheme}://{u.host}/", link)
    try:
        host = (urlsplit(absolute).hostname or "").lower()
    except ValueError:
        return True
    if not host:
        return False
    return registered_domain(host) != registered_domain(u.host)


def _foreign_ratio(links, u) -> float:
    links = [ln for ln in links if ln]
    if not links:
        return 0.0
    return sum(_is_foreign(ln, u) for ln in links) / len(links)


def _unsafe_anchor(href: str, u: ParsedURL) -> bool:
    h = href.strip().lower()
    if h in ("", "#") or h.startswith("#") or h.startswith("javascript:"):
        return True
    if h.startswith("mailto:"):
        return False
    return _is_foreign(href, u)


def anchor_ratio(u: ParsedURL, page: PageInfo, thresholds: dict | None = None) -> int:
    t = (thresholds or default_thresholds())["anchor_foreign_ratio"]
    if not page.anchors:
        return 1
    ratio = sum(_unsafe_anchor(h, u) for h in page.anchors) / len(page.anchors)
    return _band(ratio, t["legitimate_below"], t["phishing_above"])


def request_url_ratio(u: ParsedURL, page: PageInfo, thresholds: dict | None = None) -> int:
    t = (thresholds or default_thresholds())["request_foreign_ratio"]
    return _band(_foreign_ratio(page.requests, u), t["legitimate_below"], t["phishing_above"])


def links_in_tags_ratio(u: ParsedURL, page: PageInfo, thresholds: dict | None = None) -> int:
    t = (thresholds or default_thresholds())["links_in_tags_foreign_ratio"]
    return _band(_foreign_ratio(page.tag_links, u), t["legitimate_below"], t["phishing_above"])


def sfh_check(u: ParsedURL, page: PageInfo) -> int:
    """Server form handler: blank actions are phishing, foreign ones suspicious."""
    verdict = 1
    for action in page.form_actions:
        a = action.strip().lower()
        if a in ("", "about:blank"):
            return -1
        if not a.startswith("mailto:") and _is_foreign(action, u):
            verdict = 0
    return verdict


def mailto_submit(u: ParsedURL, page: PageInfo) -> int:
    if any(a.strip().lower().startswith("mailto:") for a in page.form_actions):
        return -1
    return -1 if re.search(r"\bmail\s*\(", page.raw) else 1


def favicon(u: ParsedURL, page: PageInfo) -> int:
    return -1 if any(_is_foreign(f, u) for f in page.favicons) else 1


def iframe_present(u: ParsedURL, page: PageInfo) -> int:
    return -1 if page.iframes else 1


def right_click_disabled(u: ParsedURL, page: PageInfo) -> int:
    code = "\n".join(page.scripts)
    if re.search(r"event\.button\s*==+\s*2", code) or re.search(r"oncontextmenu=\s*['\"]?\s*return\s+false", code, re.I):
        return -1
    return 1


def popup_window(u: ParsedURL, page: PageInfo) -> int:
    code = "\n".join(page.scripts)
    return -1 if re.search(r"window\.open\s*\(|\bprompt\s*\(", code) else 1


def on_mouseover_rewrite(u: ParsedURL, page: PageInfo) -> int:
    handlers = page.mouseover_handlers + ["\n".join(page.scripts)]
    return -1 if any(re.search(r"window\.status|\.status\s*=", h) for h in handlers) else 1


def redirect_count(hops: int, thresholds: dict | None = None) -> int:
    t = (thresholds or default_thresholds())["redirects"]
    if hops <= t["legitimate_max"]:
        return 1
    if hops <= t["suspicious_max"]:
        return 0
    return -1


def abnormal_url(u: ParsedURL, whois_domain) -> int:
    """Host must contain the WHOIS-registered name; 0 when WHOIS is unknown."""
    if whois_domain is UNAVAILABLE:
        return 0
    if not whois_domain:
        return -1
    return 1 if str(whois_domain).lower().rstrip(".") in u.host else -1


# -- lookup answers --------------------------------------------------------------


def domain_age(days, thresholds: dict | None = None) -> int:
    if days is UNAVAILABLE:
        return 0
    t = (thresholds or default_thresholds())["domain_age_days"]
    return 1 if days is not None and days >= t["legitimate_min"] else -1


def registration_length(days, thresholds: dict | None = None) -> int:
    if days is UNAVAILABLE:
        return 0
    t = (thresholds or default_thresholds())["registration_length_days"]
    return 1 if days is not None and days > t["legitimate_above"] else -1


def dns_record(present) -> int:
    if present is UNAVAILABLE:
        return 0
    return 1 if present else -1


def web_traffic(rank, thresholds: dict | None = None) -> int:
    if rank is UNAVAILABLE:
        return 0
    if rank is None:
        return -1
    t = (thresholds or default_thresholds())["traffic_rank"]
    return 1 if rank < t["legitimate_below"] else 0


def page_rank(value, thresholds: dict | None = None) -> int:
    if value is UNAVAILABLE:
        return 0
    t = (thresholds or default_thresholds())["page_rank"]
    return 1 if value is not None and value >= t["legitimate_min"] else -1


def google_index(indexed) -> int:
    if indexed is UNAVAILABLE:
        return 0
    return 1 if indexed else -1


def links_pointing(count, thresholds: dict | None = None) -> int:
    if count is UNAVAILABLE:
        return 0
    t = (thresholds or default_thresholds())["links_pointing"]
    count = count or 0
    if count <= t["phishing_max"]:
        return -1
    if count <= t["suspicious_max"]:
        return 0
    return 1
