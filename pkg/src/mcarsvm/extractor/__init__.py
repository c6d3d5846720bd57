"""Turn a URL (and optionally its HTML) into a ternary feature vector.

The output columns follow the 30-feature phishing-website schema shipped in
``mcarsvm/data/phishing_schema.csv``, so extracted rows can be scored by
models trained on that corpus.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from ..dataset import FeatureVector
from . import features as F
from .features import ParsedURL, URLParseError, parse_page, parse_url, registered_domain
from .lookups import (
    UNAVAILABLE,
    FixtureLookupClient,
    LiveLookupClient,
    LookupClient,
    NullLookupClient,
)

__all__ = [
    "FEATURES",
    "FEATURE_NAMES",
    "ExtractionResult",
    "FeatureCategory",
    "FixtureLookupClient",
    "LiveLookupClient",
    "LookupClient",
    "NullLookupClient",
    "Provenance",
    "UNAVAILABLE",
    "URLParseError",
    "extract",
    "parse_url",
    "registered_domain",
]


class FeatureCategory(enum.Enum):
    ADDRESS_BAR = "address_bar"
    ABNORMAL = "abnormal"
    HTML_JAVASCRIPT = "html_javascript"
    DOMAIN = "domain"


class Provenance(enum.Enum):
    COMPUTED = "computed"
    LOOKUP = "lookup"
    UNAVAILABLE_DEFAULT = "unavailable_default"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    category: FeatureCategory
    source: str  # "url", "html", "lookup" or "redirect"


_A, _B, _H, _D = (FeatureCategory.ADDRESS_BAR, FeatureCategory.ABNORMAL,
                  FeatureCategory.HTML_JAVASCRIPT, FeatureCategory.DOMAIN)

FEATURES: tuple[FeatureSpec, ...] = (
    FeatureSpec("having_IP_Address", _A, "url"),
    FeatureSpec("URL_Length", _A, "url"),
    FeatureSpec("Shortining_Service", _A, "url"),
    FeatureSpec("having_At_Symbol", _A, "url"),
    FeatureSpec("double_slash_redirecting", _A, "url"),
    FeatureSpec("Prefix_Suffix", _A, "url"),
    FeatureSpec("having_Sub_Domain", _A, "url"),
    FeatureSpec("SSLfinal_State", _A, "url"),
    FeatureSpec("Domain_registeration_length", _A, "lookup"),
    FeatureSpec("Favicon", _A, "html"),
    FeatureSpec("port", _A, "url"),
    FeatureSpec("HTTPS_token", _A, "url"),
    FeatureSpec("Request_URL", _B, "html"),
    FeatureSpec("URL_of_Anchor", _B, "html"),
    FeatureSpec("Links_in_tags", _B, "html"),
    FeatureSpec("SFH", _B, "html"),
    FeatureSpec("Submitting_to_email", _B, "html"),
    FeatureSpec("Abnormal_URL", _B, "lookup"),
    FeatureSpec("Redirect", _H, "redirect"),
    FeatureSpec("on_mouseover", _H, "html"),
    FeatureSpec("RightClick", _H, "html"),
    FeatureSpec("popUpWidnow", _H, "html"),
    FeatureSpec("Iframe", _H, "html"),
    FeatureSpec("age_of_domain", _D, "lookup"),
    FeatureSpec("DNSRecord", _D, "lookup"),
    FeatureSpec("web_traffic", _D, "lookup"),
    FeatureSpec("Page_Rank", _D, "lookup"),
    FeatureSpec("Google_Index", _D, "lookup"),
    FeatureSpec("Links_pointing_to_page", _D, "lookup"),
    FeatureSpec("Statistical_report", _D, "url"),
)
FEATURE_NAMES = tuple(f.name for f in FEATURES)


@dataclass(frozen=True)
class ExtractionResult:
    vector: FeatureVector
    provenance: tuple[Provenance, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.feature_names, self.vector.values))


def _url_features(u: ParsedURL, th) -> dict[str, int]:
    return {
        "having_IP_Address": F.ip_address_host(u),
        "URL_Length": F.url_length(u, th),
        "Shortining_Service": F.shortening_service(u),
        "having_At_Symbol": F.at_symbol(u),
        "double_slash_redirecting": F.double_slash_redirecting(u, th),
        "Prefix_Suffix": F.prefix_suffix(u),
        "having_Sub_Domain": F.sub_domain_count(u, th),
        "SSLfinal_State": F.ssl_state(u),
        "port": F.port_check(u),
        "HTTPS_token": F.https_token_in_domain(u),
        "Statistical_report": F.statistical_report(u),
    }


def _html_features(u: ParsedURL, page, th) -> dict[str, int]:
    return {
        "Favicon": F.favicon(u, page),
        "Request_URL": F.request_url_ratio(u, page, th),
        "URL_of_Anchor": F.anchor_ratio(u, page, th),
        "Links_in_tags": F.links_in_tags_ratio(u, page, th),
        "SFH": F.sfh_check(u, page),
        "Submitting_to_email": F.mailto_submit(u, page),
        "on_mouseover": F.on_mouseover_rewrite(u, page),
        "RightClick": F.right_click_disabled(u, page),
        "popUpWidnow": F.popup_window(u, page),
        "Iframe": F.iframe_present(u, page),
    }


def _lookup_features(u: ParsedURL, client, th) -> dict[str, tuple[int, bool]]:
    host = u.host
    answers = {
        "Domain_registeration_length": (client.registration_length_days(host), F.registration_length),
        "Abnormal_URL": (client.whois_domain(host), lambda v, t: F.abnormal_url(u, v)),
        "age_of_domain": (client.domain_age_days(host), F.domain_age),
        "DNSRecord": (client.dns_record(host), lambda v, t: F.dns_record(v)),
        "web_traffic": (client.traffic_rank(host), F.web_traffic),
        "Page_Rank": (client.page_rank(host), F.page_rank),
        "Google_Index": (client.google_index(host), lambda v, t: F.google_index(v)),
        "Links_pointing_to_page": (client.links_pointing(host), F.links_pointing),
    }
    return {name: (fn(value, th), value is not UNAVAILABLE) for name, (value, fn) in answers.items()}


def extract(
    url: str,
    html: str | None = None,
    lookups: LookupClient | None = None,
    redirects: int | None = None,
    thresholds: dict | None = None,
) -> ExtractionResult:
    """Feature vector for one website.

    Page features are 0 without ``html``; lookup features are 0 when the
    client cannot answer.  ``redirects`` is the number of HTTP hops seen
    while fetching; when unknown, meta-refresh tags in ``html`` are counted
    instead.

    Raises :class:`URLParseError` for URLs without a usable host.
    """
    u = parse_url(url)
    th = thresholds or F.default_thresholds()
    client = lookups if lookups is not None else NullLookupClient()

    values: dict[str, int] = {}
    prov: dict[str, Provenance] = {}
    for name, v in _url_features(u, th).items():
        values[name], prov[name] = v, Provenance.COMPUTED

    page = parse_page(html) if html is not None else None
    if page is not None:
        for name, v in _html_features(u, page, th).items():
            values[name], prov[name] = v, Provenance.COMPUTED
    else:
        for spec in FEATURES:
            if spec.source == "html":
                values[spec.name], prov[spec.name] = 0, Provenance.UNAVAILABLE_DEFAULT

    hops = redirects if redirects is not None else (page.meta_refresh if page is not None else None)
    if hops is None:
        values["Redirect"], prov["Redirect"] = 0, Provenance.UNAVAILABLE_DEFAULT
    else:
        values["Redirect"], prov["Redirect"] = F.redirect_count(hops, th), Provenance.COMPUTED

    for name, (v, answered) in _lookup_features(u, client, th).items():
        values[name] = v
        prov[name] = Provenance.LOOKUP if answered else Provenance.UNAVAILABLE_DEFAULT

    return ExtractionResult(
        FeatureVector(tuple(values[n] for n in FEATURE_NAMES)),
        tuple(prov[n] for n in FEATURE_NAMES),
    )
