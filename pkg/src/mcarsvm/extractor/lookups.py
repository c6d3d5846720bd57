"""Clients answering the network-dependent feature questions.

Every query returns either an answer or :data:`UNAVAILABLE`.  ``None`` is a
real answer meaning "the source has no value" (e.g. a site with no traffic
rank), which is different from not being able to ask.
"""
from __future__ import annotations

import json
import socket
from pathlib import Path
from typing import Protocol

QUERIES = (
    "domain_age_days",
    "dns_record",
    "traffic_rank",
    "page_rank",
    "google_index",
    "links_pointing",
    "registration_length_days",
    "whois_domain",
)


class _Unavailable:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNAVAILABLE"

    def __bool__(self):
        return False


UNAVAILABLE = _Unavailable()


class LookupClient(Protocol):
    def domain_age_days(self, host: str): ...
    def dns_record(self, host: str): ...
    def traffic_rank(self, host: str): ...
    def page_rank(self, host: str): ...
    def google_index(self, host: str): ...
    def links_pointing(self, host: str): ...
    def registration_length_days(self, host: str): ...
    def whois_domain(self, host: str): ...


class NullLookupClient:
    """Knows nothing; every lookup feature falls back to 0."""

    def _none(self, host):
        return UNAVAILABLE

    domain_age_days = dns_record = traffic_rank = page_rank = _none
    google_index = links_pointing = registration_length_days = whois_domain = _none


class FixtureLookupClient:
    """Answers from a JSON document ``{"hosts": {host: {query: answer}}}``.

    A host missing from the fixture is retried as its registered domain
    (``login.example.com`` -> ``example.com``).  Missing keys are
    UNAVAILABLE; explicit ``null`` values are answers.
    """

    def __init__(self, hosts: dict[str, dict]):
        self.hosts = {h.lower(): dict(v) for h, v in hosts.items()}

    @classmethod
    def from_file(cls, path) -> "FixtureLookupClient":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        hosts = doc.get("hosts", doc)
        if not isinstance(hosts, dict):
            raise ValueError(f"{path}: expected a mapping of host -> answers")
        return cls(hosts)

    def _answer(self, host, key):
        from .features import registered_domain

        host = host.lower()
        entry = self.hosts.get(host)
        if entry is None:
            entry = self.hosts.get(registered_domain(host))
        if entry is None or key not in entry:
            return UNAVAILABLE
        return entry[key]

    def domain_age_days(self, host):
        return self._answer(host, "domain_age_days")

    def dns_record(self, host):
        return self._answer(host, "dns_record")

    def traffic_rank(self, host):
        return self._answer(host, "traffic_rank")

    def page_rank(self, host):
        return self._answer(host, "page_rank")

    def google_index(self, host):
        return self._answer(host, "google_index")

    def links_pointing(self, host):
        return self._answer(host, "links_pointing")

    def registration_length_days(self, host):
        return self._answer(host, "registration_length_days")

    def whois_domain(self, host):
        return self._answer(host, "whois_domain")


class LiveLookupClient(NullLookupClient):
    """DNS resolution through the system resolver, WHOIS through the optional
    ``whois`` package.  Other queries stay UNAVAILABLE.

    Results are cached per host, so repeated calls in one process agree.
    """

    def __init__(self, timeout: float = 5.0):
        self.timeout = timeout
        self._cache: dict[tuple[str, str], object] = {}

    def _cached(self, key, host, fn):
        k = (key, host.lower())
        if k not in self._cache:
            try:
                self._cache[k] = fn(host)
            except Exception:
                self._cache[k] = UNAVAILABLE
        return self._cache[k]

    def dns_record(self, host):
        def resolve(h):
            old = socket.getdefaulttimeout()
            socket.setdefaulttimeout(self.timeout)
            try:
                socket.getaddrinfo(h, None)
                return True
            except socket.gaierror:
                return False
            finally:
                socket.setdefaulttimeout(old)

        return self._cached("dns", host, resolve)

    def _whois(self, host):
        try:
            import whois
        except ImportError:
            return UNAVAILABLE
        return self._cached("whois", host, whois.whois)

    def _whois_field(self, host, fn):
        record = self._whois(host)
        if record is UNAVAILABLE or record is None:
            return UNAVAILABLE
        try:
            return fn(record)
        except Exception:
            return UNAVAILABLE

    def domain_age_days(self, host):
        import datetime as dt

        def age(rec):
            created = rec.creation_date
            created = min(created) if isinstance(created, list) else created
            return (dt.datetime.now() - created).days

        return self._whois_field(host, age)

    def registration_length_days(self, host):
        import datetime as dt

        def length(rec):
            expires = rec.expiration_date
            expires = max(expires) if isinstance(expires, list) else expires
            return (expires - dt.datetime.now()).days

        return self._whois_field(host, length)

    def whois_domain(self, host):
        def name(rec):
            d = rec.domain_name
            d = d[0] if isinstance(d, list) else d
            return d.lower() if d else UNAVAILABLE

        return self._whois_field(host, name)
