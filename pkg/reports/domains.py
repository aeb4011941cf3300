import ipaddress
from urllib.parse import urlsplit

import tldextract

from reports.documents import RootDomain
from reports.exceptions import MalformedUrl, UnknownSuffix

# Offline: the public-suffix snapshot bundled with tldextract, ICANN section only,
# so results never depend on network access or a stale cache.
_extract = tldextract.TLDExtract(suffix_list_urls=(), cache_dir=None, include_psl_private_domains=False)


def _host(url):
    if not isinstance(url, str):
        raise MalformedUrl(url)
    try:
        parts = urlsplit(url.strip())
        host = parts.hostname
        parts.port
    except ValueError:
        raise MalformedUrl(url)
    if parts.scheme.lower() not in ('http', 'https') or not host:
        raise MalformedUrl(url)
    return host.lower().rstrip('.')


def extract_root_domain(url):
    host = _host(url)
    if host.startswith('www.'):
        host = host[4:]
    try:
        ipaddress.ip_address(host)
        raise UnknownSuffix(host)
    except ValueError:
        pass
    parts = _extract(host)
    if not parts.suffix:
        raise UnknownSuffix(host)
    if not parts.domain:
        # host is itself a public suffix (www.nhs.uk -> nhs.uk)
        return RootDomain(host)
    return RootDomain(parts.registered_domain)


def root_domain_or_host(url):
    """Root domain, or the full host when it has no registrable domain."""
    try:
        return extract_root_domain(url)
    except UnknownSuffix as exc:
        return RootDomain(exc.host)
