import re
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

_URL_BODY = r'https?://[^\s<>()\[\]"\']*(?:\([^\s<>()]*\)[^\s<>()\[\]"\']*)*'

INLINE_LINK_RE = re.compile(
    r'(?<!!)\[(?P<text>[^\[\]\n]*)\]\(\s*'
    r'(?:<(?P<bracketed>https?://[^<>\n]+)>|<?(?P<url>' + _URL_BODY + r')>?)'
    r'(?:\s+(?:"[^"\n]*"|\'[^\'\n]*\'))?\s*\)'
)
AUTOLINK_RE = re.compile(r'<(?P<url>https?://[^\s<>]+)>')
REF_DEFINITION_RE = re.compile(
    r'^ {0,3}\[(?P<label>[^\]\n]+)\]:[ \t]*<?(?P<url>https?://[^\s<>]+)>?[^\n]*$',
    re.MULTILINE,
)
REF_USAGE_RE = re.compile(r'(?<!!)\[(?P<text>[^\[\]\n]+)\](?:\[(?P<label>[^\[\]\n]*)\])?(?![(:])')
BARE_URL_RE = re.compile(r'https?://[^\s<>()\[\]"\'`]*(?:\([^\s<>()]*\)[^\s<>()\[\]"\'`]*)*')
FOOTNOTE_RE = re.compile(r'\[\^[^\]\s]+\]')
NUMBERED_CITATION_RE = re.compile(r'\[\d+(?:\s*[,–-]\s*\d+)*\]')

_TRAILING_PUNCTUATION = '.,;:!?*_'
_TRACKING_KEYS = {'fbclid', 'gclid', 'mc_cid', 'mc_eid', 'ref_src', 'igshid'}


def trim_url(url):
    """Drop sentence punctuation that a bare-URL scan picks up at the end."""
    while url and url[-1] in _TRAILING_PUNCTUATION:
        url = url[:-1]
    # an unbalanced closing parenthesis belongs to the prose, not the URL
    while url.endswith(')') and url.count('(') < url.count(')'):
        url = url[:-1]
    return url


def inline_target(match):
    """URL and span of an inline link match; spaces in a <...> target are percent-encoded."""
    if match.group('bracketed') is not None:
        return match.group('bracketed').strip().replace(' ', '%20'), match.span('bracketed')
    return match.group('url'), match.span('url')


def is_absolute_http_url(url):
    try:
        parts = urlsplit(url.strip())
    except ValueError:
        return False
    return parts.scheme.lower() in ('http', 'https') and bool(parts.hostname)


def normalize_url(url):
    """Identity form used for citation dedup: lowercase scheme and host,
    no fragment, no trailing slash, no tracking parameters."""
    url = url.strip()
    try:
        parts = urlsplit(url)
        port = parts.port
    except ValueError:
        return url.lower()
    scheme = parts.scheme.lower()
    host = (parts.hostname or '').lower()
    default_port = {'http': 80, 'https': 443}.get(scheme)
    netloc = host if port in (None, default_port) else f'{host}:{port}'
    query = [
        (key, value) for key, value in parse_qsl(parts.query, keep_blank_values=True)
        if not key.lower().startswith('utm') and key.lower() not in _TRACKING_KEYS
    ]
    path = parts.path.rstrip('/')
    return urlunsplit((scheme, netloc, path, urlencode(query), ''))
