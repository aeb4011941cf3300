import hashlib
import logging
import re
import threading
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from urllib.parse import urlsplit
from urllib.robotparser import RobotFileParser

import requests
import trafilatura
from bs4 import BeautifulSoup
from django.conf import settings
from django.utils import timezone

from conf.jsonfiles import read_json, write_json
from conf.metrics import FETCHES
from evidence.types import FetchedDocument, FetchStatus
from reports.exceptions import MalformedUrl
from reports.links import is_absolute_http_url, normalize_url

logger = logging.getLogger('evidence_log')

NOISE_TAGS = ('script', 'style', 'noscript', 'nav', 'header', 'footer', 'aside', 'form', 'iframe', 'svg')


@dataclass(frozen=True)
class PageResponse:
    status_code: int
    content_type: str
    body: str


def status_for(code):
    if 200 <= code < 300:
        return FetchStatus.OK.value
    if code in (404, 410):
        return FetchStatus.NOT_FOUND.value
    if code in (401, 402):
        return FetchStatus.PAYWALLED.value
    return FetchStatus.BLOCKED.value


def normalize_text(text):
    text = (text or '').replace('\r\n', '\n').replace('\r', '\n')
    text = re.sub(r'[ \t]{2,}', ' ', text)
    text = re.sub(r'\n{3,}', '\n\n', text)
    return text.strip()


def clean_with_bs4(html):
    soup = BeautifulSoup(html, 'html.parser')
    for tag in soup.find_all(list(NOISE_TAGS)):
        tag.decompose()
    return normalize_text(soup.get_text(separator='\n', strip=True))


def extract_main_text(body, content_type=''):
    """Main text of a page: trafilatura first, a bs4 cleanup when it finds nothing."""
    content_type = (content_type or '').lower()
    looks_like_html = 'html' in content_type or body.lstrip()[:1] == '<'
    if not looks_like_html:
        return normalize_text(body) if content_type.startswith('text/') or not content_type else ''
    extracted = trafilatura.extract(body, include_comments=False, include_tables=True, favor_precision=True)
    if extracted:
        return normalize_text(extracted)
    return clean_with_bs4(body)


class LiveTransport:
    def __init__(self, user_agent=None):
        self.user_agent = user_agent or settings.FETCH_USER_AGENT

    def get(self, url, timeout):
        response = requests.get(url, timeout=timeout, headers={'User-Agent': self.user_agent})
        return PageResponse(response.status_code, response.headers.get('Content-Type', ''), response.text)


class FixtureTransport:
    """Pages from evidence fixtures; unknown URLs answer 404."""

    def __init__(self, fixtures):
        self.fixtures = fixtures

    def get(self, url, timeout):
        entry = self.fixtures.page(url)
        if entry is None:
            return PageResponse(404, 'text/plain', '')
        if entry.get('timeout'):
            raise requests.Timeout(f"recorded timeout for {url}")
        if 'text' in entry:
            return PageResponse(200, 'text/plain', entry['text'])
        return PageResponse(entry.get('status', 200), entry.get('content_type', 'text/html'), entry.get('body', ''))


class RecordingTransport:
    def __init__(self, inner, fixtures):
        self.inner = inner
        self.fixtures = fixtures

    def get(self, url, timeout):
        try:
            page = self.inner.get(url, timeout)
        except requests.Timeout:
            self.fixtures.record_page(url, {'timeout': True})
            raise
        self.fixtures.record_page(url, {'status': page.status_code, 'content_type': page.content_type,
                                        'body': page.body})
        return page


class RobotsCheck:
    """Plain allow/deny from robots.txt; unreadable files allow everything."""

    def __init__(self, transport, user_agent=None, timeout=5):
        self.transport = transport
        self.user_agent = user_agent or settings.FETCH_USER_AGENT
        self.timeout = timeout
        self._parsers = {}
        self._lock = threading.Lock()

    def _parser(self, url):
        parts = urlsplit(url)
        origin = f"{parts.scheme}://{parts.netloc}"
        with self._lock:
            if origin in self._parsers:
                return self._parsers[origin]
        parser = None
        try:
            page = self.transport.get(f"{origin}/robots.txt", self.timeout)
            if page.status_code == 200:
                parser = RobotFileParser()
                parser.parse(page.body.splitlines())
        except requests.RequestException:
            parser = None
        with self._lock:
            self._parsers[origin] = parser
        return parser

    def allowed(self, url):
        parser = self._parser(url)
        return parser is None or parser.can_fetch(self.user_agent, url)


class DocumentCache:
    """Fetched documents keyed by normalized URL inside one run namespace.

    Concurrent fetches of the same key wait for the first one, so a run never
    sees two different documents for one URL.
    """

    def __init__(self, namespace='default', cache_dir=None):
        self.namespace = namespace
        self.directory = Path(cache_dir) / namespace if cache_dir else None
        self._documents = {}
        self._key_locks = {}
        self._lock = threading.Lock()

    def _disk_path(self, key):
        return self.directory / f"{hashlib.sha256(key.encode('utf-8')).hexdigest()}.json"

    def _from_disk(self, key):
        if self.directory is None or not self._disk_path(key).exists():
            return None
        data = read_json(self._disk_path(key))
        return FetchedDocument(url=data['url'], content_text=data['content_text'],
                               retrieved_at=datetime.fromisoformat(data['retrieved_at']), status=data['status'])

    def get_or_load(self, key, loader):
        with self._lock:
            if key in self._documents:
                return self._documents[key]
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            with self._lock:
                if key in self._documents:
                    return self._documents[key]
            document = self._from_disk(key) or loader()
            if self.directory is not None:
                write_json(self._disk_path(key), document.to_dict())
            with self._lock:
                self._documents[key] = document
        return document


class Fetcher:
    def __init__(self, transport, cache=None, timeout=None, retries=None, per_host=None, concurrency=None,
                 respect_robots=None, clock=timezone.now, sleep=time.sleep):
        self.transport = transport
        self.cache = cache or DocumentCache()
        self.timeout = timeout or settings.FETCH_TIMEOUT
        self.retries = settings.FETCH_RETRIES if retries is None else retries
        self.per_host = per_host or settings.FETCH_PER_HOST
        respect_robots = settings.FETCH_RESPECT_ROBOTS if respect_robots is None else respect_robots
        self.robots = RobotsCheck(transport) if respect_robots else None
        self._global = threading.BoundedSemaphore(concurrency or settings.FETCH_CONCURRENCY)
        self._hosts = {}
        self._hosts_lock = threading.Lock()
        self._clock = clock
        self._sleep = sleep

    def _host_slot(self, host):
        with self._hosts_lock:
            return self._hosts.setdefault(host, threading.BoundedSemaphore(self.per_host))

    def fetch(self, url):
        """Never raises for unreachable pages; only a non-URL is an error."""
        if not isinstance(url, str) or not is_absolute_http_url(url):
            raise MalformedUrl(url)
        return self.cache.get_or_load(normalize_url(url), lambda: self._fetch(url))

    def _fetch(self, url):
        if self.robots is not None and not self.robots.allowed(url):
            logger.info(f"robots.txt disallows {url}")
            status, text = FetchStatus.BLOCKED.value, ''
        else:
            with self._global, self._host_slot(urlsplit(url).hostname):
                status, text = self._download(url)
        FETCHES.labels(status=status).inc()
        logger.info(f"fetch {url}: {status}")
        return FetchedDocument(url=url, content_text=text, retrieved_at=self._clock(), status=status)

    def _download(self, url):
        outcome = (FetchStatus.BLOCKED.value, '')
        for attempt in range(self.retries + 1):
            try:
                page = self.transport.get(url, self.timeout)
            except requests.Timeout:
                outcome = (FetchStatus.TIMEOUT.value, '')
            except requests.RequestException as exc:
                logger.debug(f"fetch {url}: {exc.__class__.__name__}")
                outcome = (FetchStatus.BLOCKED.value, '')
            else:
                status = status_for(page.status_code)
                if status == FetchStatus.OK:
                    text = extract_main_text(page.body, page.content_type)
                    return (status, text) if text else (FetchStatus.BLOCKED.value, '')
                if page.status_code < 500:
                    return status, ''
                outcome = (status, '')
            if attempt < self.retries:
                self._sleep(0.5 * 2 ** attempt)
        return outcome
