import logging
import time

import requests
from bs4 import BeautifulSoup
from django.conf import settings

from conf.metrics import CUTOFF_EXCLUSIONS, SEARCHES
from evidence.exceptions import BackendUnavailable, RateLimited
from evidence.types import SearchResult, Tool
from reports.links import is_absolute_http_url, normalize_url

logger = logging.getLogger('evidence_log')


def dedupe(results):
    """First occurrence per normalized URL, order preserved."""
    seen = set()
    unique = []
    for result in results:
        key = normalize_url(result.url)
        if key in seen:
            continue
        seen.add(key)
        unique.append(result)
    return unique


def apply_cutoff(results, cutoff_date):
    """Strict policy: with a cutoff set, undated results are dropped too."""
    if cutoff_date is None:
        return list(results)
    kept = [r for r in results if r.published_date is not None and r.published_date <= cutoff_date]
    dropped = len(results) - len(kept)
    if dropped:
        CUTOFF_EXCLUSIONS.inc(dropped)
        logger.info(f"Cutoff {cutoff_date.isoformat()} excluded {dropped} of {len(results)} results")
    return kept


def _check_status(response, tool):
    if response.status_code == 429:
        raise RateLimited(tool, response.headers.get('Retry-After'))
    if response.status_code >= 400:
        raise BackendUnavailable(f"{tool} backend returned HTTP {response.status_code}")


class HttpSearchBackend:
    """Generic JSON search API: GET ?q=&count= -> {"results": [{url, title, snippet, published_date}]}."""

    tool = Tool.WEB_SEARCH.value

    def __init__(self, base_url=None, api_key=None, timeout=None):
        self.base_url = base_url or settings.SEARCH_BASE_URL
        self.api_key = api_key or settings.SEARCH_API_KEY
        self.timeout = timeout or settings.FETCH_TIMEOUT

    def search(self, text, max_results):
        try:
            response = requests.get(
                self.base_url, params={'q': text, 'count': max_results},
                headers={'X-API-Key': self.api_key or ''}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailable(f"web_search transport error: {exc.__class__.__name__}") from exc
        _check_status(response, self.tool)
        try:
            items = response.json().get('results', [])
        except ValueError as exc:
            raise BackendUnavailable("web_search returned non-JSON body") from exc
        return [SearchResult.from_dict(item, self.tool) for item in items if item.get('url')]


class ArxivBackend:
    """arXiv export API; Atom entries parsed with BeautifulSoup."""

    tool = Tool.ARXIV.value

    def __init__(self, base_url=None, timeout=None):
        self.base_url = base_url or settings.ARXIV_BASE_URL
        self.timeout = timeout or settings.FETCH_TIMEOUT

    def search(self, text, max_results):
        try:
            response = requests.get(
                self.base_url, params={'search_query': f'all:{text}', 'max_results': max_results},
                timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailable(f"arxiv transport error: {exc.__class__.__name__}") from exc
        _check_status(response, self.tool)
        return parse_arxiv_feed(response.text)


def parse_arxiv_feed(xml):
    soup = BeautifulSoup(xml, 'html.parser')
    results = []
    for entry in soup.find_all('entry'):
        url = entry.find('id')
        if url is None:
            continue
        title = entry.find('title')
        summary = entry.find('summary')
        published = entry.find('published')
        results.append(SearchResult.from_dict({
            'url': url.get_text(strip=True),
            'title': ' '.join(title.get_text().split()) if title else '',
            'snippet': ' '.join(summary.get_text().split()) if summary else '',
            'published_date': published.get_text(strip=True) if published else None,
        }, Tool.ARXIV.value))
    return results


class GithubBackend:
    """GitHub repository search."""

    tool = Tool.GITHUB.value

    def __init__(self, base_url=None, token=None, timeout=None):
        self.base_url = base_url or settings.GITHUB_BASE_URL
        self.token = token or settings.GITHUB_TOKEN
        self.timeout = timeout or settings.FETCH_TIMEOUT

    def search(self, text, max_results):
        headers = {'Accept': 'application/vnd.github+json'}
        if self.token:
            headers['Authorization'] = f'Bearer {self.token}'
        try:
            response = requests.get(self.base_url, params={'q': text, 'per_page': max_results},
                                    headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnavailable(f"github transport error: {exc.__class__.__name__}") from exc
        if response.status_code == 403 and response.headers.get('X-RateLimit-Remaining') == '0':
            raise RateLimited(self.tool)
        _check_status(response, self.tool)
        return [
            SearchResult.from_dict({
                'url': item['html_url'],
                'title': item.get('full_name', ''),
                'snippet': item.get('description') or '',
                'published_date': item.get('pushed_at') or item.get('created_at'),
            }, self.tool)
            for item in response.json().get('items', [])
            if item.get('html_url')
        ]


class FixtureSearchBackend:
    def __init__(self, fixtures, tool):
        self.fixtures = fixtures
        self.tool = tool

    def search(self, text, max_results):
        return [SearchResult.from_dict(item, self.tool) for item in self.fixtures.search_results(self.tool, text)]


class RecordingSearchBackend:
    def __init__(self, inner, fixtures):
        self.inner = inner
        self.fixtures = fixtures
        self.tool = inner.tool

    def search(self, text, max_results):
        results = self.inner.search(text, max_results)
        self.fixtures.record_search(self.tool, text, results)
        return results


class SearchTool:
    """One search backend plus the shared post-processing: retry, cutoff, dedupe, cap."""

    def __init__(self, backend, retries=None, backoff=None, sleep=time.sleep):
        self.backend = backend
        self.name = backend.tool
        self.retries = max(1, settings.SEARCH_RETRIES if retries is None else retries)
        self.backoff = settings.SEARCH_BACKOFF if backoff is None else backoff
        self._sleep = sleep

    def _raw(self, query):
        for attempt in range(1, self.retries + 1):
            try:
                return self.backend.search(query.text, query.max_results)
            except RateLimited:
                if attempt == self.retries:
                    logger.error(f"{self.name}: still rate limited after {attempt} attempts")
                    raise
                delay = self.backoff ** attempt
                logger.warning(f"{self.name}: rate limited, retrying in {delay}s ({attempt}/{self.retries})")
                self._sleep(delay)

    def search(self, query):
        SEARCHES.labels(tool=self.name).inc()
        raw = [r for r in self._raw(query) if is_absolute_http_url(r.url)]
        results = dedupe(apply_cutoff(raw, query.cutoff_date))[:query.max_results]
        logger.info(f"{self.name} {query.text!r}: {len(raw)} raw, {len(results)} kept")
        return results
