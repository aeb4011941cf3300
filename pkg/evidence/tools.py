from datetime import datetime, timezone as dt_timezone

from django.conf import settings

from evidence.exceptions import EvidenceError
from evidence.fetch import DocumentCache, Fetcher, FixtureTransport, LiveTransport, RecordingTransport
from evidence.fixtures import EvidenceFixtures
from evidence.search import (
    ArxivBackend, FixtureSearchBackend, GithubBackend, HttpSearchBackend, RecordingSearchBackend, SearchTool,
)
from evidence.types import SEARCH_TOOLS, SearchQuery, Tool

# retrieved_at for replayed pages, so replays stay byte-identical
FIXTURE_RETRIEVED_AT = datetime(2025, 1, 1, tzinfo=dt_timezone.utc)

LIVE_BACKENDS = {
    Tool.WEB_SEARCH.value: HttpSearchBackend,
    Tool.ARXIV.value: ArxivBackend,
    Tool.GITHUB.value: GithubBackend,
}


class EvidenceTools:
    """Search tools by name plus the shared fetcher."""

    def __init__(self, search_tools, fetcher, max_results=None):
        self.search_tools = dict(search_tools)
        self.fetcher = fetcher
        self.max_results = max_results or settings.SEARCH_MAX_RESULTS

    @property
    def available(self):
        return set(self.search_tools) | {Tool.URL_FETCH.value}

    def query(self, text, cutoff_date=None):
        return SearchQuery(text=text, cutoff_date=cutoff_date, max_results=self.max_results)

    def search(self, query, tool=Tool.WEB_SEARCH.value):
        if tool not in self.search_tools:
            raise EvidenceError(f"Search tool {tool!r} is not configured")
        return self.search_tools[tool].search(query)

    def fetch(self, url):
        return self.fetcher.fetch(url)


def build_evidence_tools(mode, fixture_dir=None, cache_dir=None, namespace='default', sleep=None):
    """live: real backends; record: real backends written to fixtures; replay: fixtures only."""
    cache = DocumentCache(namespace=namespace, cache_dir=cache_dir)
    extra = {'sleep': sleep} if sleep else {}
    if mode == 'replay':
        fixtures = EvidenceFixtures(fixture_dir)
        tools = {name: SearchTool(FixtureSearchBackend(fixtures, name), **extra) for name in SEARCH_TOOLS}
        fetcher = Fetcher(FixtureTransport(fixtures), cache=cache, respect_robots=False,
                          clock=lambda: FIXTURE_RETRIEVED_AT, **extra)
        return EvidenceTools(tools, fetcher)

    backends = {name: factory() for name, factory in LIVE_BACKENDS.items()}
    transport = LiveTransport()
    if mode == 'record':
        fixtures = EvidenceFixtures(fixture_dir)
        backends = {name: RecordingSearchBackend(backend, fixtures) for name, backend in backends.items()}
        transport = RecordingTransport(transport, fixtures)
    tools = {name: SearchTool(backend, **extra) for name, backend in backends.items()}
    return EvidenceTools(tools, Fetcher(transport, cache=cache, **extra))
