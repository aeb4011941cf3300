import tempfile
from datetime import date, timedelta
from pathlib import Path
from unittest import mock

import requests
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from conf.jsonfiles import write_json
from evidence.exceptions import EvidenceError, RateLimited
from evidence.fetch import DocumentCache, Fetcher, FixtureTransport, LiveTransport, PageResponse
from evidence.fixtures import EvidenceFixtures
from evidence.search import FixtureSearchBackend, SearchTool, apply_cutoff, dedupe, parse_arxiv_feed
from evidence.tools import build_evidence_tools
from evidence.types import FetchStatus, FetchedDocument, SearchQuery, SearchResult, parse_published
from reports.exceptions import MalformedUrl


def result(url, published=None):
    return SearchResult(url=url, title=url, snippet='', published_date=published)


class StubBackend:
    tool = 'web_search'

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = 0

    def search(self, text, max_results):
        self.calls += 1
        reply = self.replies[min(self.calls, len(self.replies)) - 1]
        if isinstance(reply, Exception):
            raise reply
        return reply


class FixtureDirTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_fixture(self, name, content):
        write_json(self.root / 'evidence' / f'{name}.json', content)


class DedupeTest(SimpleTestCase):
    def test_empty(self):
        self.assertEqual(dedupe([]), [])

    def test_exact_duplicates(self):
        a = result('https://a.com/x')
        self.assertEqual(dedupe([a, a]), [a])

    def test_normalized_duplicates_keep_first(self):
        a, b = result('https://a.com/x'), result('https://b.org/y')
        tracked = result('https://A.com/x/?utm_source=feed#top')
        self.assertEqual(dedupe([a, b, tracked]), [a, b])


class SearchTest(FixtureDirTestCase):
    def tool(self, **kwargs):
        return SearchTool(FixtureSearchBackend(EvidenceFixtures(self.root), 'web_search'), **kwargs)

    def test_fixture_results_are_deduplicated(self):
        self.write_fixture('web_search', {'inflation rate': [
            {'url': 'https://stats.example.gov/cpi', 'title': 'CPI'},
            {'url': 'https://news.example.com/a', 'title': 'A'},
            {'url': 'https://news.example.com/a/?utm_medium=x', 'title': 'A again'},
            {'url': 'https://imf.org/weo', 'title': 'WEO'},
            {'url': 'https://oecd.org/cpi', 'title': 'OECD'},
        ]})
        results = self.tool().search(SearchQuery('inflation rate'))
        self.assertEqual(len(results), 4)

    def test_strict_cutoff(self):
        self.write_fixture('web_search', {'*': [
            {'url': 'https://a.com/1', 'published_date': '2023-06'},
            {'url': 'https://a.com/2', 'published_date': '2024-03'},
            {'url': 'https://a.com/3'},
        ]})
        results = self.tool().search(SearchQuery('anything', cutoff_date=date(2024, 1, 1)))
        self.assertEqual([r.url for r in results], ['https://a.com/1'])

    def test_empty_fixture(self):
        self.assertEqual(self.tool().search(SearchQuery('nothing recorded')), [])

    def test_results_capped_at_max_results(self):
        self.write_fixture('web_search', {'*': [{'url': f'https://a.com/{i}'} for i in range(12)]})
        self.assertEqual(len(self.tool().search(SearchQuery('q', max_results=8))), 8)

    def test_query_validation(self):
        with self.assertRaises(EvidenceError):
            SearchQuery('  ')
        with self.assertRaises(EvidenceError):
            SearchQuery('q', max_results=0)

    def test_rate_limit_retried_with_backoff(self):
        backend = StubBackend([RateLimited('web_search'), RateLimited('web_search'), [result('https://a.com')]])
        delays = []
        tool = SearchTool(backend, retries=3, backoff=2, sleep=delays.append)
        self.assertEqual(len(tool.search(SearchQuery('q'))), 1)
        self.assertEqual(delays, [2, 4])

    def test_rate_limit_surfaces_after_retries(self):
        backend = StubBackend([RateLimited('web_search')])
        tool = SearchTool(backend, retries=3, backoff=2, sleep=lambda _: None)
        with self.assertRaises(RateLimited):
            tool.search(SearchQuery('q'))
        self.assertEqual(backend.calls, 3)


dated = st.one_of(st.none(), st.dates(min_value=date(2015, 1, 1), max_value=date(2026, 12, 31)))
result_lists = st.lists(
    st.tuples(st.integers(min_value=0, max_value=30), dated).map(
        lambda t: result(f'https://site{t[0]}.example.com/p', t[1])),
    max_size=25,
)


class CutoffPropertyTest(SimpleTestCase):
    @settings(max_examples=1000, deadline=None)
    @given(result_lists, st.dates(min_value=date(2015, 1, 1), max_value=date(2026, 12, 31)))
    def test_nothing_after_cutoff_or_undated_is_returned(self, results, cutoff):
        tool = SearchTool(StubBackend([results]), retries=1)
        returned = tool.search(SearchQuery('q', cutoff_date=cutoff, max_results=50))
        for item in returned:
            self.assertIsNotNone(item.published_date)
            self.assertLessEqual(item.published_date, cutoff)
        self.assertEqual(len(returned), len(dedupe(apply_cutoff(results, cutoff))))

    @settings(max_examples=200, deadline=None)
    @given(result_lists)
    def test_no_cutoff_keeps_undated(self, results):
        self.assertEqual(apply_cutoff(results, None), results)


class PublishedDateTest(SimpleTestCase):
    def test_partial_dates_resolve_to_period_end(self):
        self.assertEqual(parse_published('2023-06'), date(2023, 6, 30))
        self.assertEqual(parse_published('2024-02'), date(2024, 2, 29))
        self.assertEqual(parse_published('2022'), date(2022, 12, 31))

    def test_full_dates(self):
        self.assertEqual(parse_published('2024-03-05'), date(2024, 3, 5))
        self.assertEqual(parse_published('2024-03-05T23:10:00Z'), date(2024, 3, 5))
        self.assertIsNone(parse_published(''))
        self.assertIsNone(parse_published('yesterday'))


class FetchTest(FixtureDirTestCase):
    def fetcher(self, **kwargs):
        transport = FixtureTransport(EvidenceFixtures(self.root))
        kwargs.setdefault('respect_robots', False)
        return Fetcher(transport, sleep=lambda _: None, **kwargs)

    def test_fixture_page_text(self):
        self.write_fixture('pages', {'https://a.com/p': {'text': 'Inflation fell to 2.4% in 2024.'}})
        document = self.fetcher().fetch('https://a.com/p')
        self.assertEqual(document.status, FetchStatus.OK)
        self.assertEqual(document.content_text, 'Inflation fell to 2.4% in 2024.')

    def test_html_is_reduced_to_main_text(self):
        html = ('<html><head><script>var x = 1;</script></head><body><nav>Home | About</nav>'
                '<article><p>Consumer prices rose 3.1 percent over the year.</p></article></body></html>')
        self.write_fixture('pages', {'https://a.com/h': {'status': 200, 'content_type': 'text/html', 'body': html}})
        document = self.fetcher().fetch('https://a.com/h')
        self.assertIn('Consumer prices rose 3.1 percent', document.content_text)
        self.assertNotIn('var x', document.content_text)

    def test_http_statuses(self):
        self.write_fixture('pages', {
            'https://a.com/gone': {'status': 404, 'body': ''},
            'https://a.com/pay': {'status': 402, 'body': ''},
            'https://a.com/deny': {'status': 403, 'body': ''},
            'https://a.com/slow': {'timeout': True},
        })
        fetcher = self.fetcher()
        expected = {'gone': 'not_found', 'pay': 'paywalled', 'deny': 'blocked', 'slow': 'timeout', 'missing': 'not_found'}
        for path, status in expected.items():
            with self.subTest(path=path):
                document = fetcher.fetch(f'https://a.com/{path}')
                self.assertEqual(document.status, status)
                self.assertEqual(document.content_text, '')

    def test_live_timeout_after_retries(self):
        fetcher = Fetcher(LiveTransport(), respect_robots=False, timeout=10, retries=2, sleep=lambda _: None)
        with mock.patch('requests.get', side_effect=requests.Timeout('read timed out')) as get:
            document = fetcher.fetch('https://slow.example.com/report')
        self.assertEqual(document.status, FetchStatus.TIMEOUT)
        self.assertEqual(get.call_count, 3)
        self.assertEqual(get.call_args.kwargs['timeout'], 10)

    def test_same_normalized_url_is_fetched_once(self):
        transport = mock.Mock()
        transport.get.return_value = PageResponse(200, 'text/plain', 'stable body')
        fetcher = Fetcher(transport, respect_robots=False)
        first = fetcher.fetch('https://a.com/p?utm_source=x')
        second = fetcher.fetch('https://A.com/p/')
        self.assertIs(first, second)
        self.assertEqual(transport.get.call_count, 1)

    def test_disk_cache_is_namespaced(self):
        self.write_fixture('pages', {'https://a.com/p': {'text': 'body'}})
        cache = DocumentCache(namespace='run-1', cache_dir=self.root / 'cache')
        self.fetcher(cache=cache).fetch('https://a.com/p')
        self.assertEqual(len(list((self.root / 'cache' / 'run-1').glob('*.json'))), 1)

    def test_robots_disallow(self):
        self.write_fixture('pages', {
            'https://a.com/robots.txt': {'status': 200, 'content_type': 'text/plain',
                                         'body': 'User-agent: *\nDisallow: /private'},
            'https://a.com/private/x': {'text': 'secret'},
            'https://a.com/public': {'text': 'open'},
        })
        fetcher = self.fetcher(respect_robots=True)
        self.assertEqual(fetcher.fetch('https://a.com/private/x').status, FetchStatus.BLOCKED)
        self.assertEqual(fetcher.fetch('https://a.com/public').status, FetchStatus.OK)

    def test_malformed_url(self):
        with self.assertRaises(MalformedUrl):
            self.fetcher().fetch('not-a-url')

    def test_document_invariant(self):
        with self.assertRaises(EvidenceError):
            FetchedDocument(url='https://a.com', content_text='', retrieved_at=None, status='ok')
        with self.assertRaises(EvidenceError):
            FetchedDocument(url='https://a.com', content_text='x', retrieved_at=None, status='not_found')


ARXIV_FEED = """<?xml version="1.0" encoding="UTF-8"?>
<feed xmlns="http://www.w3.org/2005/Atom">
  <entry>
    <id>http://arxiv.org/abs/2401.01234v1</id>
    <published>2024-01-03T18:00:00Z</published>
    <title>Scaling Laws for
      Retrieval</title>
    <summary>We study retrieval.</summary>
  </entry>
</feed>"""


class ToolsTest(FixtureDirTestCase):
    def test_arxiv_feed(self):
        results = parse_arxiv_feed(ARXIV_FEED)
        self.assertEqual(results[0].url, 'http://arxiv.org/abs/2401.01234v1')
        self.assertEqual(results[0].title, 'Scaling Laws for Retrieval')
        self.assertEqual(results[0].published_date, date(2024, 1, 3))
        self.assertEqual(results[0].tool, 'arxiv')

    def test_replay_tools(self):
        self.write_fixture('github', {'*': [{'url': 'https://github.com/org/repo', 'published_date': '2024-05-01'}]})
        tools = build_evidence_tools('replay', fixture_dir=self.root)
        self.assertEqual(tools.available, {'web_search', 'url_fetch', 'arxiv', 'github'})
        found = tools.search(tools.query('repo', cutoff_date=date(2024, 5, 1) + timedelta(days=1)), tool='github')
        self.assertEqual(found[0].url, 'https://github.com/org/repo')
        self.assertEqual(tools.fetch('https://github.com/org/repo').status, FetchStatus.NOT_FOUND)
