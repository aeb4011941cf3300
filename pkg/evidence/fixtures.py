import logging
import threading
from pathlib import Path

from conf.jsonfiles import read_json, write_json
from reports.links import normalize_url

logger = logging.getLogger('evidence_log')

CATCH_ALL = '*'


class EvidenceFixtures:
    """Recorded search results and pages under <root>/evidence/.

    search: {web_search,arxiv,github}.json, query text -> list of result dicts
    ("*" answers any query without its own entry).
    pages: pages.json, URL -> {"status", "content_type", "body"} or {"timeout": true}.
    """

    def __init__(self, root):
        self.root = Path(root) / 'evidence'
        self._lock = threading.Lock()
        self._loaded = {}

    def _file(self, name):
        with self._lock:
            if name not in self._loaded:
                path = self.root / f'{name}.json'
                self._loaded[name] = read_json(path) if path.exists() else {}
            return self._loaded[name]

    def search_results(self, tool, query):
        recorded = self._file(tool)
        if query in recorded:
            return recorded[query]
        return recorded.get(CATCH_ALL, [])

    def page(self, url):
        pages = self._file('pages')
        if url in pages:
            return pages[url]
        wanted = normalize_url(url)
        return next((entry for key, entry in pages.items() if normalize_url(key) == wanted), None)

    def _record(self, name, key, value):
        entries = self._file(name)
        with self._lock:
            entries[key] = value
            write_json(self.root / f'{name}.json', entries)
        logger.debug(f"Recorded {name} fixture for {key}")

    def record_search(self, tool, query, results):
        self._record(tool, query, [result.to_dict() for result in results])

    def record_page(self, url, entry):
        self._record('pages', url, entry)
