from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from datetime import date, datetime
from typing import Optional

from django.db import models
from django.utils.dateparse import parse_date, parse_datetime

from evidence.exceptions import EvidenceError

PARTIAL_DATE_RE = re.compile(r'^(?P<year>\d{4})(?:-(?P<month>\d{1,2}))?$')


class FetchStatus(models.TextChoices):
    OK = 'ok', 'OK'
    PAYWALLED = 'paywalled', 'Paywalled'
    BLOCKED = 'blocked', 'Blocked'
    NOT_FOUND = 'not_found', 'Not found'
    TIMEOUT = 'timeout', 'Timed out'


class Tool(models.TextChoices):
    WEB_SEARCH = 'web_search', 'Web search'
    URL_FETCH = 'url_fetch', 'URL fetch'
    ARXIV = 'arxiv', 'arXiv search'
    GITHUB = 'github', 'GitHub search'


BASE_TOOLS = frozenset({Tool.WEB_SEARCH.value, Tool.URL_FETCH.value})
OPTIONAL_TOOLS = frozenset({Tool.ARXIV.value, Tool.GITHUB.value})
SEARCH_TOOLS = (Tool.WEB_SEARCH.value, Tool.ARXIV.value, Tool.GITHUB.value)


def parse_published(value):
    """Publication date from provider text.

    Partial dates resolve to the last day of their period, so a cutoff never
    admits content that might postdate it.
    """
    if value is None or isinstance(value, date) and not isinstance(value, datetime):
        return value
    if isinstance(value, datetime):
        return value.date()
    text = str(value).strip()
    if not text:
        return None
    partial = PARTIAL_DATE_RE.match(text)
    if partial:
        year = int(partial.group('year'))
        month = int(partial.group('month') or 12)
        if not 1 <= month <= 12:
            return None
        return date(year, month, calendar.monthrange(year, month)[1])
    try:
        moment = parse_datetime(text.replace('Z', '+00:00'))
        if moment:
            return moment.date()
        return parse_date(text[:10])
    except ValueError:
        return None


@dataclass(frozen=True)
class SearchQuery:
    text: str
    cutoff_date: Optional[date] = None
    max_results: int = 8

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise EvidenceError("Search query text is empty")
        if self.max_results < 1:
            raise EvidenceError(f"max_results must be at least 1, got {self.max_results}")


@dataclass(frozen=True)
class SearchResult:
    url: str
    title: str = ''
    snippet: str = ''
    published_date: Optional[date] = None
    tool: str = Tool.WEB_SEARCH.value

    def to_dict(self):
        return {
            'url': self.url,
            'title': self.title,
            'snippet': self.snippet,
            'published_date': self.published_date.isoformat() if self.published_date else None,
            'tool': self.tool,
        }

    @classmethod
    def from_dict(cls, data, tool=Tool.WEB_SEARCH.value):
        return cls(
            url=data['url'],
            title=data.get('title') or '',
            snippet=data.get('snippet') or '',
            published_date=parse_published(data.get('published_date')),
            tool=data.get('tool') or tool,
        )


@dataclass(frozen=True)
class FetchedDocument:
    url: str
    content_text: str
    retrieved_at: datetime
    status: str = FetchStatus.OK.value

    def __post_init__(self):
        if (self.status == FetchStatus.OK) != bool(self.content_text):
            raise EvidenceError(f"{self.url}: content must be present exactly when status is ok")

    @property
    def ok(self):
        return self.status == FetchStatus.OK

    def to_dict(self):
        return {
            'url': self.url,
            'status': self.status,
            'retrieved_at': self.retrieved_at.isoformat(),
            'content_text': self.content_text,
        }
