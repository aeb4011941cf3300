from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Optional


@dataclass(frozen=True)
class CitationLink:
    url: str
    # Character range of the URL text inside Report.text.
    anchor_span: tuple[int, int]
    context: str
    # Offset where the citation is used; differs from anchor_span for
    # reference-style links whose URL lives in a definition line.
    position: int
    kind: str = 'inline'


@dataclass(frozen=True)
class Section:
    heading: Optional[str]
    level: int
    paragraphs: tuple[str, ...]


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    span: tuple[int, int]


@dataclass(frozen=True)
class Report:
    task_id: str
    query: str
    body: tuple[Section, ...]
    text: str
    citations: tuple[CitationLink, ...] = ()
    sentences: tuple[Sentence, ...] = ()
    generated_at: Optional[date] = None
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def sentence_at(self, offset):
        for sentence in self.sentences:
            if sentence.span[0] <= offset < sentence.span[1]:
                return sentence
        return None

    def cited_urls(self):
        return [link.url for link in self.citations]


@dataclass(frozen=True)
class RootDomain:
    value: str

    def __str__(self):
        return self.value
