from __future__ import annotations

import re
from dataclasses import dataclass, replace
from decimal import Decimal

from reports.links import normalize_url

WORD_RE = re.compile(r'\w+')
# a number as written in prose, e.g. 2, 2%, 3.1 percent, 1,200, 2023
NUMBER_RE = re.compile(
    r'(?<![\w.])(\d{1,3}(?:,\d{3})+|\d+)(?:\.(\d+))?(?!\d)(?:\s*(?:%|per\s?cent\b))?', re.IGNORECASE)


@dataclass(frozen=True)
class Claim:
    text: str
    source_span: tuple[int, int]
    cited_urls: tuple[str, ...] = ()
    verifiable: bool = True
    category: str = 'verifiable'

    def to_dict(self):
        return {
            'text': self.text,
            'source_span': list(self.source_span),
            'cited_urls': list(self.cited_urls),
            'verifiable': self.verifiable,
            'category': self.category,
        }


def words(text):
    return {word.lower() for word in WORD_RE.findall(text or '')}


def number_value(match):
    """Canonical value of a NUMBER_RE match: no separators, no unit, no trailing zeros."""
    digits = match.group(1).replace(',', '')
    if match.group(2):
        digits = f'{digits}.{match.group(2)}'
    return format(Decimal(digits).normalize(), 'f')


def numeric_values(text):
    return {number_value(match) for match in NUMBER_RE.finditer(text or '')}


def verbatim_span(text, quote):
    quote = (quote or '').strip()
    if not quote:
        return None
    start = text.find(quote)
    if start >= 0:
        return start, start + len(quote)
    pattern = r'\s+'.join(re.escape(part) for part in quote.split())
    match = re.search(pattern, text)
    return match.span() if match else None


def locate_span(report, quote, claim_text=''):
    """Span of the quoted report text, else of the sentence sharing the most words with it."""
    span = verbatim_span(report.text, quote)
    if span is not None:
        return span
    wanted = words(quote) | words(claim_text)
    best, best_overlap = None, 0
    for sentence in report.sentences:
        overlap = len(wanted & words(sentence.text))
        if overlap > best_overlap:
            best, best_overlap = sentence, overlap
    if best is None:
        return 0, 0
    return best.span


def _claims_in(claims, sentence):
    return [i for i, claim in enumerate(claims)
            if claim.source_span[0] < sentence.span[1] and sentence.span[0] < claim.source_span[1]]


def attach_citations(report, claims):
    """Give each claim the URLs cited in its sentence, or in the sentence right after it.

    URLs keep the spelling they were cited with; two spellings of one normalized URL count once.

    A link belongs to the claim(s) overlapping the link's own sentence; when that
    sentence holds no claim, it belongs to the claim(s) of the preceding sentence.
    """
    cited = [[] for _ in claims]
    for link in report.citations:
        sentence = report.sentence_at(link.position)
        if sentence is None:
            continue
        owners = _claims_in(claims, sentence)
        if not owners and sentence.index > 0:
            owners = _claims_in(claims, report.sentences[sentence.index - 1])
        key = normalize_url(link.url)
        for owner in owners:
            if key not in map(normalize_url, cited[owner]):
                cited[owner].append(link.url)
    return [replace(claim, cited_urls=tuple(urls)) for claim, urls in zip(claims, cited)]
