"""Markdown report parsing.

Only CommonMark ATX headings and URL-bearing links are interpreted. Fenced
code, inline code, images and HTML tags are masked (replaced by spaces of the same
length) before link scanning, so every span refers to the original text.
"""
from __future__ import annotations

import re

from reports.documents import CitationLink, Report, Section, Sentence
from reports.exceptions import EmptyInput
from reports.links import (
    AUTOLINK_RE, BARE_URL_RE, FOOTNOTE_RE, INLINE_LINK_RE, NUMBERED_CITATION_RE,
    REF_DEFINITION_RE, REF_USAGE_RE, inline_target, trim_url,
)

HEADING_RE = re.compile(r'^ {0,3}(#{1,6})(?:[ \t]+(.*?))?(?:[ \t]+#+)?[ \t]*$')
FENCE_RE = re.compile(r'^ {0,3}(`{3,}|~{3,})')
INLINE_CODE_RE = re.compile(r'(`+)(?!`).+?(?<!`)\1(?!`)')
HTML_TAG_RE = re.compile(r'</?[A-Za-z!][^>\n]*>')
BRACKETED_URL_RE = re.compile(r'<https?://[^<>\n]+>')
LINK_OPENER_RE = re.compile(r'\]\(\s*$')
IMAGE_RE = re.compile(r'!\[[^\]\n]*\]\([^)\n]*\)')
LIST_ITEM_RE = re.compile(r'^\s*(?:[-*+]|\d+[.)])\s+')
SENTENCE_BREAK_RE = re.compile(r'(?<=[.!?])["\')\]]*\s+(?=[A-Z0-9"“\'(\[*_])')


def _blank(match):
    return re.sub(r'[^\n]', ' ', match.group(0))


def _lines(text):
    """Yield (start_offset, line_without_newline)."""
    offset = 0
    for line in text.splitlines(keepends=True):
        yield offset, line.rstrip('\r\n')
        offset += len(line)


def mask_markdown(text):
    out = []
    fence = None
    for line in text.splitlines(keepends=True):
        content = line.rstrip('\r\n')
        ending = line[len(content):]
        opener = FENCE_RE.match(content)
        if fence is not None:
            if opener and opener.group(1)[0] == fence[0] and len(opener.group(1)) >= len(fence):
                fence = None
            out.append(' ' * len(content) + ending)
        elif opener:
            fence = opener.group(1)
            out.append(' ' * len(content) + ending)
        else:
            out.append(line)
    masked_text = ''.join(out)
    masked_text = INLINE_CODE_RE.sub(_blank, masked_text)
    masked_text = IMAGE_RE.sub(_blank, masked_text)
    masked_text = HTML_TAG_RE.sub(
        lambda m: m.group(0) if _is_link_target(masked_text, m) else _blank(m), masked_text)
    return masked_text


def _is_link_target(masked, match):
    tag = match.group(0)
    if AUTOLINK_RE.fullmatch(tag):
        return True
    # <...> target of an inline link may hold spaces
    return bool(BRACKETED_URL_RE.fullmatch(tag)
                and LINK_OPENER_RE.search(masked, max(0, match.start() - 16), match.start()))


def _split_sections(text, masked, diagnostics):
    sections = []
    blocks = []
    heading, level = None, 1
    # (depth, level) of the open headings, outermost first
    stack = []
    paragraph = []

    def close_paragraph():
        if paragraph:
            blocks.append('\n'.join(paragraph).strip())
            paragraph.clear()

    def close_section():
        close_paragraph()
        if heading is not None or any(blocks):
            sections.append(Section(heading=heading, level=level,
                                    paragraphs=tuple(b for b in blocks if b)))
        blocks.clear()

    for (offset, line), (_, masked_line) in zip(_lines(text), _lines(masked)):
        match = HEADING_RE.match(masked_line)
        if match:
            close_section()
            depth = len(match.group(1))
            heading = (match.group(2) or '').strip()
            while stack and stack[-1][0] >= depth:
                stack.pop()
            parent_depth, parent_level = stack[-1] if stack else (0, 0)
            level = parent_level + 1
            if parent_depth != depth - 1:
                diagnostics.append(
                    f"heading {heading!r} at depth {depth} has no parent at depth {depth - 1}; "
                    f"nested at level {level}")
            stack.append((depth, level))
            continue
        if not line.strip():
            close_paragraph()
        else:
            paragraph.append(line)
    close_section()
    return sections


def _split_sentences(text, masked):
    """Sentences over non-heading lines; list items and blank lines start new segments."""
    segments = []
    start = None
    for (offset, line), (_, masked_line) in zip(_lines(text), _lines(masked)):
        if HEADING_RE.match(masked_line) or not line.strip() or REF_DEFINITION_RE.match(line):
            if start is not None:
                segments.append((start, offset))
                start = None
            continue
        if LIST_ITEM_RE.match(line) and start is not None:
            segments.append((start, offset))
            start = None
        if start is None:
            start = offset
    if start is not None:
        segments.append((start, len(text)))

    sentences = []
    for seg_start, seg_end in segments:
        chunk = masked[seg_start:seg_end]
        cursor = 0
        boundaries = [m.end() for m in SENTENCE_BREAK_RE.finditer(chunk)] + [len(chunk)]
        for boundary in boundaries:
            raw = text[seg_start + cursor:seg_start + boundary]
            stripped = raw.strip()
            if stripped:
                lead = len(raw) - len(raw.lstrip())
                begin = seg_start + cursor + lead
                sentences.append(Sentence(index=len(sentences), text=stripped,
                                          span=(begin, begin + len(stripped))))
            cursor = boundary
    return sentences


def _context(sentences, offset):
    for sentence in sentences:
        if sentence.span[0] <= offset < sentence.span[1]:
            return sentence.text
    return ''


def _overlaps(span, taken):
    return any(span[0] < end and start < span[1] for start, end in taken)


def _collect_citations(masked, sentences, diagnostics):
    found = []
    taken = []

    for match in INLINE_LINK_RE.finditer(masked):
        url, span = inline_target(match)
        found.append(CitationLink(url=url, anchor_span=span, context=_context(sentences, match.start()),
                                  position=match.start(), kind='inline'))
        taken.append(match.span())

    for match in AUTOLINK_RE.finditer(masked):
        if _overlaps(match.span(), taken):
            continue
        found.append(CitationLink(url=match.group('url'), anchor_span=match.span('url'),
                                  context=_context(sentences, match.start()),
                                  position=match.start(), kind='autolink'))
        taken.append(match.span())

    definitions = {}
    for match in REF_DEFINITION_RE.finditer(masked):
        label = match.group('label').strip().lower()
        definitions.setdefault(label, (match.group('url'), match.span('url')))
        taken.append(match.span())

    used = set()
    for match in REF_USAGE_RE.finditer(masked):
        if _overlaps(match.span(), taken):
            continue
        label = match.group('label') or match.group('text')
        label = label.strip().lower()
        if label not in definitions:
            continue
        url, span = definitions[label]
        used.add(label)
        found.append(CitationLink(url=url, anchor_span=span, context=_context(sentences, match.start()),
                                  position=match.start(), kind='reference'))
        taken.append(match.span())

    for label, (url, span) in definitions.items():
        if label not in used:
            found.append(CitationLink(url=url, anchor_span=span, context='', position=span[0],
                                      kind='reference'))

    for match in BARE_URL_RE.finditer(masked):
        url = trim_url(match.group(0))
        span = (match.start(), match.start() + len(url))
        if not url or _overlaps(span, taken):
            continue
        found.append(CitationLink(url=url, anchor_span=span, context=_context(sentences, span[0]),
                                  position=span[0], kind='bare'))
        taken.append(span)

    unsupported = [m for m in FOOTNOTE_RE.finditer(masked)] + [
        m for m in NUMBERED_CITATION_RE.finditer(masked)
        if m.group(0)[1:-1].strip().lower() not in definitions
    ]
    if unsupported:
        diagnostics.append(
            f"{len(unsupported)} citation marker(s) without a URL (footnote or numbered style) ignored")

    found.sort(key=lambda link: (link.position, link.anchor_span))
    return found


def parse_report(markdown, task_id, query, generated_at=None):
    if markdown is None or not markdown.strip():
        raise EmptyInput(task_id)
    diagnostics = []
    masked = mask_markdown(markdown)
    sections = _split_sections(markdown, masked, diagnostics)
    sentences = _split_sentences(markdown, masked)
    citations = _collect_citations(masked, sentences, diagnostics)
    return Report(
        task_id=task_id,
        query=query,
        body=tuple(sections),
        text=markdown,
        citations=tuple(citations),
        sentences=tuple(sentences),
        generated_at=generated_at,
        diagnostics=tuple(diagnostics),
    )


def _strip_urls(text):
    text = INLINE_LINK_RE.sub(lambda m: m.group('text'), text)
    text = REF_DEFINITION_RE.sub('', text)
    text = AUTOLINK_RE.sub(' ', text)
    return BARE_URL_RE.sub(' ', text)


def report_stats(report):
    words = [token for token in _strip_urls(report.text).split() if re.search(r'\w', token)]
    return {
        'word_count': len(words),
        'section_count': len(report.body),
        'citation_count': len(report.citations),
    }
