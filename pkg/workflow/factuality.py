import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from django.conf import settings
from django.utils import timezone

from conf.dates import long_date
from evidence.exceptions import EvidenceError
from evidence.search import dedupe
from gateway.exceptions import GatewayError
from gateway.types import JudgeRequest
from reports.exceptions import ReportError
from workflow.claims import (
    NUMBER_RE, Claim, attach_citations, locate_span, number_value, numeric_values, verbatim_span, words,
)
from workflow.exceptions import EmptyReport, EvaluationError, PreconditionViolation
from workflow.labels import FactualityLabel, Judgment, LabelCounts
from workflow.prompts import (
    FACTUALITY_PROMPT, JUDGE_ROLE, KEY_CLAIMS_PROMPT, NEUTRAL_QUERIES_PROMPT, OPPOSING_PROMPT, SUPPORTING_PROMPT,
    bullet_passages, numbered_documents,
)
from workflow.serializers import (
    FactualityJudgmentSerializer, KeyClaimsSerializer, NeutralQueriesSerializer, PassagesSerializer,
)

logger = logging.getLogger('evaluation_log')

DOCUMENT_CHARS = 6000
RECOVERABLE = (GatewayError, EvidenceError, EvaluationError, ReportError)


@dataclass(frozen=True)
class EvidenceBundle:
    # (url, passage) pairs; each passage is a verbatim slice of its document
    supporting: tuple = ()
    opposing: tuple = ()

    @property
    def empty(self):
        return not self.supporting and not self.opposing

    def to_dict(self):
        return {
            'supporting': [{'url': url, 'passage': passage} for url, passage in self.supporting],
            'opposing': [{'url': url, 'passage': passage} for url, passage in self.opposing],
        }


@dataclass
class ClaimRecord:
    index: int
    claim: Claim
    label: str
    queries: list = field(default_factory=list)
    evidence_urls: list = field(default_factory=list)
    bundle: EvidenceBundle = field(default_factory=EvidenceBundle)
    rationale: str = ''
    diagnostic: str = ''

    def to_dict(self):
        return {
            'index': self.index,
            'claim': self.claim.text,
            'span': list(self.claim.source_span),
            'queries': self.queries,
            'evidence_urls': self.evidence_urls,
            'evidence': self.bundle.to_dict(),
            'label': self.label,
            'rationale': self.rationale,
            'diagnostic': self.diagnostic,
        }


def contains_token(text, token):
    """True when text states any value of token, however it is written."""
    return bool(numeric_values(token) & numeric_values(text))


def neutralize(claim_text, queries, limit):
    """Drop the claim's own figures from its search queries, in any spelling."""
    banned = numeric_values(claim_text)
    cleaned, seen = [], set()
    for query in queries:
        query = NUMBER_RE.sub(lambda match: ' ' if number_value(match) in banned else match.group(0), query)
        query = ' '.join(query.split())
        if query and query.lower() not in seen:
            seen.add(query.lower())
            cleaned.append(query)
    return cleaned[:limit]


def guard_label(label, bundle):
    """A verdict needs evidence on its side; otherwise the claim is Unverifiable."""
    if label in (FactualityLabel.SUPPORTED, FactualityLabel.PARTIALLY_SUPPORTED) and not bundle.supporting:
        return FactualityLabel.UNVERIFIABLE.value
    if label == FactualityLabel.CONTRADICTED and not bundle.opposing:
        return FactualityLabel.UNVERIFIABLE.value
    return label


class FactualityPipeline:
    """Reference-free claim verification against independently searched evidence."""

    def __init__(self, gateway, evidence, today=None, cutoff_date=None, max_claims=None,
                 queries_per_claim=None, fetch_top=None, workers=None):
        self.gateway = gateway
        self.evidence = evidence
        self.today = today or timezone.localdate()
        self.cutoff_date = cutoff_date
        self.max_claims = max_claims or settings.FACTUALITY_MAX_CLAIMS
        self.queries_per_claim = queries_per_claim or settings.FACTUALITY_QUERIES_PER_CLAIM
        self.fetch_top = fetch_top or settings.FACTUALITY_FETCH_TOP
        self.workers = workers or settings.EVALUATION_WORKERS

    def _judge(self, prompt, schema):
        req = JudgeRequest(role_prompt=JUDGE_ROLE, user_prompt=prompt, output_schema=schema,
                           max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        return self.gateway.complete_structured(req).payload

    def extract_key_claims(self, report, query=None, today=None, n=None):
        if not report.sentences:
            raise EmptyReport(report.task_id)
        limit = n or self.max_claims
        prompt = KEY_CLAIMS_PROMPT.format(query=query or report.query, today=long_date(today or self.today),
                                          limit=limit, report=report.text)
        drafts = self._judge(prompt, KeyClaimsSerializer)['claims']
        if len(drafts) > limit:
            logger.info(f"{report.task_id}: keeping the first {limit} of {len(drafts)} claims")
        claims = [
            Claim(text=draft['claim'], source_span=locate_span(report, draft['quote'], draft['claim']))
            for draft in drafts[:limit]
        ]
        return attach_citations(report, claims)

    def neutralize_queries(self, claim):
        if not claim.verifiable:
            raise PreconditionViolation(f"Claim is not verifiable: {claim.text!r}")
        cutoff = ''
        if self.cutoff_date:
            cutoff = f"Only sources published on or before {long_date(self.cutoff_date)} are available.\n"
        payload = self._judge(NEUTRAL_QUERIES_PROMPT.format(claim=claim.text, cutoff=cutoff), NeutralQueriesSerializer)
        return neutralize(claim.text, payload['queries'], self.queries_per_claim)

    def gather_documents(self, claim, queries):
        """Search every query, rank the pooled results by overlap with the claim, fetch the top few."""
        pool = []
        for text in queries:
            try:
                pool.extend(self.evidence.search(self.evidence.query(text, self.cutoff_date)))
            except EvidenceError as exc:
                logger.warning(f"Search {text!r} failed: {exc}")
        claim_words = words(claim.text)
        ranked = sorted(dedupe(pool), key=lambda r: -len(claim_words & words(f'{r.title} {r.snippet}')))
        top = ranked[:self.fetch_top]
        if not top:
            return []
        with ThreadPoolExecutor(max_workers=len(top)) as fetchers:
            return list(fetchers.map(lambda result: self.evidence.fetch(result.url), top))

    def _passages(self, template, claim, documents):
        prompt = template.format(claim=claim.text, documents=numbered_documents(documents, DOCUMENT_CHARS))
        found = []
        for entry in self._judge(prompt, PassagesSerializer)['passages']:
            if entry['source'] > len(documents):
                continue
            document = documents[entry['source'] - 1]
            span = verbatim_span(document.content_text, entry['passage'])
            if span is None:
                logger.info(f"Dropped passage not found verbatim in {document.url}")
                continue
            pair = (document.url, document.content_text[span[0]:span[1]])
            if pair not in found:
                found.append(pair)
        return tuple(found)

    def dual_stream_extract(self, claim, documents):
        documents = [document for document in documents if document.ok]
        if not documents:
            return EvidenceBundle()
        return EvidenceBundle(
            supporting=self._passages(SUPPORTING_PROMPT, claim, documents),
            opposing=self._passages(OPPOSING_PROMPT, claim, documents),
        )

    def judge_factuality(self, claim, bundle):
        if bundle.empty:
            return Judgment(FactualityLabel.UNVERIFIABLE.value, 'no evidence found')
        prompt = FACTUALITY_PROMPT.format(claim=claim.text, supporting=bullet_passages(bundle.supporting),
                                          opposing=bullet_passages(bundle.opposing))
        payload = self._judge(prompt, FactualityJudgmentSerializer)
        label = guard_label(payload['label'], bundle)
        if label != payload['label']:
            logger.info(f"{payload['label']} without matching evidence, relabelled Unverifiable: {claim.text!r}")
        return Judgment(label, payload['rationale'])

    def verify(self, claim, index=0):
        """Full verification of one claim; failures degrade to Unverifiable."""
        record = ClaimRecord(index=index, claim=claim, label=FactualityLabel.UNVERIFIABLE.value)
        try:
            record.queries = self.neutralize_queries(claim)
            documents = self.gather_documents(claim, record.queries)
            record.evidence_urls = [document.url for document in documents if document.ok]
            record.bundle = self.dual_stream_extract(claim, documents)
            judgment = self.judge_factuality(claim, record.bundle)
        except RECOVERABLE as exc:
            logger.warning(f"Claim {index} degraded to Unverifiable: {exc}")
            record.diagnostic = f"{exc.__class__.__name__}: {exc}"
            return record
        record.label, record.rationale = judgment.label, judgment.rationale
        return record

    def run_factuality(self, report, query=None, today=None):
        claims = self.extract_key_claims(report, query, today)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            records = list(pool.map(self.verify, claims, range(len(claims))))
        counts = LabelCounts.tally(record.label for record in records)
        logger.info(f"{report.task_id}: factuality over {len(records)} claim(s): {counts.to_dict()}")
        return counts, records
