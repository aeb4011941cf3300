import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from django.conf import settings

from gateway.types import JudgeRequest
from reports.links import normalize_url
from workflow.claims import Claim, attach_citations, locate_span
from workflow.exceptions import PreconditionViolation
from workflow.factuality import DOCUMENT_CHARS, RECOVERABLE
from workflow.labels import FaithfulnessLabel, Judgment, LabelCounts, best_label
from workflow.prompts import FAITHFULNESS_PROMPT, JUDGE_ROLE, VERIFIABLE_CLAIMS_PROMPT
from workflow.serializers import FaithfulnessJudgmentSerializer, VerifiableClaimsSerializer

logger = logging.getLogger('evaluation_log')

NO_VERIFIABLE_CLAIMS = 'NoVerifiableClaims'


@dataclass
class CitedClaimRecord:
    index: int
    claim: Claim
    label: str
    # url -> {"status", "label", "rationale"}
    sources: dict = field(default_factory=dict)
    diagnostic: str = ''

    def to_dict(self):
        return {
            'index': self.index,
            'claim': self.claim.text,
            'span': list(self.claim.source_span),
            'cited_urls': list(self.claim.cited_urls),
            'sources': self.sources,
            'label': self.label,
            'diagnostic': self.diagnostic,
        }


@dataclass
class CitationResult:
    n_cited: int
    n_total: int
    cf_counts: LabelCounts
    records: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def ca_inputs(self):
        return {'n_cited': self.n_cited, 'n_total': self.n_total}


class CitationPipeline:
    """Claim attribution and citation faithfulness over a report's own citations."""

    def __init__(self, gateway, evidence, workers=None):
        self.gateway = gateway
        self.evidence = evidence
        self.workers = workers or settings.EVALUATION_WORKERS

    def _judge(self, prompt, schema):
        req = JudgeRequest(role_prompt=JUDGE_ROLE, user_prompt=prompt, output_schema=schema,
                           max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        return self.gateway.complete_structured(req).payload

    def extract_verifiable_claims(self, report):
        """All assertions with their category; only verifiable ones enter the label pipeline."""
        drafts = self._judge(VERIFIABLE_CLAIMS_PROMPT.format(report=report.text), VerifiableClaimsSerializer)['claims']
        claims = [
            Claim(text=draft['claim'], source_span=locate_span(report, draft['quote'], draft['claim']),
                  verifiable=draft['category'] == 'verifiable', category=draft['category'])
            for draft in drafts
        ]
        return attach_citations(report, claims)

    def judge_citation_faithfulness(self, claim, source):
        if not claim.cited_urls:
            raise PreconditionViolation(f"Claim has no citation: {claim.text!r}")
        if normalize_url(source.url) not in {normalize_url(url) for url in claim.cited_urls}:
            raise PreconditionViolation(f"{source.url} is not cited by {claim.text!r}")
        if not source.ok:
            return Judgment(FaithfulnessLabel.UNVERIFIABLE.value, f'source {source.status}')
        prompt = FAITHFULNESS_PROMPT.format(claim=claim.text, url=source.url,
                                            source=source.content_text[:DOCUMENT_CHARS])
        payload = self._judge(prompt, FaithfulnessJudgmentSerializer)
        return Judgment(payload['label'], payload['rationale'])

    def judge_claim(self, claim, index=0):
        """Best label over the claim's sources; a failing source counts as Unverifiable."""
        record = CitedClaimRecord(index=index, claim=claim, label=FaithfulnessLabel.UNVERIFIABLE.value)
        labels, errors = [], []
        for url in claim.cited_urls:
            try:
                source = self.evidence.fetch(url)
                judgment = self.judge_citation_faithfulness(claim, source)
            except RECOVERABLE as exc:
                logger.warning(f"Cited claim {index}, source {url} degraded: {exc}")
                errors.append(f"{url}: {exc.__class__.__name__}: {exc}")
                record.sources[url] = {'status': 'error', 'label': FaithfulnessLabel.UNVERIFIABLE.value,
                                       'rationale': str(exc)}
                labels.append(FaithfulnessLabel.UNVERIFIABLE.value)
                continue
            record.sources[url] = {'status': source.status, 'label': judgment.label,
                                   'rationale': judgment.rationale}
            labels.append(judgment.label)
        record.diagnostic = '; '.join(errors)
        record.label = best_label(labels)
        if len(labels) > 1:
            logger.debug(f"Claim {index}: per-source labels {labels}, kept {record.label}")
        return record

    def run_ci(self, report):
        claims = [claim for claim in self.extract_verifiable_claims(report) if claim.verifiable]
        cited = [claim for claim in claims if claim.cited_urls]
        diagnostics = []
        if not claims:
            logger.warning(f"{report.task_id}: no verifiable claims")
            diagnostics.append(NO_VERIFIABLE_CLAIMS)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            records = list(pool.map(self.judge_claim, cited, range(len(cited))))
        counts = LabelCounts.tally(record.label for record in records)
        logger.info(f"{report.task_id}: {len(cited)}/{len(claims)} claims cited, faithfulness {counts.to_dict()}")
        return CitationResult(n_cited=len(cited), n_total=len(claims), cf_counts=counts, records=records,
                              diagnostics=diagnostics)
