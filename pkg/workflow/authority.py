import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from django.conf import settings
from django.db import models

from gateway.exceptions import GatewayError
from gateway.types import JudgeRequest
from reports.documents import RootDomain
from reports.domains import extract_root_domain
from reports.exceptions import MalformedUrl, UnknownSuffix
from workflow.exceptions import EvaluationError
from workflow.labels import DomainCategory
from workflow.prompts import DOMAIN_PROMPT, JUDGE_ROLE
from workflow.serializers import DomainRatingSerializer

logger = logging.getLogger('evaluation_log')


class AuthorityBand(models.TextChoices):
    DEFINITIVE = 'Definitive'
    HIGH = 'High'
    MODERATE = 'Moderate'
    LOW = 'Low'


def band_for(score):
    if score >= 9:
        return AuthorityBand.DEFINITIVE.value
    if score >= 7:
        return AuthorityBand.HIGH.value
    if score >= 4:
        return AuthorityBand.MODERATE.value
    return AuthorityBand.LOW.value


@dataclass(frozen=True)
class DomainRating:
    domain: RootDomain
    category: str
    score: int
    rationale: str = ''
    diagnostic: str = ''

    def __post_init__(self):
        if not isinstance(self.score, int) or not 1 <= self.score <= 10:
            raise EvaluationError(f"Domain score must be an integer in [1, 10], got {self.score!r}")

    @property
    def band(self):
        return band_for(self.score)

    def to_dict(self):
        return {
            'domain': str(self.domain),
            'category': self.category,
            'score': self.score,
            'band': self.band,
            'rationale': self.rationale,
            'diagnostic': self.diagnostic,
        }


def cited_domains(report):
    """Root domains of every cited URL, first occurrence order; hosts without one are kept apart."""
    domains, unresolved, diagnostics = [], [], []
    for url in report.cited_urls():
        try:
            domain = extract_root_domain(url)
        except UnknownSuffix as exc:
            domain = RootDomain(exc.host)
            if domain not in unresolved:
                unresolved.append(domain)
            continue
        except MalformedUrl:
            diagnostics.append(f"skipped malformed citation {url!r}")
            continue
        if domain not in domains:
            domains.append(domain)
    return domains, [d for d in unresolved if d not in domains], diagnostics


class DomainRater:
    def __init__(self, gateway, workers=None):
        self.gateway = gateway
        self.workers = workers or settings.EVALUATION_WORKERS

    def rate(self, domain):
        req = JudgeRequest(role_prompt=JUDGE_ROLE, user_prompt=DOMAIN_PROMPT.format(domain=domain),
                           output_schema=DomainRatingSerializer, max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        try:
            payload = self.gateway.complete_structured(req).payload
        except GatewayError as exc:
            logger.warning(f"Rating {domain} failed, scored 1: {exc}")
            return DomainRating(domain=domain, category=DomainCategory.OTHER.value, score=1,
                                diagnostic=f"{exc.__class__.__name__}: {exc}")
        return DomainRating(domain=domain, category=payload['category'], score=payload['score'],
                            rationale=payload['rationale'])

    def run_da(self, report):
        """One rating per distinct root domain cited by the report."""
        domains, unresolved, diagnostics = cited_domains(report)
        for message in diagnostics:
            logger.info(f"{report.task_id}: {message}")
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            ratings = list(pool.map(self.rate, domains))
        ratings += [
            DomainRating(domain=host, category=DomainCategory.OTHER.value, score=1,
                         diagnostic='no registrable domain')
            for host in unresolved
        ]
        logger.info(f"{report.task_id}: rated {len(ratings)} domain(s)")
        return ratings
