import logging
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings

from adaptive.prompts import KIC_PROMPT, KIC_ROLE
from adaptive.results import KicVerdicts
from adaptive.serializers import NO, KicVerdictSerializer
from gateway.exceptions import GatewayError
from gateway.types import JudgeRequest
from workflow.exceptions import PreconditionViolation

logger = logging.getLogger('evaluation_log')


class ChecklistEvaluator:
    """Checks a report against a protocol's key-information items, one independent call per item."""

    def __init__(self, gateway, workers=None):
        self.gateway = gateway
        self.workers = workers or settings.EVALUATION_WORKERS

    def judge_item(self, report, item):
        """(verdict, justification, diagnostic); a failed call counts as no."""
        req = JudgeRequest(role_prompt=KIC_ROLE, user_prompt=KIC_PROMPT.format(question=item.question, report=report.text),
                           output_schema=KicVerdictSerializer, max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        try:
            payload = self.gateway.complete_structured(req).payload
        except GatewayError as exc:
            logger.warning(f"{report.task_id}: checklist item {item.question!r} counted as no: {exc}")
            return NO, '', f"{exc.__class__.__name__}: {exc}"
        return payload['verdict'], payload['justification'], ''

    def evaluate_kic(self, report, protocol):
        if not protocol.kic_items:
            raise PreconditionViolation(f"Protocol {protocol.task_id} has no checklist items")
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            judged = list(pool.map(lambda item: self.judge_item(report, item), protocol.kic_items))
        verdicts = KicVerdicts(*(tuple(column) for column in zip(*judged)))
        logger.info(f"{report.task_id}: {verdicts.yes_count}/{len(verdicts)} checklist items covered")
        return verdicts
