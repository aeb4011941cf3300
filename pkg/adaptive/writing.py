import logging
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings

from adaptive.prompts import WQ_PROMPT, WQ_ROLE
from adaptive.results import DimensionScore, WqScores
from adaptive.rubric import DIMENSIONS
from adaptive.serializers import DIMENSION_SERIALIZERS
from gateway.types import JudgeRequest

logger = logging.getLogger('evaluation_log')


class WritingQualityEvaluator:
    """One judged call per rubric dimension; dimension score is the weighted sum of its sub-scores."""

    def __init__(self, gateway, workers=None):
        self.gateway = gateway
        self.workers = workers or settings.EVALUATION_WORKERS

    def judge_dimension(self, report, dimension):
        prompt = WQ_PROMPT.format(query=report.query, dimension=dimension.name, rubric=dimension.render(),
                                  report=report.text)
        req = JudgeRequest(role_prompt=WQ_ROLE, user_prompt=prompt, output_schema=DIMENSION_SERIALIZERS[dimension.key],
                           max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        payload = dict(self.gateway.complete_structured(req).payload)
        rationale = payload.pop('rationale', '')
        return DimensionScore(dimension=dimension.key, sub_scores=payload, rationale=rationale)

    def evaluate_wq(self, report):
        with ThreadPoolExecutor(max_workers=min(self.workers, len(DIMENSIONS))) as pool:
            scores = WqScores(tuple(pool.map(lambda d: self.judge_dimension(report, d), DIMENSIONS)))
        logger.info(f"{report.task_id}: writing quality "
                    + ', '.join(f"{key} {float(value):.1f}" for key, value in scores.values().items()))
        return scores
