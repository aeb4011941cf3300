"""Reasoning-question execution.

An agent follows an item's validation plan against the report: it calls the
plan's tools within a step budget, then a final judged call lists the
reasoning flaws found. The score is 10 minus the scheduled points of those
flaws, never below 0.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings
from django.utils import timezone

from adaptive.prompts import INCOMPLETE_NOTE, RQ_ROLE, RQ_STEP_PROMPT, RQ_VERDICT_PROMPT
from adaptive.results import Penalty, RqResult
from adaptive.rubric import render_schedule
from adaptive.serializers import RqVerdictSerializer, ValidationStepSerializer
from conf.dates import long_date
from evidence.exceptions import EvidenceError
from gateway.exceptions import GatewayError, SchemaViolation
from gateway.types import JudgeRequest
from protocols.agent import ToolRunner, Transcript
from protocols.serializers import FINISH, MAX_PARALLEL_CALLS

logger = logging.getLogger('evaluation_log')


class ReasoningEvaluator:
    def __init__(self, gateway, evidence, budget=None, today=None, workers=None):
        self.gateway = gateway
        self.evidence = evidence
        self.budget = budget or settings.RQ_STEP_BUDGET
        self.today = today or timezone.localdate()
        self.workers = workers or settings.EVALUATION_WORKERS

    def _plan(self, item):
        return {
            'question': item.question,
            'extract_step': item.plan.extract_step,
            'verify_step': item.plan.verify_step,
            'compare_step': item.plan.compare_step,
        }

    def _decide(self, report, item, tools, transcript, steps_left, note):
        prompt = RQ_STEP_PROMPT.format(
            query=report.query,
            today=long_date(self.today),
            tools=', '.join(sorted(tools)),
            report=report.text,
            observations=transcript.render(),
            steps_left=steps_left,
            note=note,
            parallel=MAX_PARALLEL_CALLS,
            **self._plan(item),
        )
        req = JudgeRequest(role_prompt=RQ_ROLE, user_prompt=prompt, output_schema=ValidationStepSerializer,
                           max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        return self.gateway.complete_structured(req).payload

    def _verdict(self, report, item, transcript, incomplete):
        prompt = RQ_VERDICT_PROMPT.format(
            report=report.text,
            observations=transcript.render(),
            incomplete=INCOMPLETE_NOTE if incomplete else '',
            schedule=render_schedule(),
            **self._plan(item),
        )
        req = JudgeRequest(role_prompt=RQ_ROLE, user_prompt=prompt, output_schema=RqVerdictSerializer,
                           max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        return self.gateway.complete_structured(req).payload

    def execute_rq(self, report, rq_item, tools, index=0):
        """Run one validation plan; running out of steps scores what was gathered and flags the item."""
        runner = ToolRunner(self.evidence, tools)
        transcript = Transcript()
        used, note, finished = 0, '', False
        while used < self.budget:
            try:
                decision = self._decide(report, rq_item, runner.tools, transcript, self.budget - used, note)
            except SchemaViolation as exc:
                logger.warning(f"{report.task_id} item {index}: step {used + 1} wasted, {exc.error}")
                used += 1
                note = 'Your previous reply could not be used; answer with the JSON schema.'
                continue
            note = ''
            if decision['action'] == FINISH:
                used += 1
                finished = True
                break
            arguments = decision['arguments'][:self.budget - used]
            for observation in runner.run(used + 1, decision['action'], arguments):
                transcript.add(observation)
            used += len(arguments)
        if not finished:
            logger.warning(f"{report.task_id} item {index}: step budget of {self.budget} used up, scoring as incomplete")

        payload = self._verdict(report, rq_item, transcript, incomplete=not finished)
        result = RqResult.from_penalties(
            index=index,
            question=rq_item.question,
            penalties=[Penalty(d['category'], d['reason']) for d in payload['deductions']],
            transcript=tuple(o.to_dict() for o in transcript.observations),
            incomplete=not finished,
            summary=payload['summary'],
        )
        logger.info(f"{report.task_id} item {index}: reasoning {result.score}/10 in {used} step(s)")
        return result

    def _execute_or_skip(self, report, protocol, index):
        item = protocol.rq_items[index]
        try:
            return self.execute_rq(report, item, protocol.tools_selected, index), ''
        except (GatewayError, EvidenceError) as exc:
            logger.warning(f"{report.task_id} item {index}: reasoning check failed: {exc}")
            return None, f"item {index}: {exc.__class__.__name__}: {exc}"

    def run_rq(self, report, protocol):
        """(results, diagnostics) over every reasoning item; failed items are left out of the results."""
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            outcomes = list(pool.map(lambda i: self._execute_or_skip(report, protocol, i),
                                     range(len(protocol.rq_items))))
        results = [result for result, _ in outcomes if result is not None]
        diagnostics = [message for _, message in outcomes if message]
        return results, diagnostics
