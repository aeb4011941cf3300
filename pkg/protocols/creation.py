import json
import logging

from django.conf import settings
from django.utils import timezone

from evidence.types import BASE_TOOLS, OPTIONAL_TOOLS
from gateway.exceptions import SchemaViolation
from gateway.types import JudgeRequest
from protocols.agent import AgentTask, ToolAgent
from protocols.documents import KicItem, Protocol, RqItem, ValidationPlan, mentioned_tools
from protocols.exceptions import PlanToolMismatch
from protocols.prompts import (
    AGENT_ROLE, KIC_GOAL, PLAN_REPAIR_PROMPT, RQ_GOAL, SELECTOR_PROMPT, SELECTOR_ROLE,
)
from protocols.serializers import KicStepSerializer, PlanSerializer, RqStepSerializer, ToolSelectionSerializer

logger = logging.getLogger('protocol_log')


def plan_from(data):
    return ValidationPlan(
        extract_step=data['extract_step'],
        verify_step=data['verify_step'],
        verify_tools=tuple(data['verify_tools']),
        compare_step=data['compare_step'],
    )


def stray_tools(data, tools):
    return (set(data['verify_tools']) | mentioned_tools(data['verify_step'])) - set(tools)


class ProtocolBuilder:
    """Creates protocols from the query and external evidence only.

    None of the creation operations accept a report.
    """

    def __init__(self, gateway, evidence, today=None, clock=timezone.now, budget=None):
        self.gateway = gateway
        self.evidence = evidence
        self.today = today or timezone.localdate()
        self.clock = clock
        self.budget = budget or settings.PROTOCOL_STEP_BUDGET

    def select_tools(self, query):
        req = JudgeRequest(role_prompt=SELECTOR_ROLE, user_prompt=SELECTOR_PROMPT.format(query=query),
                           output_schema=ToolSelectionSerializer, max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        try:
            payload = self.gateway.complete_structured(req).payload
        except SchemaViolation as exc:
            logger.warning(f"Tool selection failed, falling back to {sorted(BASE_TOOLS)}: {exc.error}")
            return frozenset(BASE_TOOLS)
        selected = frozenset(BASE_TOOLS | (set(payload['tools']) & OPTIONAL_TOOLS))
        logger.info(f"Selected tools {sorted(selected)} for {query!r}")
        return selected

    def _agent(self, tools, budget):
        return ToolAgent(self.gateway, self.evidence, tools, budget or self.budget, self.today)

    def create_kic(self, query, tools, budget=None, min_items=None, max_items=None):
        task = AgentTask(
            name='kic',
            goal=KIC_GOAL.format(min_items=min_items or settings.KIC_MIN_ITEMS,
                                 max_items=max_items or settings.KIC_MAX_ITEMS),
            step_schema=KicStepSerializer,
            build_item=lambda draft, grounding: KicItem(question=draft['question'], grounding=grounding),
            min_items=min_items or settings.KIC_MIN_ITEMS,
            max_items=max_items or settings.KIC_MAX_ITEMS,
        )
        return self._agent(tools, budget).run(query, task)

    def _repair_plan(self, query, tools, draft, stray):
        previous = {key: draft[key] for key in ('extract_step', 'verify_step', 'verify_tools', 'compare_step')}
        prompt = PLAN_REPAIR_PROMPT.format(
            query=query, question=draft['question'], stray=', '.join(sorted(stray)),
            tools=', '.join(sorted(tools)), plan=json.dumps(previous, indent=2, sort_keys=True))
        req = JudgeRequest(role_prompt=AGENT_ROLE, user_prompt=prompt, output_schema=PlanSerializer, max_attempts=1)
        try:
            return self.gateway.complete_structured(req).payload
        except SchemaViolation:
            return None

    def checked_plan(self, query, tools, draft):
        """The draft's plan, repaired once if it relies on tools outside the selection."""
        stray = stray_tools(draft, tools)
        if not stray:
            return plan_from(draft)
        logger.warning(f"Plan for {draft['question']!r} uses unselected {sorted(stray)}; asking for a repair")
        repaired = self._repair_plan(query, tools, draft, stray)
        if repaired is None:
            raise PlanToolMismatch(draft['question'], stray)
        still_stray = stray_tools(repaired, tools)
        if still_stray:
            raise PlanToolMismatch(draft['question'], still_stray)
        return plan_from(repaired)

    def create_rq(self, query, tools, budget=None, min_items=None, max_items=None):
        task = AgentTask(
            name='rq',
            goal=RQ_GOAL.format(tools=', '.join(sorted(tools)), min_items=min_items or settings.RQ_MIN_ITEMS,
                                max_items=max_items or settings.RQ_MAX_ITEMS),
            step_schema=RqStepSerializer,
            build_item=lambda draft, grounding: RqItem(
                question=draft['question'], plan=self.checked_plan(query, tools, draft), grounding=grounding),
            min_items=min_items or settings.RQ_MIN_ITEMS,
            max_items=max_items or settings.RQ_MAX_ITEMS,
        )
        return self._agent(tools, budget).run(query, task)

    def create(self, task_id, query, tools=None):
        tools = frozenset(BASE_TOOLS | set(tools)) if tools else self.select_tools(query)
        kic_items = self.create_kic(query, tools)
        rq_items = self.create_rq(query, tools)
        protocol = Protocol(task_id=task_id, query=query, created_at=self.clock(), tools_selected=tools,
                            kic_items=tuple(kic_items), rq_items=tuple(rq_items))
        logger.info(f"Protocol {task_id}: {len(kic_items)} checklist item(s), {len(rq_items)} question(s)")
        return protocol
