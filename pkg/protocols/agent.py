"""Bounded tool-calling loop shared by checklist and reasoning-question creation.

Each step is one judged decision: call a tool (up to MAX_PARALLEL_CALLS
arguments, run concurrently) or finish, optionally drafting items. An item only
survives if at least one of its grounding URLs was seen in the transcript.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from django.conf import settings

from conf.dates import long_date
from evidence.exceptions import EvidenceError
from evidence.types import Tool
from gateway.exceptions import SchemaViolation
from gateway.types import JudgeRequest
from protocols.documents import Grounding
from protocols.exceptions import BudgetExhausted, ItemRejected
from protocols.prompts import AGENT_ROLE, STEP_PROMPT
from protocols.serializers import FINISH, MAX_PARALLEL_CALLS
from reports.exceptions import MalformedUrl
from reports.links import normalize_url

logger = logging.getLogger('protocol_log')

SNIPPET_CHARS = 300
PAGE_CHARS = 1500


@dataclass
class Observation:
    step: int
    tool: str
    argument: str
    sources: list = field(default_factory=list)
    detail: str = ''
    error: str = ''

    def render(self):
        head = f"[{self.step}] {self.tool} {self.argument!r}"
        if self.error:
            return f"{head}: {self.error}"
        if not self.sources:
            return f"{head}: no results"
        lines = [head] + [f"  - {source.url}: {source.snippet}" for source in self.sources]
        if self.detail:
            lines.append(f"  page text: {self.detail}")
        return '\n'.join(lines)

    def to_dict(self):
        return {
            'step': self.step,
            'tool': self.tool,
            'argument': self.argument,
            'sources': [source.to_dict() for source in self.sources],
            'error': self.error,
        }


class Transcript:
    """Every tool call and every URL it surfaced, in call order."""

    def __init__(self):
        self.observations = []
        self._sources = {}

    def add(self, observation):
        self.observations.append(observation)
        for source in observation.sources:
            self._sources.setdefault(normalize_url(source.url), source)

    def __contains__(self, url):
        return normalize_url(url) in self._sources

    def grounding_for(self, urls):
        found = []
        for url in urls:
            source = self._sources.get(normalize_url(url))
            if source is not None and source not in found:
                found.append(source)
        return tuple(found)

    def render(self):
        return '\n'.join(o.render() for o in self.observations) or '(none yet)'


@dataclass(frozen=True)
class AgentTask:
    name: str
    goal: str
    # a Serializer class for one step decision
    step_schema: type
    # (draft dict, grounding tuple) -> item; raises ItemRejected to drop the draft
    build_item: Callable
    min_items: int
    max_items: int


class ToolRunner:
    """Runs agent tool calls; unavailable tools and failed calls come back as error observations."""

    def __init__(self, evidence, tools):
        self.evidence = evidence
        self.tools = set(tools)

    def call(self, step, tool, argument):
        observation = Observation(step=step, tool=tool, argument=argument)
        if tool not in self.tools:
            observation.error = 'tool not available for this query'
            return observation
        if tool == Tool.URL_FETCH:
            try:
                document = self.evidence.fetch(argument)
            except MalformedUrl:
                observation.error = 'not an absolute http(s) URL'
                return observation
            if not document.ok:
                observation.error = f'fetch failed ({document.status})'
                return observation
            text = document.content_text
            observation.sources = [Grounding(url=argument, snippet=text[:SNIPPET_CHARS])]
            observation.detail = text[:PAGE_CHARS]
            return observation
        try:
            results = self.evidence.search(self.evidence.query(argument), tool=tool)
        except EvidenceError as exc:
            logger.warning(f"{tool} {argument!r} failed: {exc}")
            observation.error = f'search failed ({exc.__class__.__name__})'
            return observation
        observation.sources = [Grounding(url=r.url, snippet=r.snippet or r.title) for r in results]
        return observation

    def run(self, first_step, tool, arguments):
        """Concurrent calls of one tool, observations in argument order."""
        steps = range(first_step, first_step + len(arguments))
        with ThreadPoolExecutor(max_workers=len(arguments)) as pool:
            return list(pool.map(lambda pair: self.call(pair[0], tool, pair[1]), zip(steps, arguments)))


class ToolAgent:
    def __init__(self, gateway, evidence, tools, budget, today):
        self.gateway = gateway
        self.runner = ToolRunner(evidence, tools)
        self.tools = self.runner.tools
        self.budget = budget
        self.today = today

    def _decide(self, query, task, transcript, drafted, steps_left, note):
        prompt = STEP_PROMPT.format(
            query=query,
            today=long_date(self.today),
            tools=', '.join(sorted(self.tools)),
            goal=task.goal,
            observations=transcript.render(),
            drafted=drafted,
            steps_left=steps_left,
            note=note,
            parallel=MAX_PARALLEL_CALLS,
        )
        req = JudgeRequest(role_prompt=AGENT_ROLE, user_prompt=prompt, output_schema=task.step_schema,
                           max_attempts=settings.JUDGE_MAX_ATTEMPTS)
        return self.gateway.complete_structured(req).payload

    def _accept(self, task, transcript, drafts, items, seen):
        for draft in drafts:
            question = draft['question']
            key = ' '.join(question.lower().split())
            if key in seen:
                continue
            grounding = transcript.grounding_for(draft['grounding_urls'])
            if not grounding:
                logger.info(f"{task.name}: dropped ungrounded item {question!r}")
                continue
            try:
                item = task.build_item(draft, grounding)
            except ItemRejected as exc:
                logger.warning(f"{task.name}: dropped item: {exc}")
                continue
            seen.add(key)
            items.append(item)

    def run(self, query, task):
        transcript = Transcript()
        items, seen = [], set()
        used, note = 0, ''
        while used < self.budget and len(items) < task.max_items:
            try:
                decision = self._decide(query, task, transcript, len(items), self.budget - used, note)
            except SchemaViolation as exc:
                logger.warning(f"{task.name}: step {used + 1} wasted, {exc.error}")
                used += 1
                note = 'Your previous reply could not be used; answer with the JSON schema.'
                continue
            self._accept(task, transcript, decision.get('items', []), items, seen)
            note = ''
            if decision['action'] == FINISH:
                used += 1
                if len(items) >= task.min_items:
                    break
                note = f'Finishing was refused: {len(items)} grounded item(s), at least {task.min_items} needed.'
                continue
            arguments = decision['arguments'][:self.budget - used]
            for observation in self.runner.run(used + 1, decision['action'], arguments):
                transcript.add(observation)
            used += len(arguments)
            logger.debug(f"{task.name}: {used}/{self.budget} steps, {len(items)} item(s)")

        if len(items) < task.min_items:
            logger.error(f"{task.name}: budget of {self.budget} used up with {len(items)} item(s)")
            raise BudgetExhausted(self.budget, len(items), task.min_items)
        if len(items) > task.max_items:
            logger.info(f"{task.name}: keeping the first {task.max_items} of {len(items)} items")
        logger.info(f"{task.name}: {min(len(items), task.max_items)} item(s) in {used} step(s)")
        return items[:task.max_items]
