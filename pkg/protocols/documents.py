from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime

from evidence.types import BASE_TOOLS, Tool
from protocols.exceptions import ProtocolError

PROTOCOL_VERSION = 1
STATIC_METRICS = ('WQ', 'Factuality', 'CI', 'DA')

TOOL_MENTION_RE = re.compile(r'\b(' + '|'.join(Tool.values) + r')\b', re.IGNORECASE)


def mentioned_tools(text):
    return {match.lower() for match in TOOL_MENTION_RE.findall(text or '')}


@dataclass(frozen=True)
class Grounding:
    url: str
    snippet: str = ''

    def to_dict(self):
        return {'url': self.url, 'snippet': self.snippet}


@dataclass(frozen=True)
class KicItem:
    question: str
    grounding: tuple[Grounding, ...]
    weight: float = 1.0

    def __post_init__(self):
        if not self.grounding:
            raise ProtocolError(f"Checklist item has no grounding: {self.question!r}")

    def to_dict(self):
        return {
            'question': self.question,
            'grounding': [g.to_dict() for g in self.grounding],
            'weight': self.weight,
        }


@dataclass(frozen=True)
class ValidationPlan:
    extract_step: str
    verify_step: str
    verify_tools: tuple[str, ...]
    compare_step: str

    def __post_init__(self):
        if not (self.extract_step.strip() and self.verify_step.strip() and self.compare_step.strip()):
            raise ProtocolError("A validation plan needs extract, verify and compare steps")
        if not self.verify_tools:
            raise ProtocolError("A validation plan must name at least one verification tool")

    @property
    def referenced_tools(self):
        """Tools listed for the verify step plus tool names written into it."""
        return set(self.verify_tools) | mentioned_tools(self.verify_step)

    def to_dict(self):
        return {
            'extract_step': self.extract_step,
            'verify_step': self.verify_step,
            'verify_tools': list(self.verify_tools),
            'compare_step': self.compare_step,
        }


@dataclass(frozen=True)
class RqItem:
    question: str
    plan: ValidationPlan
    grounding: tuple[Grounding, ...]

    def __post_init__(self):
        if not self.grounding:
            raise ProtocolError(f"Reasoning question has no grounding: {self.question!r}")

    def to_dict(self):
        return {
            'question': self.question,
            'plan': self.plan.to_dict(),
            'grounding': [g.to_dict() for g in self.grounding],
        }


@dataclass(frozen=True)
class Protocol:
    """Query-specific evaluation protocol, built without looking at any report."""

    task_id: str
    query: str
    created_at: datetime
    tools_selected: frozenset
    kic_items: tuple[KicItem, ...]
    rq_items: tuple[RqItem, ...]
    static_metrics: tuple[str, ...] = field(default=STATIC_METRICS)

    def __post_init__(self):
        if not self.kic_items or not self.rq_items:
            raise ProtocolError(f"Protocol {self.task_id} needs checklist items and reasoning questions")
        if not BASE_TOOLS <= self.tools_selected:
            raise ProtocolError(f"Protocol {self.task_id} is missing base tools {sorted(BASE_TOOLS)}")
        unknown = self.tools_selected - set(Tool.values)
        if unknown:
            raise ProtocolError(f"Protocol {self.task_id} names unknown tools {sorted(unknown)}")
        for item in self.rq_items:
            stray = item.plan.referenced_tools - self.tools_selected
            if stray:
                raise ProtocolError(f"Plan for {item.question!r} uses unselected tools {sorted(stray)}")

    def to_dict(self):
        return {
            'version': PROTOCOL_VERSION,
            'task_id': self.task_id,
            'query': self.query,
            'created_at': self.created_at.isoformat(),
            'tools_selected': sorted(self.tools_selected),
            'kic_items': [item.to_dict() for item in self.kic_items],
            'rq_items': [item.to_dict() for item in self.rq_items],
        }
