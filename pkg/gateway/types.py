from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from django.conf import settings

from conf.jsonfiles import digest
from gateway.exceptions import GatewayError
from gateway.schemas import describe_schema, schema_name

PROVIDER_META_KEYS = ('model', 'usage', 'finish_reason')


@dataclass(frozen=True)
class JudgeRequest:
    role_prompt: str
    user_prompt: str
    # a rest_framework Serializer class
    output_schema: type
    temperature: float = 0.0
    max_attempts: int = 3

    def __post_init__(self):
        if self.temperature != 0:
            raise GatewayError("Evaluation calls run at temperature 0")
        if self.max_attempts < 1:
            raise GatewayError(f"max_attempts must be at least 1, got {self.max_attempts}")

    @property
    def schema_name(self):
        return schema_name(self.output_schema)


@dataclass(frozen=True)
class JudgeResponse:
    payload: dict
    raw_text: str
    provider_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FixtureKey:
    digest: str

    @classmethod
    def for_request(cls, req):
        return cls(digest({
            'role_prompt': req.role_prompt,
            'user_prompt': req.user_prompt,
            'output_schema': describe_schema(req.output_schema),
            'prompt_version': settings.PROMPT_VERSION,
            'model': settings.LLM_MODEL,
        }))

    def __str__(self):
        return self.digest


def clean_meta(meta: dict[str, Any] | None):
    """Keep only non-sensitive provider metadata."""
    return {key: meta[key] for key in PROVIDER_META_KEYS if meta and key in meta}
