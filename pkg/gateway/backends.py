import json
import logging
import random
import time

import requests
from django.conf import settings

from gateway.exceptions import BackendUnavailable
from gateway.schemas import describe_schema
from gateway.types import clean_meta

logger = logging.getLogger('gateway_log')

RETRY_STATUSES = {429, 500, 502, 503, 504}


def schema_instruction(req):
    return (
        "Respond with a single JSON object and nothing else. "
        "It must match this schema:\n"
        + json.dumps(describe_schema(req.output_schema), sort_keys=True, indent=2)
    )


class LiveBackend:
    """OpenAI-compatible chat-completions provider."""

    def __init__(self, base_url=None, api_key=None, model=None, timeout=None, retries=3, backoff=2.0):
        self.base_url = (base_url or settings.LLM_BASE_URL).rstrip('/')
        self.model = model or settings.LLM_MODEL
        self.timeout = timeout or settings.LLM_TIMEOUT
        self.retries = retries
        self.backoff = backoff
        self._session = requests.Session()
        self._session.headers['Authorization'] = f"Bearer {api_key or settings.LLM_API_KEY}"

    def _body(self, req):
        return {
            'model': self.model,
            'temperature': req.temperature,
            'response_format': {'type': 'json_object'},
            'messages': [
                {'role': 'system', 'content': req.role_prompt + '\n\n' + schema_instruction(req)},
                {'role': 'user', 'content': req.user_prompt},
            ],
        }

    def complete(self, req):
        last_error = None
        for attempt in range(1, self.retries + 1):
            try:
                response = self._session.post(
                    f"{self.base_url}/chat/completions", json=self._body(req), timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = f"transport error: {exc.__class__.__name__}"
            else:
                if response.status_code in RETRY_STATUSES:
                    last_error = f"HTTP {response.status_code}"
                elif response.status_code >= 400:
                    raise BackendUnavailable(f"Provider rejected request: HTTP {response.status_code}")
                else:
                    return self._parse(response)
            logger.warning(f"{req.schema_name}: provider attempt {attempt}/{self.retries} failed ({last_error})")
            if attempt < self.retries:
                time.sleep(self.backoff ** attempt * (1 + random.random() * 0.5))
        raise BackendUnavailable(f"Provider unavailable after {self.retries} attempts: {last_error}")

    def _parse(self, response):
        try:
            data = response.json()
            choice = data['choices'][0]
            text = choice['message']['content'] or ''
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"Unexpected provider response shape: {exc}") from exc
        meta = clean_meta({
            'model': data.get('model'),
            'usage': data.get('usage'),
            'finish_reason': choice.get('finish_reason'),
        })
        return text, meta
