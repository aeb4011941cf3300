import dataclasses
import logging
import threading

from django.conf import settings

from conf.metrics import FIXTURE_MISSES, JUDGE_CALLS, SCHEMA_REPAIRS
from gateway.backends import LiveBackend
from gateway.exceptions import AttemptsExhausted, FixtureMiss, GatewayError, SchemaViolation
from gateway.fixtures import FixtureStore
from gateway.schemas import validate_output
from gateway.types import FixtureKey, JudgeResponse, clean_meta

logger = logging.getLogger('gateway_log')

MODES = ('live', 'record', 'replay')

REPAIR_INSTRUCTION = (
    "\n\nYour previous reply was rejected by the validator with this error:\n{error}\n"
    "Previous reply:\n{reply}\n"
    "Reply again with only a JSON object that satisfies the schema."
)


def with_repair(req, malformed_text):
    """Re-ask with the validator's message appended; one attempt fewer remains."""
    _, error = validate_output(req.output_schema, malformed_text)
    if error is None:
        error = "response was rejected"
    remaining = req.max_attempts - 1
    if remaining < 1:
        raise AttemptsExhausted(error)
    prompt = req.user_prompt + REPAIR_INSTRUCTION.format(error=error, reply=(malformed_text or '')[:2000])
    return dataclasses.replace(req, user_prompt=prompt, max_attempts=remaining)


class Gateway:
    """Judged completions in live, record or replay mode.

    Safe for concurrent callers: provider calls are bounded by a semaphore and
    the fixture store serializes its writes.
    """

    def __init__(self, mode, store=None, backend=None, max_concurrency=None):
        if mode not in MODES:
            raise GatewayError(f"Unknown backend mode {mode!r}")
        if mode in ('record', 'replay') and store is None:
            raise GatewayError(f"{mode} mode needs a fixture store")
        if mode in ('live', 'record') and backend is None:
            raise GatewayError(f"{mode} mode needs a provider backend")
        self.mode = mode
        self.store = store
        self.backend = backend
        self._slots = threading.BoundedSemaphore(max_concurrency or settings.LLM_MAX_CONCURRENCY)

    @classmethod
    def from_settings(cls, mode, fixture_dir=None, max_concurrency=None):
        store = FixtureStore(fixture_dir) if fixture_dir and mode != 'live' else None
        backend = LiveBackend() if mode != 'replay' else None
        return cls(mode, store=store, backend=backend, max_concurrency=max_concurrency)

    def _provider(self, req):
        with self._slots:
            raw_text, meta = self.backend.complete(req)
        return raw_text, clean_meta(meta)

    def _call(self, req):
        key = FixtureKey.for_request(req)
        if self.mode == 'live':
            JUDGE_CALLS.labels(mode=self.mode, outcome='provider').inc()
            return self._provider(req)
        recorded = self.store.get(key)
        if recorded is not None:
            JUDGE_CALLS.labels(mode=self.mode, outcome='fixture').inc()
            logger.debug(f"{req.schema_name}: fixture hit {key}")
            return recorded
        if self.mode == 'replay':
            FIXTURE_MISSES.inc()
            JUDGE_CALLS.labels(mode=self.mode, outcome='miss').inc()
            logger.error(f"{req.schema_name}: fixture miss {key}")
            raise FixtureMiss(key.digest, req.schema_name)
        JUDGE_CALLS.labels(mode=self.mode, outcome='provider').inc()
        raw_text, meta = self._provider(req)
        self.store.put(key, req, raw_text, meta)
        return raw_text, meta

    def complete_structured(self, req):
        while True:
            raw_text, meta = self._call(req)
            payload, error = validate_output(req.output_schema, raw_text)
            if error is None:
                return JudgeResponse(payload=payload, raw_text=raw_text, provider_meta=meta)
            SCHEMA_REPAIRS.inc()
            logger.warning(f"{req.schema_name}: invalid response, {req.max_attempts - 1} attempt(s) left: {error}")
            try:
                req = with_repair(req, raw_text)
            except AttemptsExhausted as exc:
                raise SchemaViolation(req.schema_name, exc.error) from exc
