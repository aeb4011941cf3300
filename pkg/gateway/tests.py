import json
import tempfile
from concurrent.futures import ThreadPoolExecutor
from unittest import mock

import requests
from django.test import SimpleTestCase, override_settings
from rest_framework import serializers

from conf.jsonfiles import read_json
from gateway.backends import LiveBackend
from gateway.client import Gateway, with_repair
from gateway.exceptions import (
    AttemptsExhausted, BackendUnavailable, FixtureMiss, GatewayError, SchemaViolation,
)
from gateway.fixtures import FixtureStore
from gateway.schemas import describe_schema, validate_output
from gateway.testing import ScriptedBackend
from gateway.types import FixtureKey, JudgeRequest


class LabelVerdictSerializer(serializers.Serializer):
    label = serializers.ChoiceField(choices=['supported', 'partially_supported', 'contradicted', 'unverifiable'])


class ScoreSerializer(serializers.Serializer):
    score = serializers.IntegerField(min_value=1, max_value=10)
    reasons = serializers.ListField(child=serializers.CharField(), required=False)


def label_request(prompt='Is the claim supported?', attempts=3):
    return JudgeRequest(role_prompt='You are a careful fact checker.', user_prompt=prompt,
                        output_schema=LabelVerdictSerializer, max_attempts=attempts)


class GatewayTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.store = FixtureStore(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()


class RecordReplayTest(GatewayTestCase):
    def test_record_then_served_from_fixture(self):
        backend = ScriptedBackend({'LabelVerdictSerializer': {'label': 'supported'}})
        gateway = Gateway('record', store=self.store, backend=backend)

        first = gateway.complete_structured(label_request())
        second = gateway.complete_structured(label_request())

        self.assertEqual(first.payload, {'label': 'supported'})
        self.assertEqual(second.payload, first.payload)
        self.assertEqual(backend.total_calls, 1)
        self.assertEqual(len(self.store), 1)

    def test_replay_returns_recorded_response(self):
        backend = ScriptedBackend({'LabelVerdictSerializer': {'label': 'contradicted'}})
        recorded = Gateway('record', store=self.store, backend=backend).complete_structured(label_request())

        replayed = Gateway('replay', store=FixtureStore(self.tmp.name)).complete_structured(label_request())

        self.assertEqual(replayed.raw_text, recorded.raw_text)
        self.assertEqual(json.dumps(replayed.payload), json.dumps(recorded.payload))

    def test_replay_miss(self):
        gateway = Gateway('replay', store=self.store)
        with self.assertRaises(FixtureMiss):
            gateway.complete_structured(label_request('never recorded'))

    def test_fixture_keeps_only_allowlisted_metadata(self):
        class LeakyBackend:
            def complete(self, req):
                meta = {'model': 'm1', 'headers': {'Authorization': 'Bearer secret'}, 'api_key': 'secret'}
                return '{"label": "supported"}', meta

        gateway = Gateway('record', store=self.store, backend=LeakyBackend())
        response = gateway.complete_structured(label_request())
        record = read_json(self.store.path_for(FixtureKey.for_request(label_request())))

        self.assertEqual(response.provider_meta, {'model': 'm1'})
        self.assertEqual(record['response']['provider_meta'], {'model': 'm1'})
        self.assertNotIn('secret', json.dumps(record))

    def test_concurrent_distinct_requests_are_all_recorded(self):
        backend = ScriptedBackend({'LabelVerdictSerializer': {'label': 'unverifiable'}})
        gateway = Gateway('record', store=self.store, backend=backend, max_concurrency=3)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda i: gateway.complete_structured(label_request(f'claim {i}')), range(20)))
        self.assertEqual({r.payload['label'] for r in results}, {'unverifiable'})
        self.assertEqual(len(self.store), 20)


class RepairTest(GatewayTestCase):
    def test_attempts_are_decremented(self):
        repaired = with_repair(label_request(attempts=2), '{"label": "maybe"}')
        self.assertEqual(repaired.max_attempts, 1)

    def test_last_attempt_raises(self):
        with self.assertRaises(AttemptsExhausted):
            with_repair(label_request(attempts=1), '{"label": "maybe"}')

    def test_repair_prompt_quotes_validator_message(self):
        _, error = validate_output(LabelVerdictSerializer, '{"label": "maybe"}')
        repaired = with_repair(label_request(), '{"label": "maybe"}')
        self.assertIn(error, repaired.user_prompt)
        self.assertIn('"maybe" is not a valid choice.', repaired.user_prompt)
        self.assertTrue(repaired.user_prompt.startswith('Is the claim supported?'))

    def test_malformed_reply_is_repaired(self):
        backend = ScriptedBackend({'LabelVerdictSerializer': ['not json at all', {'label': 'supported'}]})
        gateway = Gateway('record', store=self.store, backend=backend)
        response = gateway.complete_structured(label_request())
        self.assertEqual(response.payload, {'label': 'supported'})
        self.assertEqual(backend.total_calls, 2)

    def test_schema_violation_after_all_attempts(self):
        backend = ScriptedBackend({'LabelVerdictSerializer': {'label': 'probably'}})
        gateway = Gateway('live', backend=backend)
        with self.assertRaises(SchemaViolation):
            gateway.complete_structured(label_request(attempts=3))
        self.assertEqual(backend.total_calls, 3)


class RequestTypesTest(SimpleTestCase):
    def test_temperature_is_fixed(self):
        with self.assertRaises(GatewayError):
            JudgeRequest('r', 'u', LabelVerdictSerializer, temperature=0.7)
        with self.assertRaises(GatewayError):
            JudgeRequest('r', 'u', LabelVerdictSerializer, max_attempts=0)

    def test_fixture_key_depends_on_prompts_and_schema(self):
        a = FixtureKey.for_request(JudgeRequest('r', 'u', LabelVerdictSerializer))
        self.assertEqual(a, FixtureKey.for_request(JudgeRequest('r', 'u', LabelVerdictSerializer)))
        self.assertNotEqual(a, FixtureKey.for_request(JudgeRequest('r', 'u', ScoreSerializer)))
        self.assertNotEqual(a, FixtureKey.for_request(JudgeRequest('r', 'u2', LabelVerdictSerializer)))

    def test_fixture_key_depends_on_prompt_version_and_model(self):
        a = FixtureKey.for_request(JudgeRequest('r', 'u', LabelVerdictSerializer))
        with override_settings(PROMPT_VERSION='2'):
            self.assertNotEqual(a, FixtureKey.for_request(JudgeRequest('r', 'u', LabelVerdictSerializer)))
        with override_settings(LLM_MODEL='another-model'):
            self.assertNotEqual(a, FixtureKey.for_request(JudgeRequest('r', 'u', LabelVerdictSerializer)))

    def test_describe_schema(self):
        schema = describe_schema(ScoreSerializer)
        self.assertEqual(schema['title'], 'ScoreSerializer')
        self.assertEqual(schema['required'], ['score'])
        self.assertEqual(schema['properties']['score'], {'type': 'integer', 'minimum': 1, 'maximum': 10})
        self.assertEqual(schema['properties']['reasons']['items'], {'type': 'string'})
        labels = describe_schema(LabelVerdictSerializer)['properties']['label']['enum']
        self.assertEqual(len(labels), 4)

    def test_validate_output_accepts_fenced_json(self):
        payload, error = validate_output(ScoreSerializer, 'Here:\n```json\n{"score": 7}\n```')
        self.assertIsNone(error)
        self.assertEqual(payload, {'score': 7})


class FakeResponse:
    def __init__(self, status_code, body=None):
        self.status_code = status_code
        self._body = body

    def json(self):
        return self._body


class LiveBackendTest(SimpleTestCase):
    ok_body = {
        'model': 'judge-1',
        'usage': {'prompt_tokens': 10, 'completion_tokens': 3},
        'choices': [{'message': {'content': '{"label": "supported"}'}, 'finish_reason': 'stop'}],
    }

    def test_retries_rate_limit_then_succeeds(self):
        backend = LiveBackend(base_url='https://llm.test/v1', api_key='k', model='judge-1', backoff=0)
        replies = [FakeResponse(429), FakeResponse(200, self.ok_body)]
        with mock.patch.object(requests.Session, 'post', side_effect=replies) as post:
            text, meta = backend.complete(label_request())
        self.assertEqual(post.call_count, 2)
        self.assertEqual(text, '{"label": "supported"}')
        self.assertEqual(meta['finish_reason'], 'stop')
        body = post.call_args.kwargs['json']
        self.assertEqual(body['temperature'], 0.0)
        self.assertIn('LabelVerdictSerializer', body['messages'][0]['content'])

    def test_unavailable_after_retries(self):
        backend = LiveBackend(base_url='https://llm.test/v1', api_key='k', retries=2, backoff=0)
        with mock.patch.object(requests.Session, 'post', side_effect=requests.ConnectionError('down')):
            with self.assertRaises(BackendUnavailable):
                backend.complete(label_request())

    def test_client_error_is_not_retried(self):
        backend = LiveBackend(base_url='https://llm.test/v1', api_key='k', backoff=0)
        with mock.patch.object(requests.Session, 'post', return_value=FakeResponse(401)) as post:
            with self.assertRaises(BackendUnavailable):
                backend.complete(label_request())
        self.assertEqual(post.call_count, 1)
