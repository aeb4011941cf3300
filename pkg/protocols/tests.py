import tempfile
from datetime import date, datetime, timezone as dt_timezone
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, strategies as st

from conf.jsonfiles import write_json
from evidence.tools import build_evidence_tools
from gateway.client import Gateway
from gateway.fixtures import FixtureStore
from gateway.testing import ScriptedBackend
from protocols.agent import Observation, Transcript
from protocols.creation import ProtocolBuilder
from protocols.documents import Grounding, KicItem, Protocol, RqItem, ValidationPlan
from protocols.exceptions import (
    BudgetExhausted, CorruptFile, PlanToolMismatch, ProtocolError, SchemaVersionMismatch,
)
from protocols.storage import load_protocol, protocol_path, save_protocol

TIKTOK_QUERY = 'What is the current legal status of TikTok in the United States?'
DEADLINE_URL = 'https://www.reuters.com/technology/tiktok-divestiture-deadline'
LAW_URL = 'https://www.congress.gov/bill/118th-congress/house-bill/7521'
NOW = datetime(2026, 1, 2, 9, 30, tzinfo=dt_timezone.utc)

SEARCH_RESULTS = [
    {'url': DEADLINE_URL, 'title': 'TikTok deadline extended',
     'snippet': 'The current divestiture deadline is January 23, 2026.', 'published_date': '2025-09-17'},
    {'url': LAW_URL, 'title': 'H.R.7521', 'snippet': 'Protecting Americans from Foreign Adversary Controlled '
                                                     'Applications Act.', 'published_date': '2024-04-24'},
]

SEARCH_STEP = {'thought': 'find the latest status', 'action': 'web_search', 'arguments': ['TikTok ban status']}


def kic_drafts(count, url=DEADLINE_URL):
    drafts = [{'question': 'Does the report state that the divestiture deadline is January 23, 2026?',
               'grounding_urls': [url]}]
    drafts += [{'question': f'Does the report mention required fact number {i}?', 'grounding_urls': [LAW_URL]}
               for i in range(1, count)]
    return drafts


def rq_draft(question, tools=('web_search',), verify_step='Search for the court record with web_search.'):
    return {
        'question': question,
        'extract_step': 'Pull out the chain from the law to the ban.',
        'verify_step': verify_step,
        'verify_tools': list(tools),
        'compare_step': 'Check that each link in the chain matches the record.',
        'grounding_urls': [LAW_URL],
    }


def until_observed(then):
    """Search first; once observations exist, reply with `then`."""
    return lambda req: SEARCH_STEP if '(none yet)' in req.user_prompt else then


class ProtocolTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        write_json(self.root / 'evidence' / 'web_search.json', {'*': SEARCH_RESULTS})
        write_json(self.root / 'evidence' / 'pages.json', {
            DEADLINE_URL: {'text': 'Officials confirmed the deadline of January 23, 2026 for a qualified divestiture.'},
        })
        self.evidence = build_evidence_tools('replay', fixture_dir=self.root)

    def tearDown(self):
        self.tmp.cleanup()

    def builder(self, scripts, budget=None):
        self.backend = ScriptedBackend(scripts)
        return ProtocolBuilder(Gateway('live', backend=self.backend), self.evidence,
                               today=date(2026, 1, 2), clock=lambda: NOW, budget=budget)

    def default_scripts(self):
        return {
            'ToolSelectionSerializer': {'tools': []},
            'KicStepSerializer': until_observed({'action': 'finish', 'items': kic_drafts(8)}),
            'RqStepSerializer': until_observed({'action': 'finish', 'items': [
                rq_draft('Why did Congress single out foreign-adversary-controlled apps?'),
                rq_draft('How does the deadline interact with the Supreme Court ruling?'),
                rq_draft('What would a qualified divestiture have to change?'),
            ]}),
        }


class SelectToolsTest(ProtocolTestCase):
    def test_repository_query_gets_github(self):
        builder = self.builder({'ToolSelectionSerializer': {'tools': ['github', 'web_search']}})
        tools = builder.select_tools("Compare two open-source repos' architectures")
        self.assertEqual(tools, {'web_search', 'url_fetch', 'github'})

    def test_news_query_keeps_base_tools(self):
        builder = self.builder({'ToolSelectionSerializer': {'tools': []}})
        self.assertEqual(builder.select_tools('Current inflation outlook'), {'web_search', 'url_fetch'})

    def test_invalid_selection_falls_back(self):
        builder = self.builder({'ToolSelectionSerializer': {'tools': ['telnet']}})
        with self.assertLogs('protocol_log', level='WARNING'):
            tools = builder.select_tools('Current inflation outlook')
        self.assertEqual(tools, {'web_search', 'url_fetch'})
        self.assertEqual(self.backend.calls['ToolSelectionSerializer'], 3)


class CreateKicTest(ProtocolTestCase):
    def test_items_are_grounded_and_date_aware(self):
        builder = self.builder(self.default_scripts())
        items = builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'})
        self.assertEqual(len(items), 8)
        self.assertTrue(any('January 23, 2026' in item.question for item in items))
        self.assertTrue(all(item.grounding and item.weight == 1 for item in items))
        self.assertEqual(items[0].grounding[0].snippet, 'The current divestiture deadline is January 23, 2026.')
        self.assertIn('Current date: January 2, 2026', self.backend.requests[0].user_prompt)

    def test_ungrounded_and_duplicate_items_are_dropped(self):
        drafts = kic_drafts(8) + [
            {'question': 'Does the report cite an unseen source?', 'grounding_urls': ['https://unseen.example.com']},
            kic_drafts(1)[0],
        ]
        builder = self.builder({'KicStepSerializer': until_observed({'action': 'finish', 'items': drafts})})
        items = builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'}, max_items=16)
        self.assertEqual(len(items), 8)
        self.assertNotIn('Does the report cite an unseen source?', [item.question for item in items])

    def test_fetched_page_grounds_items(self):
        steps = [
            {'action': 'url_fetch', 'arguments': [DEADLINE_URL]},
            {'action': 'finish', 'items': kic_drafts(3)[:1]},
        ]
        builder = self.builder({'KicStepSerializer': steps})
        items = builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'}, min_items=1, max_items=4)
        self.assertEqual(items[0].grounding[0].url, DEADLINE_URL)
        self.assertTrue(items[0].grounding[0].snippet.startswith('Officials confirmed'))

    def test_budget_exhausted(self):
        builder = self.builder({'KicStepSerializer': SEARCH_STEP})
        with self.assertRaises(BudgetExhausted) as caught:
            builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'}, budget=2, min_items=8)
        self.assertEqual(caught.exception.found, 0)
        self.assertEqual(self.backend.calls['KicStepSerializer'], 2)

    def test_excess_items_truncated_in_emission_order(self):
        builder = self.builder({'KicStepSerializer': until_observed({'action': 'finish', 'items': kic_drafts(20)})})
        items = builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'})
        self.assertEqual(len(items), 16)
        self.assertEqual(items[-1].question, 'Does the report mention required fact number 15?')

    def test_early_finish_is_refused(self):
        steps = [
            {'action': 'finish'},
            SEARCH_STEP,
            {'action': 'finish', 'items': kic_drafts(8)},
        ]
        builder = self.builder({'KicStepSerializer': steps})
        items = builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'})
        self.assertEqual(len(items), 8)
        self.assertIn('Finishing was refused', self.backend.requests[1].user_prompt)

    def test_non_yes_no_question_is_repaired(self):
        bad = {'action': 'finish', 'items': [{'question': 'Explain the ban.', 'grounding_urls': [LAW_URL]}]}
        good = {'action': 'finish', 'items': kic_drafts(8)}
        replies = iter([SEARCH_STEP, bad, good])
        builder = self.builder({'KicStepSerializer': lambda req: next(replies)})
        items = builder.create_kic(TIKTOK_QUERY, {'web_search', 'url_fetch'})
        self.assertEqual(len(items), 8)
        self.assertIn('Must be a yes/no question', self.backend.requests[2].user_prompt)


class CreateRqTest(ProtocolTestCase):
    def test_plans_use_selected_tools(self):
        builder = self.builder(self.default_scripts())
        tools = frozenset({'web_search', 'url_fetch'})
        items = builder.create_rq(TIKTOK_QUERY, tools)
        self.assertEqual(len(items), 3)
        for item in items:
            self.assertTrue(item.plan.referenced_tools)
            self.assertLessEqual(item.plan.referenced_tools, tools)

    def test_unselected_tool_gets_one_repair_then_rejected(self):
        builder = self.builder({'PlanSerializer': rq_draft('unused', tools=['github'])})
        draft = rq_draft('Which repositories implement the ban?', tools=['github'])
        with self.assertRaises(PlanToolMismatch) as caught:
            builder.checked_plan(TIKTOK_QUERY, {'web_search', 'url_fetch'}, draft)
        self.assertEqual(caught.exception.tools, ['github'])
        self.assertEqual(self.backend.calls['PlanSerializer'], 1)

    def test_tool_named_in_verify_text_counts(self):
        builder = self.builder({'PlanSerializer': rq_draft('unused')})
        draft = rq_draft('Is the ban studied?', verify_step='Search arxiv for legal analyses.')
        plan = builder.checked_plan(TIKTOK_QUERY, {'web_search', 'url_fetch'}, draft)
        self.assertEqual(plan.verify_tools, ('web_search',))
        self.assertEqual(self.backend.calls['PlanSerializer'], 1)

    def test_mismatched_draft_is_dropped(self):
        scripts = self.default_scripts()
        drafts = [rq_draft('Which repositories mirror the app?', tools=['github'])]
        drafts += [rq_draft(f'Reasoning question {i}?') for i in range(3)]
        scripts['RqStepSerializer'] = until_observed({'action': 'finish', 'items': drafts})
        scripts['PlanSerializer'] = rq_draft('unused', tools=['github'])
        items = self.builder(scripts).create_rq(TIKTOK_QUERY, frozenset({'web_search', 'url_fetch'}))
        self.assertEqual([item.question for item in items], [f'Reasoning question {i}?' for i in range(3)])


class ReplayTest(ProtocolTestCase):
    def test_record_then_replay_twice(self):
        store_dir = self.root / 'fixtures'
        backend = ScriptedBackend(self.default_scripts())
        recorder = ProtocolBuilder(Gateway('record', store=FixtureStore(store_dir), backend=backend),
                                   self.evidence, today=date(2026, 1, 2), clock=lambda: NOW)
        recorded = recorder.create('tiktok', TIKTOK_QUERY)

        replays = [
            ProtocolBuilder(Gateway('replay', store=FixtureStore(store_dir)), self.evidence,
                            today=date(2026, 1, 2), clock=lambda: NOW).create('tiktok', TIKTOK_QUERY)
            for _ in range(2)
        ]
        self.assertEqual(replays[0], recorded)
        self.assertEqual(replays[1], recorded)
        self.assertEqual(recorded.static_metrics, ('WQ', 'Factuality', 'CI', 'DA'))


def sample_protocol(task_id='t1'):
    grounding = (Grounding(url=DEADLINE_URL, snippet='  verbatim snippet, spaces kept  '),)
    plan = ValidationPlan(extract_step='Extract.', verify_step='Verify with web_search.',
                          verify_tools=('web_search',), compare_step='Compare.')
    return Protocol(
        task_id=task_id, query=TIKTOK_QUERY, created_at=NOW,
        tools_selected=frozenset({'web_search', 'url_fetch', 'arxiv'}),
        kic_items=(KicItem(question='Does the report state the deadline?', grounding=grounding),),
        rq_items=(RqItem(question='Why was the law passed?', plan=plan, grounding=grounding),),
    )


class StorageTest(ProtocolTestCase):
    def test_round_trip(self):
        protocol = sample_protocol()
        path = save_protocol(protocol, self.root)
        self.assertEqual(path, protocol_path('t1', self.root))
        self.assertEqual(load_protocol(path), protocol)

    def test_file_fields(self):
        path = save_protocol(sample_protocol(), self.root)
        text = path.read_text(encoding='utf-8')
        for name in ('version', 'task_id', 'query', 'created_at', 'tools_selected', 'kic_items', 'rq_items'):
            self.assertIn(f'"{name}"', text)
        self.assertTrue(text.endswith('\n'))

    def test_unknown_version(self):
        data = sample_protocol().to_dict()
        data['version'] = 99
        write_json(self.root / 'v.json', data)
        with self.assertRaises(SchemaVersionMismatch):
            load_protocol(self.root / 'v.json')

    def test_truncated_file(self):
        raw = save_protocol(sample_protocol(), self.root).read_bytes()
        truncated = self.root / 'truncated.json'
        truncated.write_bytes(raw[:len(raw) // 2])
        with self.assertRaises(CorruptFile):
            load_protocol(truncated)

    def test_invalid_field_is_named(self):
        data = sample_protocol().to_dict()
        data['kic_items'] = []
        write_json(self.root / 'empty.json', data)
        with self.assertRaises(CorruptFile) as caught:
            load_protocol(self.root / 'empty.json')
        self.assertIn('kic_items', caught.exception.error)

    def test_plan_with_unselected_tool_is_corrupt(self):
        data = sample_protocol().to_dict()
        data['rq_items'][0]['plan']['verify_tools'] = ['github']
        write_json(self.root / 'stray.json', data)
        with self.assertRaises(CorruptFile):
            load_protocol(self.root / 'stray.json')


class ProtocolInvariantTest(SimpleTestCase):
    def test_items_required(self):
        protocol = sample_protocol()
        with self.assertRaises(ProtocolError):
            Protocol(task_id='x', query='q', created_at=NOW, tools_selected=protocol.tools_selected,
                     kic_items=(), rq_items=protocol.rq_items)

    def test_grounding_required(self):
        with self.assertRaises(ProtocolError):
            KicItem(question='Does it?', grounding=())

    def test_plan_stages_required(self):
        with self.assertRaises(ProtocolError):
            ValidationPlan(extract_step='', verify_step='v', verify_tools=('web_search',), compare_step='c')


urls = st.sampled_from([f'https://source{i}.example.org/page' for i in range(8)])


class GroundingPropertyTest(SimpleTestCase):
    @given(st.lists(urls, max_size=8), st.lists(urls, max_size=8))
    def test_grounding_comes_from_transcript(self, seen, cited):
        transcript = Transcript()
        transcript.add(Observation(step=1, tool='web_search', argument='q',
                                   sources=[Grounding(url=url, snippet='s') for url in seen]))
        grounding = transcript.grounding_for(cited)
        self.assertTrue(all(g.url in seen for g in grounding))
        self.assertEqual({g.url for g in grounding}, set(seen) & set(cited))
