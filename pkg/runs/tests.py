import io
import re
import shutil
import tempfile
from datetime import date
from pathlib import Path
from unittest import mock

from django.conf import settings as django_settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from conf.jsonfiles import file_digest, read_json, write_json
from evidence.tools import build_evidence_tools
from gateway.testing import ScriptedBackend
from runs.config import build_run_config, parse_metrics
from runs.exceptions import ConfigError, MissingProtocol
from runs.manifests import RunManifest
from runs.stores import ResultStore
from scoring.scorecards import METRICS, Scorecard

SAMPLES = Path(django_settings.BASE_DIR) / 'samples'
SAMPLE_TASKS = ['digital-euro', 'heatwave-demand', 'tiktok-status']
SECRET = 'sk-test-credential'
CONGRESS_URL = 'https://www.congress.gov/bill/118th-congress/house-bill/7521'


def report_lines(req):
    report = req.user_prompt.split('Report:\n', 1)[1]
    return [line for line in report.splitlines() if line.strip() and not line.startswith('#')]


def claims(req):
    return {'claims': [{'claim': line, 'quote': line} for line in report_lines(req)[:2]]}


def categorized_claims(req):
    return {'claims': [{'claim': line, 'quote': line, 'category': 'verifiable'} for line in report_lines(req)[:2]]}


def passages(req):
    """First sentence of the first document for the supporting pass, nothing opposing."""
    if 'explicitly confirm' not in req.user_prompt:
        return {'passages': []}
    first = re.search(r'^\[1\] \S+\n(.+?\.)', req.user_prompt, re.MULTILINE)
    return {'passages': [{'source': 1, 'passage': first.group(1)}] if first else []}


def replayed_evidence(mode, **kwargs):
    return build_evidence_tools('replay', **kwargs)


def sample_judge():
    return {
        'KeyClaimsSerializer': claims,
        'VerifiableClaimsSerializer': categorized_claims,
        'NeutralQueriesSerializer': {'queries': ['official record', 'latest figures']},
        'PassagesSerializer': passages,
        'FactualityJudgmentSerializer': {'label': 'Supported', 'rationale': 'confirmed'},
        'FaithfulnessJudgmentSerializer': {'label': 'Supported', 'rationale': 'stated by the source'},
        'DomainRatingSerializer': {'category': 'Government', 'score': 9, 'rationale': 'official'},
        'IdeasContentScoresSerializer': {'main_idea_clarity': 80, 'detail_relevance': 70,
                                         'information_density': 60, 'conceptual_synthesis': 70},
        'OrganizationScoresSerializer': {'heading_structure': 80, 'bullet_grouping_logic': 70,
                                         'structural_coherence': 80},
        'SentenceFluencyScoresSerializer': {'rhythm_variety': 70, 'transition_smoothness': 70,
                                            'readability_flow': 80},
        'KicVerdictSerializer': lambda req: {'verdict': 'yes' if 'January 23, 2026' in req.user_prompt else 'no',
                                             'justification': ''},
        'ValidationStepSerializer': {'thought': 'plan checked', 'action': 'finish'},
        'RqVerdictSerializer': {'deductions': [{'category': 'minor_gap', 'reason': 'no dates given'}]},
    }


class RunTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.fixtures = self.root / 'fixtures'
        # evidence only; each test records its own judge replies
        shutil.copytree(SAMPLES / 'fixtures', self.fixtures, ignore=shutil.ignore_patterns('judge'))
        self.results = self.root / 'results'
        overrides = override_settings(CACHE_DIR=str(self.root / 'cache'), RUN_DATE='2026-01-02',
                                      PROTOCOL_DIR=str(self.root / 'protocols'), RESULTS_DIR=str(self.results))
        overrides.enable()
        self.addCleanup(overrides.disable)

    def tearDown(self):
        self.tmp.cleanup()

    def command(self, name, *args, **options):
        out, err = io.StringIO(), io.StringIO()
        call_command(name, *args, stdout=out, stderr=err, **options)
        return out.getvalue()

    def record(self, name, *args, scripts=None, **options):
        """Run a command against a scripted provider, recording its judge fixtures.

        Evidence still comes from the sample fixtures.
        """
        backend = ScriptedBackend(scripts or sample_judge())
        with override_settings(LLM_API_KEY=SECRET), \
                mock.patch('gateway.client.LiveBackend', return_value=backend), \
                mock.patch('runs.config.build_evidence_tools', side_effect=replayed_evidence):
            return self.command(name, *args, mode='record', fixtures=str(self.fixtures), **options)


class RunConfigTest(RunTestCase):
    def test_replay_needs_fixtures(self):
        with self.assertRaises(ConfigError):
            build_run_config(mode='replay', fixture_dir=str(self.root / 'missing'))

    @override_settings(LLM_API_KEY=None)
    def test_live_needs_credentials(self):
        with self.assertRaises(ConfigError):
            build_run_config(mode='live')

    def test_yaml_then_flags(self):
        path = self.root / 'run.yaml'
        path.write_text(f"mode: replay\nfixture_dir: {self.fixtures}\nworkers: 3\ncutoff_date: 2025-01-01\n",
                        encoding='utf-8')
        config = build_run_config(path, workers=5)
        self.assertEqual(config.workers, 5)
        self.assertEqual(config.cutoff_date, date(2025, 1, 1))
        self.assertEqual(config.today, date(2026, 1, 2))

    def test_unknown_yaml_key(self):
        path = self.root / 'run.yaml'
        path.write_text('llm_api_key: leaked\n', encoding='utf-8')
        with self.assertRaises(ConfigError) as caught:
            build_run_config(path, check=False)
        self.assertIn('llm_api_key', str(caught.exception))

    @override_settings(LLM_API_KEY=SECRET)
    def test_snapshot_holds_no_credentials(self):
        config = build_run_config(mode='live')
        self.assertNotIn(SECRET, str(config.snapshot()))

    def test_metric_filter(self):
        self.assertEqual(parse_metrics('kic, WQ'), ('wq', 'kic'))
        with self.assertRaises(ConfigError):
            parse_metrics('wq,race')

    def test_run_id_is_a_content_address(self):
        config = build_run_config(mode='replay', fixture_dir=str(self.fixtures)).snapshot()
        first = RunManifest(command='evaluate', config=config, inputs={'a.md': '00'})
        second = RunManifest(command='evaluate', config=config, inputs={'a.md': '00'})
        third = RunManifest(command='evaluate', config=config, inputs={'a.md': '01'})
        self.assertEqual(first.run_id, second.run_id)
        self.assertNotEqual(first.run_id, third.run_id)


class ResultStoreTest(RunTestCase):
    def test_layout(self):
        store = ResultStore(self.results)
        card = Scorecard(task_id='t1', scores=dict.fromkeys(METRICS), run_id='abc')
        self.assertEqual(store.save_scorecard(card), self.results / 'scorecards' / 't1.json')
        path = store.save_audit('t1', 'kic', 'abc', [{'item': 0, 'verdict': 'yes'}, {'item': 1, 'verdict': 'no'}])
        self.assertEqual(path, self.results / 'audit' / 't1' / 'kic.jsonl')
        lines = path.read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], '{"item": 0, "run_id": "abc", "verdict": "yes"}')
        self.assertEqual([c.task_id for c in store.load_scorecards()], ['t1'])


class EvaluateCommandTest(RunTestCase):
    def evaluate(self, **options):
        return self.command('evaluate', str(SAMPLES / 'manifest.json'), mode='replay', fixtures=str(self.fixtures),
                            protocols=str(SAMPLES / 'protocols'), **options)

    def scorecard_digests(self):
        return {path.name: file_digest(path) for path in sorted((self.results / 'scorecards').glob('*.json'))}

    def test_replay_is_byte_identical(self):
        self.record('evaluate', str(SAMPLES / 'manifest.json'), protocols=str(SAMPLES / 'protocols'))
        self.evaluate()
        first = self.scorecard_digests()
        self.evaluate()
        self.assertEqual(self.scorecard_digests(), first)
        self.assertEqual(sorted(first), [f'{task}.json' for task in SAMPLE_TASKS])

        card = read_json(self.results / 'scorecards' / 'tiktok-status.json')
        self.assertEqual(card['scores']['rq'], 0.9)
        self.assertEqual(card['scores']['da'], 0.9)
        self.assertTrue((self.results / 'manifests' / f"{card['run_id']}.json").exists())
        self.assertTrue((self.results / 'audit' / 'tiktok-status' / 'factuality.jsonl').exists())
        self.assertTrue((self.results / 'metrics.prom').exists())

    def test_credentials_never_written(self):
        self.record('evaluate', str(SAMPLES / 'manifest.json'), protocols=str(SAMPLES / 'protocols'))
        for path in list(self.results.rglob('*.json*')) + list(self.fixtures.rglob('*.json')):
            self.assertNotIn(SECRET, path.read_text(encoding='utf-8'), path)

    def test_static_metrics_need_no_protocol(self):
        self.record('evaluate', str(SAMPLES / 'manifest.json'), metrics='wq,factuality,ci,da',
                    protocols=str(self.root / 'no-protocols'))
        card = read_json(self.results / 'scorecards' / 'digital-euro.json')
        self.assertIsNone(card['scores']['kic'])
        self.assertIsNotNone(card['scores']['wq'])

    def test_adaptive_metric_without_protocol(self):
        with self.assertRaises(CommandError) as caught:
            self.command('evaluate', str(SAMPLES / 'manifest.json'), mode='replay', fixtures=str(self.fixtures),
                         protocols=str(self.root / 'no-protocols'), metrics='kic')
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn('digital-euro', str(caught.exception))
        self.assertIsInstance(caught.exception.__cause__, MissingProtocol)

    def test_missing_recordings_leave_metrics_undefined(self):
        with self.assertRaises(CommandError) as caught:
            self.evaluate(metrics='wq')
        self.assertEqual(caught.exception.returncode, 2)
        card = read_json(self.results / 'scorecards' / 'heatwave-demand.json')
        self.assertIsNone(card['scores']['wq'])
        self.assertIn('FixtureMiss', card['diagnostics']['notes']['wq'][0])

    @override_settings(PROMPT_VERSION='1', LLM_MODEL='gpt-4o', LLM_API_KEY=None)
    def test_shipped_sample_recordings_replay(self):
        self.command('evaluate', str(SAMPLES / 'manifest.json'), config=str(SAMPLES / 'config.yaml'),
                     fixtures=str(SAMPLES / 'fixtures'), protocols=str(SAMPLES / 'protocols'),
                     results=str(self.results))
        scores = {task: read_json(self.results / 'scorecards' / f'{task}.json')['scores'] for task in SAMPLE_TASKS}
        self.assertEqual({task: s['wq'] for task, s in scores.items()},
                         {'tiktok-status': 0.75, 'heatwave-demand': 0.7, 'digital-euro': 0.6})
        self.assertEqual({task: s['da'] for task, s in scores.items()},
                         {'tiktok-status': 0.9, 'heatwave-demand': 0.85, 'digital-euro': 0.9})
        self.assertAlmostEqual(scores['tiktok-status']['kic'], 2 / 3)
        self.assertEqual(scores['heatwave-demand']['kic'], 1.0)
        self.assertEqual(scores['digital-euro']['kic'], 1.0)
        self.assertIsNone(scores['tiktok-status']['factuality'])
        audit = (self.results / 'audit' / 'tiktok-status' / 'kic.jsonl').read_text(encoding='utf-8')
        self.assertIn('January 23, 2026', audit)


class ProtocolCreateCommandTest(RunTestCase):
    def scripts(self):
        def until_observed(then):
            return lambda req: then if '(none yet)' not in req.user_prompt else {
                'action': 'web_search', 'arguments': ['latest developments']}

        kic = [{'question': f'Does the report mention development {i}?', 'grounding_urls': [CONGRESS_URL]}
               for i in range(8)]
        rq = [{'question': f'Does conclusion {i} follow from the evidence?', 'extract_step': 'Pull out the chain.',
               'verify_step': 'Search the record with web_search.', 'verify_tools': ['web_search'],
               'compare_step': 'Compare each link.', 'grounding_urls': [CONGRESS_URL]} for i in range(3)]
        stalled = {'action': 'web_search', 'arguments': ['still searching']}
        kic_step = until_observed({'action': 'finish', 'items': kic})
        return {
            'ToolSelectionSerializer': {'tools': []},
            'KicStepSerializer': lambda req: stalled if 'digital euro' in req.user_prompt else kic_step(req),
            'RqStepSerializer': until_observed({'action': 'finish', 'items': rq}),
        }

    @override_settings(PROTOCOL_STEP_BUDGET=4)
    def test_one_failing_task_is_partial(self):
        with self.assertRaises(CommandError) as caught:
            self.record('protocol_create', str(SAMPLES / 'manifest.json'), scripts=self.scripts())
        self.assertEqual(caught.exception.returncode, 2)
        written = sorted(path.stem for path in (self.root / 'protocols').glob('*.json'))
        self.assertEqual(written, ['heatwave-demand', 'tiktok-status'])
        protocol = read_json(self.root / 'protocols' / 'tiktok-status.json')
        self.assertEqual(protocol['created_at'], '2026-01-02T00:00:00+00:00')

    def test_replay_without_recordings(self):
        with self.assertRaises(CommandError) as caught:
            self.command('protocol_create', str(SAMPLES / 'manifest.json'), mode='replay',
                         fixtures=str(self.fixtures))
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn('FixtureMiss', str(caught.exception))

    def test_reasoning_query_roster(self):
        path = Path(django_settings.BASE_DIR) / 'harness' / 'data' / 'reasoning_queries.json'
        with self.assertRaises(CommandError):
            self.command('protocol_create', str(path), mode='replay', fixtures=str(self.fixtures))
        manifest = next((self.results / 'manifests').glob('*.json'))
        self.assertEqual(len(read_json(manifest)['failures']), 10)


class ScoreCommandTest(RunTestCase):
    def write(self, task_id, factuality):
        scores = dict.fromkeys(METRICS)
        scores['factuality'] = factuality
        ResultStore(self.results).save_scorecard(Scorecard(task_id=task_id, scores=scores))

    def test_mean_row(self):
        self.write('t1', 0.4)
        self.write('t2', 0.6)
        out = self.command('score')
        aggregate = read_json(self.results / 'aggregate.json')
        self.assertEqual(aggregate['scores']['factuality'], 0.5)
        self.assertEqual(aggregate['task_count'], 2)
        self.assertTrue(aggregate['run_id'])
        self.assertIn('50.00', out)

    def test_single_scorecard(self):
        self.write('t1', 0.4)
        self.command('score')
        self.assertEqual(read_json(self.results / 'aggregate.json')['scores']['factuality'], 0.4)

    def test_no_scorecards(self):
        with self.assertRaises(CommandError) as caught:
            self.command('score', str(self.root / 'empty'))
        self.assertEqual(caught.exception.returncode, 1)


class SweepCommandTest(RunTestCase):
    def test_oracle_default_grid(self):
        self.command('sweep')
        data = read_json(self.results / 'sweep.json')
        self.assertEqual(len(data['grid']), 16)
        self.assertEqual(data['factuality'][0], 1.0)
        self.assertEqual(data['factuality'][-1], 0.0)
        self.assertEqual(set(data['alignment']), {1.0})
        rows = (self.results / 'sweep.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(rows[0], 'r,factuality,alignment')
        self.assertEqual(len(rows), 17)

    def test_malformed_pair_file(self):
        path = self.root / 'pairs.json'
        path.write_text('[\n{"id": 1, "topic": "x",\n "true": {"claim": "a", "url": "https://a.example.org"}}\n]\n',
                        encoding='utf-8')
        with self.assertRaises(CommandError) as caught:
            self.command('sweep', pairs=str(path))
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn('line 2', str(caught.exception))


class InspectCommandTest(RunTestCase):
    def test_detects_protocols(self):
        out = self.command('inspect', str(SAMPLES / 'protocols' / 'tiktok-status.json'))
        self.assertTrue(out.startswith('protocol:'))

    def test_scorecard_summary(self):
        scores = dict.fromkeys(METRICS)
        scores['wq'] = 0.75
        path = ResultStore(self.results).save_scorecard(Scorecard(task_id='t1', scores=scores))
        out = self.command('inspect', str(path))
        self.assertTrue(out.startswith('scorecard:'))
        self.assertIn('75.00', out)

    def test_audit_lines(self):
        path = write_json(self.root / 'x.json', {})
        audit = ResultStore(self.results).save_audit('t1', 'rq', 'abc', [{'score': 9}])
        self.assertIn('1 row(s)', self.command('inspect', str(audit)))
        self.assertTrue(self.command('inspect', str(path)).startswith('unknown:'))
