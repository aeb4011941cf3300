import json
import tempfile
from datetime import date, datetime, timezone as dt_timezone
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from adaptive.checklist import ChecklistEvaluator
from adaptive.reasoning import ReasoningEvaluator
from gateway.client import Gateway
from gateway.testing import ScriptedBackend
from harness.comparison import ReportVariant, compare_pairs, temporal_run
from harness.exceptions import DegenerateBaseline, FormatError, HarnessError
from harness.pairs import CorruptionConfig, build_batch, corrupted_count, load_pairs
from harness.sweep import (
    CitationAligner, PipelineVerifier, aligned_source, default_grid, oracle_verifier, parse_grid, run_sweep,
)
from protocols.documents import Grounding, KicItem, Protocol, RqItem, ValidationPlan
from reports.parser import parse_report
from workflow.exceptions import EvaluationError

QUERY = 'How would a heatwave next month affect ice cream demand?'
SOURCE_URL = 'https://www.bls.gov/ice-cream-sales'
NOW = datetime(2026, 1, 2, 9, 30, tzinfo=dt_timezone.utc)

SOUND_REPORT = """# Heatwaves and ice cream

Retail scanner data show ice cream sales rising with temperature in past heatwaves.
Supply limits at dairies cap how far sales can rise within a month.
"""

MALFORMED_REPORT = """# Heatwaves and ice cream

Ice cream demand rises because people buy more ice cream, so demand must rise.
A heatwave is just like a holiday, so sales will double.
"""


def pair_entry(pair_id, missing=None):
    entry = {
        'id': pair_id,
        'topic': f'Topic {pair_id}',
        'true': {'claim': f'True claim {pair_id}.', 'url': f'https://true.example.org/{pair_id}'},
        'false': {'claim': f'False claim {pair_id}.', 'url': f'https://false.example.org/{pair_id}'},
    }
    if missing:
        del entry[missing]
    return entry


class PairFileTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'pairs.json'

    def tearDown(self):
        self.tmp.cleanup()

    def test_bundled_dataset(self):
        pairs = load_pairs()
        self.assertEqual([pair.id for pair in pairs], list(range(1, 16)))
        crypto = pairs[12]
        self.assertIn('less than 1%', crypto.true_claim)
        self.assertIn('46% of bitcoin transactions', crypto.false_claim)
        self.assertTrue(all(pair.true_url and pair.false_url for pair in pairs))

    def test_missing_false_variant_reports_its_line(self):
        self.path.write_text('[\n' + json.dumps(pair_entry(1)) + ',\n' + json.dumps(pair_entry(2, 'false'))
                             + '\n]\n', encoding='utf-8')
        with self.assertRaises(FormatError) as caught:
            load_pairs(self.path)
        self.assertEqual(caught.exception.line, 3)
        self.assertIn('false', caught.exception.message)

    def test_broken_json_reports_its_line(self):
        self.path.write_text('[\n{"id": 1,\n"topic": }\n]\n', encoding='utf-8')
        with self.assertRaises(FormatError) as caught:
            load_pairs(self.path)
        self.assertEqual(caught.exception.line, 3)

    def test_duplicate_ids(self):
        self.path.write_text(json.dumps([pair_entry(1), pair_entry(1)]), encoding='utf-8')
        with self.assertRaises(FormatError):
            load_pairs(self.path)


class BatchTest(SimpleTestCase):
    def setUp(self):
        self.pairs = load_pairs()

    def test_no_corruption(self):
        batch = build_batch(self.pairs, CorruptionConfig(r=0))
        self.assertEqual(len(batch), 15)
        self.assertFalse(any(item.corrupted for item in batch))

    def test_full_corruption(self):
        batch = build_batch(self.pairs, CorruptionConfig(r=1))
        self.assertTrue(all(item.corrupted for item in batch))

    def test_false_variants_by_ascending_id(self):
        batch = build_batch(self.pairs, CorruptionConfig(r=Fraction(2, 5)))
        self.assertEqual([item.pair_id for item in batch if item.corrupted], [1, 2, 3, 4, 5, 6])
        self.assertEqual(sum(not item.corrupted for item in batch), 9)

    def test_claims_carry_their_citation(self):
        pair = self.pairs[0]
        false_item, true_item = build_batch([pair], CorruptionConfig(r=1, n=1))[0], pair.variant(False)
        self.assertEqual(false_item.claim.cited_urls, (pair.false_url,))
        self.assertEqual(true_item.claim.cited_urls, (pair.true_url,))

    def test_halves_round_up(self):
        self.assertEqual(corrupted_count(Fraction(1, 30), 15), 1)
        self.assertEqual(corrupted_count(Fraction(1, 31), 15), 0)

    def test_seeded_selection_is_repeatable(self):
        cfg = CorruptionConfig(r=Fraction(1, 3), seed=15)
        first, second = build_batch(self.pairs, cfg), build_batch(self.pairs, cfg)
        self.assertEqual(first, second)
        self.assertEqual(sum(item.corrupted for item in first), 5)

    def test_rate_out_of_range(self):
        with self.assertRaises(HarnessError):
            CorruptionConfig(r=Fraction(3, 2))

    def test_batch_larger_than_dataset(self):
        with self.assertRaises(HarnessError):
            build_batch(self.pairs, CorruptionConfig(r=0, n=16))

    @settings(max_examples=200, deadline=None)
    @given(st.fractions(min_value=0, max_value=1), st.integers(min_value=1, max_value=15))
    def test_batch_is_a_pure_function_of_its_config(self, r, n):
        cfg = CorruptionConfig(r=r, n=n)
        batch = build_batch(self.pairs, cfg)
        self.assertEqual(batch, build_batch(list(reversed(self.pairs)), cfg))
        self.assertEqual(sum(item.corrupted for item in batch), cfg.k)


class SweepTest(SimpleTestCase):
    def setUp(self):
        self.pairs = load_pairs()

    def test_oracle_over_the_default_grid(self):
        curve = run_sweep(default_grid(), self.pairs)
        self.assertEqual(len(curve.points), 16)
        for point in curve.points:
            self.assertEqual(point.factuality, Fraction(15 - corrupted_count(point.r, 15), 15))
            self.assertEqual(point.alignment, 1)
        scores = [point.factuality for point in curve.points]
        self.assertEqual(scores, sorted(scores, reverse=True))
        self.assertEqual(scores[-1], 0)

    def test_thirds(self):
        curve = run_sweep([0, Fraction(1, 3), Fraction(2, 3), 1], self.pairs)
        self.assertEqual([point.factuality for point in curve.points],
                         [1, Fraction(2, 3), Fraction(1, 3), 0])

    def test_failed_point_is_marked(self):
        def flaky(item):
            if item.pair_id == 15 and item.corrupted:
                raise EvaluationError('judge unavailable')
            return oracle_verifier(item)

        with self.assertLogs('harness_log', level='ERROR'):
            curve = run_sweep([0, Fraction(1, 2), 1], self.pairs, verifier=flaky)
        self.assertEqual([point.failed for point in curve.points], [False, False, True])
        self.assertIsNone(curve.points[-1].factuality)
        self.assertIn('EvaluationError', curve.points[-1].error)

    def test_parallel_points_match_sequential(self):
        grid = default_grid(5)
        self.assertEqual(run_sweep(grid, self.pairs, workers=3).to_dict(), run_sweep(grid, self.pairs).to_dict())

    def test_output_shapes(self):
        curve = run_sweep([0, 1], self.pairs)
        data = curve.to_dict()
        self.assertEqual((data['grid'], data['factuality'], data['alignment']), ([0.0, 1.0], [1.0, 0.0], [1.0, 1.0]))
        self.assertEqual(data['config']['verifier'], 'oracle_verifier')
        self.assertEqual(curve.to_csv().splitlines(),
                         ['r,factuality,alignment', '0.000000,1.000000,1.000000', '1.000000,0.000000,1.000000'])

    def test_grid_must_increase(self):
        with self.assertRaises(HarnessError):
            run_sweep([Fraction(1, 2), Fraction(1, 4)], self.pairs)

    def test_parse_grid(self):
        self.assertEqual(parse_grid(''), default_grid())
        self.assertEqual(parse_grid('3'), [0, Fraction(1, 3), Fraction(2, 3), 1])
        self.assertEqual(parse_grid('0, 1/2, 1'), [0, Fraction(1, 2), 1])
        with self.assertRaises(HarnessError):
            parse_grid('0,abc')

    def test_pipeline_adapters(self):
        verifier = PipelineVerifier(SimpleNamespace(verify=lambda claim, index: SimpleNamespace(label='Supported')))
        aligner = CitationAligner(SimpleNamespace(judge_claim=lambda claim, index: SimpleNamespace(label='Neutral')))
        curve = run_sweep([1], self.pairs, verifier=verifier, aligner=aligner)
        self.assertEqual((curve.points[0].factuality, curve.points[0].alignment), (1, 0))
        self.assertEqual(aligned_source(None), 'Supported')


def grounding():
    return (Grounding(url=SOURCE_URL, snippet='Sales track temperature.'),)


def heatwave_protocol(questions=('Does the report mention that past heatwaves lifted sales?',)):
    plan = ValidationPlan(
        extract_step='Pull out the causal chain from temperature to sales.',
        verify_step='Search for past heatwave sales data with web_search.',
        verify_tools=('web_search',),
        compare_step='Check each step against the data.',
    )
    return Protocol(
        task_id='reasoning-10',
        query=QUERY,
        created_at=NOW,
        tools_selected=frozenset({'web_search', 'url_fetch'}),
        kic_items=tuple(KicItem(question=q, grounding=grounding()) for q in questions),
        rq_items=(RqItem(question='Does the demand forecast follow from the temperature data?', plan=plan,
                         grounding=grounding()),),
    )


def deductions(req):
    """Sound report loses 2 points, the malformed one 5."""
    if 'people buy more ice cream' in req.user_prompt:
        return {'deductions': [{'category': 'circular_argument', 'reason': 'demand rises because it rises'},
                               {'category': 'false_equivalence', 'reason': 'heatwave treated as a holiday'}]}
    if 'catastrophic' in req.user_prompt:
        return {'deductions': [{'category': 'circular_argument', 'reason': 'x'}] * 4}
    return {'deductions': [{'category': 'minor_gap', 'reason': 'no regional split'},
                           {'category': 'minor_gap', 'reason': 'no price effect'}]}


class ReasoningPairTest(SimpleTestCase):
    def evaluator(self):
        backend = ScriptedBackend({'ValidationStepSerializer': {'thought': 'plan done', 'action': 'finish'},
                                   'RqVerdictSerializer': deductions})
        return ReasoningEvaluator(Gateway('live', backend=backend), evidence=None, today=date(2026, 1, 2))

    def report(self, text):
        return parse_report(text, 'reasoning-10', QUERY)

    def test_malformed_report_degrades(self):
        comparison = compare_pairs(self.evaluator(), self.report(SOUND_REPORT), self.report(MALFORMED_REPORT),
                                   heatwave_protocol())
        self.assertEqual((comparison.rq_sound, comparison.rq_malformed), (Fraction(4, 5), Fraction(1, 2)))
        self.assertEqual(comparison.relative_degradation, Fraction(3, 8))
        self.assertEqual(comparison.to_dict()['relative_degradation'], 0.375)

    def test_identical_reports(self):
        comparison = compare_pairs(self.evaluator(), self.report(SOUND_REPORT), self.report(SOUND_REPORT),
                                   heatwave_protocol())
        self.assertEqual(comparison.relative_degradation, 0)

    def test_zero_baseline(self):
        worthless = SOUND_REPORT + 'The outcome would be catastrophic.\n'
        with self.assertRaises(DegenerateBaseline):
            compare_pairs(self.evaluator(), self.report(worthless), self.report(MALFORMED_REPORT),
                          heatwave_protocol())

    def test_reports_must_answer_the_protocol_query(self):
        other = parse_report(SOUND_REPORT, 'reasoning-09', 'How will quantum computing change risk models?')
        with self.assertRaises(HarnessError):
            compare_pairs(self.evaluator(), other, self.report(MALFORMED_REPORT), heatwave_protocol())


CURRENT_REPORT = """# Ice cream outlook

The national weather service issued a heat advisory on December 28, 2025.
Retailers raised orders after the December 2025 dairy price cut.
Past heatwaves lifted sales by a fifth.
"""

STALE_REPORT = """# Ice cream outlook

Retailers raised orders after the December 2025 dairy price cut.
Past heatwaves lifted sales by a fifth.
"""

OLDEST_REPORT = """# Ice cream outlook

Past heatwaves lifted sales by a fifth.
"""

DATED_FACTS = {
    'Does the report mention the heat advisory of December 28, 2025?': 'December 28, 2025',
    'Does the report mention the December 2025 dairy price cut?': 'December 2025 dairy price cut',
    'Does the report mention that past heatwaves lifted sales?': 'Past heatwaves lifted sales',
}


def dated_fact_judge(req):
    question = req.user_prompt.splitlines()[0].removeprefix('Question: ')
    report = req.user_prompt.split('Report:\n', 1)[1]
    return {'verdict': 'yes' if DATED_FACTS[question] in report else 'no', 'justification': ''}


class TemporalRunTest(SimpleTestCase):
    def evaluator(self):
        return ChecklistEvaluator(Gateway('live', backend=ScriptedBackend({'KicVerdictSerializer': dated_fact_judge})))

    def variant(self, cutoff, text):
        return ReportVariant(cutoff=cutoff, report=parse_report(text, 'reasoning-10', QUERY))

    def test_staler_reports_cover_less(self):
        variants = [
            self.variant(date(2024, 1, 1), OLDEST_REPORT),
            self.variant(None, CURRENT_REPORT),
            self.variant(date(2025, 12, 20), STALE_REPORT),
        ]
        points = temporal_run(self.evaluator(), variants, heatwave_protocol(DATED_FACTS))
        self.assertEqual([point.cutoff for point in points], [None, date(2025, 12, 20), date(2024, 1, 1)])
        self.assertEqual([point.kic for point in points], [1, Fraction(2, 3), Fraction(1, 3)])
        self.assertGreater(points[0].kic, points[1].kic)
        self.assertEqual(points[1].to_dict()['cutoff'], '2025-12-20')

    def test_identical_variants_score_the_same(self):
        variants = [self.variant(None, STALE_REPORT), self.variant(date(2025, 1, 1), STALE_REPORT)]
        points = temporal_run(self.evaluator(), variants, heatwave_protocol(DATED_FACTS))
        self.assertEqual(points[0].kic, points[1].kic)
