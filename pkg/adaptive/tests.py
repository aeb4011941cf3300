import tempfile
from datetime import date, datetime, timezone as dt_timezone
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

from django.test import SimpleTestCase
from hypothesis import given, strategies as st

from adaptive.checklist import ChecklistEvaluator
from adaptive.reasoning import ReasoningEvaluator
from adaptive.results import DimensionScore, KicVerdicts, Penalty, RqResult
from adaptive.rubric import DEDUCTION_POINTS, IDEAS_CONTENT, SENTENCE_FLUENCY, Dimension, SubDimension
from adaptive.writing import WritingQualityEvaluator
from conf.jsonfiles import write_json
from evidence.tools import build_evidence_tools
from gateway.client import Gateway
from gateway.exceptions import SchemaViolation
from gateway.fixtures import FixtureStore
from gateway.testing import ScriptedBackend
from protocols.documents import Grounding, KicItem, Protocol, RqItem, ValidationPlan
from reports.parser import parse_report
from workflow.exceptions import EvaluationError, PreconditionViolation

QUERY = 'What is the current legal status of TikTok in the United States?'
DEADLINE_URL = 'https://www.reuters.com/technology/tiktok-divestiture-deadline'
LAW_URL = 'https://www.congress.gov/bill/118th-congress/house-bill/7521'
NOW = datetime(2026, 1, 2, 9, 30, tzinfo=dt_timezone.utc)
DEADLINE_QUESTION = 'Does the report state that the current divestiture deadline is January 23, 2026?'

SOUND_REPORT = """# TikTok in the United States

Congress passed the divestiture law in April 2024 after committee hearings documented data-access risks.
The deadline for a qualified divestiture was later extended to January 23, 2026.
"""

MALFORMED_REPORT = """# TikTok in the United States

TikTok must be banned because it is dangerous, and it is dangerous because it must be banned.
The ban caused the app's user growth to stall.
"""

SEARCH_STEP = {'thought': 'check the record', 'action': 'web_search', 'arguments': ['TikTok divestiture law history']}
FINISH_STEP = {'thought': 'enough evidence', 'action': 'finish'}


def grounding(url=LAW_URL):
    return (Grounding(url=url, snippet='Protecting Americans from Foreign Adversary Controlled Applications Act.'),)


def rq_item(question='Why did Congress single out foreign-adversary-controlled apps?', tools=('web_search',)):
    plan = ValidationPlan(
        extract_step='Pull out the chain from the law to the ban.',
        verify_step='Search for the legislative record with web_search.',
        verify_tools=tools,
        compare_step='Check that each link in the chain matches the record.',
    )
    return RqItem(question=question, plan=plan, grounding=grounding())


def protocol(kic_questions=(DEADLINE_QUESTION,), rq_items=None):
    return Protocol(
        task_id='tiktok',
        query=QUERY,
        created_at=NOW,
        tools_selected=frozenset({'web_search', 'url_fetch'}),
        kic_items=tuple(KicItem(question=q, grounding=grounding(DEADLINE_URL)) for q in kic_questions),
        rq_items=tuple(rq_items or (rq_item(),)),
    )


def report_part(req):
    return req.user_prompt.split('Report:\n', 1)[1]


def sub_scores(**overrides):
    """Valid replies for every dimension serializer; Organization works out to 72."""
    scores = {
        'IdeasContentScoresSerializer': {'main_idea_clarity': 80, 'detail_relevance': 80,
                                         'information_density': 80, 'conceptual_synthesis': 80},
        'OrganizationScoresSerializer': {'heading_structure': 70, 'bullet_grouping_logic': 90,
                                         'structural_coherence': 50},
        'SentenceFluencyScoresSerializer': {'rhythm_variety': 60, 'transition_smoothness': 60,
                                            'readability_flow': 60},
    }
    scores.update(overrides)
    return scores


class WritingQualityTest(SimpleTestCase):
    def evaluator(self, scripts):
        self.backend = ScriptedBackend(scripts)
        return WritingQualityEvaluator(Gateway('live', backend=self.backend), workers=3)

    def test_dimension_scores(self):
        scores = self.evaluator(sub_scores()).evaluate_wq(parse_report(SOUND_REPORT, 'tiktok', QUERY))
        self.assertEqual(scores.score('IdeasContent'), 80)
        self.assertEqual(scores.score('Organization'), 72)
        self.assertEqual(scores.score('SentenceFluency'), 60)
        self.assertEqual(self.backend.total_calls, 3)

    def test_rubric_texts_are_kept_word_for_word(self):
        rendered = IDEAS_CONTENT.render() + SENTENCE_FLUENCY.render()
        self.assertIn("Do not reward high scores based on the amount of content alone—focus on alignment", rendered)
        self.assertIn("cadence of the prose—whether it reads", rendered)
        self.assertIn("Do not reward correctness alone—this dimension", rendered)

    def test_prompts_carry_the_rubric(self):
        self.evaluator(sub_scores()).evaluate_wq(parse_report(SOUND_REPORT, 'tiktok', QUERY))
        prompts = {req.schema_name: req.user_prompt for req in self.backend.requests}
        self.assertIn('variation in sentence length and structure', prompts['SentenceFluencyScoresSerializer'])
        self.assertIn('weight 0.4', prompts['OrganizationScoresSerializer'])
        self.assertIn(QUERY, prompts['IdeasContentScoresSerializer'])

    def test_out_of_range_sub_score(self):
        scripts = sub_scores(OrganizationScoresSerializer={
            'heading_structure': 120, 'bullet_grouping_logic': 90, 'structural_coherence': 50})
        with self.assertRaises(SchemaViolation):
            self.evaluator(scripts).evaluate_wq(parse_report(SOUND_REPORT, 'tiktok', QUERY))

    def test_record_then_replay(self):
        with tempfile.TemporaryDirectory() as tmp:
            report = parse_report(SOUND_REPORT, 'tiktok', QUERY)
            recorder = Gateway('record', store=FixtureStore(tmp), backend=ScriptedBackend(sub_scores()))
            recorded = WritingQualityEvaluator(recorder).evaluate_wq(report)
            replayed = WritingQualityEvaluator(Gateway('replay', store=FixtureStore(tmp))).evaluate_wq(report)
        self.assertEqual(replayed, recorded)

    @given(st.lists(st.integers(min_value=0, max_value=50), min_size=3, max_size=3),
           st.integers(min_value=0, max_value=2))
    def test_scaling_sub_scores_scales_the_dimension(self, values, factor):
        keys = ['heading_structure', 'bullet_grouping_logic', 'structural_coherence']
        base = DimensionScore('Organization', dict(zip(keys, values)))
        scaled = DimensionScore('Organization', {key: value * factor for key, value in zip(keys, values)})
        self.assertEqual(scaled.score, base.score * factor)

    def test_weights_must_sum_to_one(self):
        with self.assertRaises(EvaluationError):
            Dimension('Broken', 'Broken', (SubDimension('a', 'A', Fraction(1, 2), ''),
                                           SubDimension('b', 'B', Fraction(1, 3), '')))

    def test_missing_sub_score(self):
        with self.assertRaises(EvaluationError):
            DimensionScore('Organization', {'heading_structure': 50})


KEY_FACTS = {DEADLINE_QUESTION: 'January 23, 2026'}


def fact_judge(req):
    """Answers yes exactly when the report text contains the question's key fact."""
    question = req.user_prompt.splitlines()[0].removeprefix('Question: ')
    fact = KEY_FACTS.get(question) or question.removeprefix('Does the report mention ').rstrip('?')
    verdict = 'yes' if fact in report_part(req) else 'no'
    return {'verdict': verdict, 'justification': fact if verdict == 'yes' else ''}


class ChecklistTest(SimpleTestCase):
    def evaluator(self, script=fact_judge):
        self.backend = ScriptedBackend({'KicVerdictSerializer': script})
        return ChecklistEvaluator(Gateway('live', backend=self.backend), workers=2)

    def test_stated_deadline_is_covered(self):
        verdicts = self.evaluator().evaluate_kic(parse_report(SOUND_REPORT, 'tiktok', QUERY), protocol())
        self.assertEqual(verdicts.verdicts, ('yes',))

    def test_missing_deadline_is_not(self):
        verdicts = self.evaluator().evaluate_kic(parse_report(MALFORMED_REPORT, 'tiktok', QUERY), protocol())
        self.assertEqual(verdicts.verdicts, ('no',))

    def test_judge_sees_only_the_report(self):
        self.evaluator().evaluate_kic(parse_report(SOUND_REPORT, 'tiktok', QUERY), protocol())
        prompt = self.backend.requests[0].user_prompt
        self.assertIn('do not use outside knowledge', prompt)
        self.assertNotIn(DEADLINE_URL, prompt)

    def test_failed_item_counts_as_no(self):
        questions = [DEADLINE_QUESTION, 'Does the report mention the Supreme Court?']

        def flaky(req):
            return {'verdict': 'maybe'} if 'Supreme Court' in req.user_prompt else fact_judge(req)

        with self.assertLogs('evaluation_log', level='WARNING'):
            verdicts = self.evaluator(flaky).evaluate_kic(parse_report(SOUND_REPORT, 'tiktok', QUERY),
                                                          protocol(questions))
        self.assertEqual(verdicts.verdicts, ('yes', 'no'))
        self.assertEqual(verdicts.diagnostics[0], '')
        self.assertIn('SchemaViolation', verdicts.diagnostics[1])
        self.assertEqual(len(verdicts.audit_rows(protocol(questions))), 2)

    def test_empty_checklist(self):
        with self.assertRaises(PreconditionViolation):
            self.evaluator().evaluate_kic(parse_report(SOUND_REPORT, 'tiktok', QUERY),
                                          SimpleNamespace(task_id='tiktok', kic_items=()))

    @given(st.lists(st.sampled_from(['data brokers', 'the Supreme Court', 'a qualified divestiture',
                                     'Project Texas', 'the App Store']), min_size=1, max_size=5, unique=True),
           st.integers(min_value=0, max_value=5))
    def test_longer_report_never_covers_less(self, facts, cut):
        questions = [f'Does the report mention {fact}?' for fact in facts]
        sentences = [f'The debate involved {fact}.' for fact in facts]
        shorter = parse_report('# R\n\n' + ' '.join(['Intro.'] + sentences[:cut]) + '\n', 'r', QUERY)
        longer = parse_report('# R\n\n' + ' '.join(['Intro.'] + sentences) + '\n', 'r', QUERY)
        evaluator = self.evaluator()
        before = evaluator.evaluate_kic(shorter, protocol(questions))
        after = evaluator.evaluate_kic(longer, protocol(questions))
        self.assertLessEqual(before.yes_count, after.yes_count)
        self.assertEqual(len(after), len(questions))
        for old, new in zip(before.verdicts, after.verdicts):
            self.assertFalse(old == 'yes' and new == 'no')

    def test_misaligned_verdicts_rejected(self):
        with self.assertRaises(EvaluationError):
            KicVerdicts(('yes', 'no'), ('',), ('', ''))


def reasoning_verdict(req):
    if 'because it must be banned' in req.user_prompt:
        return {'deductions': [
            {'category': 'circular_argument', 'reason': 'dangerous because banned, banned because dangerous'},
            {'category': 'unsupported_causal_claim', 'reason': 'the ban is said to stall growth with no evidence'},
        ], 'summary': 'circular'}
    return {'deductions': [{'category': 'minor_gap', 'reason': 'hearing dates not given'}], 'summary': 'sound'}


def observed_then_finish(req):
    return SEARCH_STEP if '(none yet)' in req.user_prompt else FINISH_STEP


class ReasoningTest(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        write_json(self.root / 'evidence' / 'web_search.json', {'*': [
            {'url': LAW_URL, 'title': 'H.R.7521', 'snippet': 'Signed into law April 24, 2024.'}]})
        self.evidence = build_evidence_tools('replay', fixture_dir=self.root)

    def tearDown(self):
        self.tmp.cleanup()

    def evaluator(self, scripts, budget=None, gateway=None):
        self.backend = ScriptedBackend(scripts)
        gateway = gateway or Gateway('live', backend=self.backend)
        return ReasoningEvaluator(gateway, self.evidence, budget=budget, today=date(2026, 1, 2), workers=2)

    def default_scripts(self):
        return {'ValidationStepSerializer': observed_then_finish, 'RqVerdictSerializer': reasoning_verdict}

    def test_malformed_reasoning_scores_lower(self):
        evaluator = self.evaluator(self.default_scripts())
        item = rq_item()
        sound = evaluator.execute_rq(parse_report(SOUND_REPORT, 'tiktok', QUERY), item, {'web_search', 'url_fetch'})
        malformed = evaluator.execute_rq(parse_report(MALFORMED_REPORT, 'tiktok', QUERY), item,
                                         {'web_search', 'url_fetch'})
        self.assertEqual((sound.score, malformed.score), (9, 4))
        self.assertLess(malformed.score, sound.score)
        self.assertFalse(sound.incomplete)
        self.assertEqual(sound.transcript[0]['sources'][0]['url'], LAW_URL)

    def test_budget_runs_out(self):
        scripts = {'ValidationStepSerializer': SEARCH_STEP, 'RqVerdictSerializer': reasoning_verdict}
        evaluator = self.evaluator(scripts, budget=3)
        with self.assertLogs('evaluation_log', level='WARNING'):
            result = evaluator.execute_rq(parse_report(SOUND_REPORT, 'tiktok', QUERY), rq_item(),
                                          {'web_search', 'url_fetch'})
        self.assertTrue(result.incomplete)
        self.assertEqual(len(result.transcript), 3)
        self.assertEqual(result.score, 9)
        verdict_prompt = self.backend.requests[-1].user_prompt
        self.assertIn('step budget ran out', verdict_prompt)

    def test_unselected_tool_is_refused(self):
        scripts = self.default_scripts()
        scripts['ValidationStepSerializer'] = lambda req: (
            {'action': 'arxiv', 'arguments': ['app bans']} if '(none yet)' in req.user_prompt else FINISH_STEP)
        result = self.evaluator(scripts).execute_rq(parse_report(SOUND_REPORT, 'tiktok', QUERY), rq_item(),
                                                    {'web_search', 'url_fetch'})
        self.assertEqual(result.transcript[0]['error'], 'tool not available for this query')

    def test_run_rq_skips_failed_items(self):
        items = [rq_item(), rq_item('What would a qualified divestiture have to change?')]
        scripts = self.default_scripts()
        scripts['RqVerdictSerializer'] = lambda req: (
            {'deductions': 'none'} if 'qualified divestiture have' in req.user_prompt else reasoning_verdict(req))
        with self.assertLogs('evaluation_log', level='WARNING'):
            results, diagnostics = self.evaluator(scripts).run_rq(parse_report(SOUND_REPORT, 'tiktok', QUERY),
                                                                  protocol(rq_items=items))
        self.assertEqual([r.index for r in results], [0])
        self.assertEqual(len(diagnostics), 1)
        self.assertTrue(diagnostics[0].startswith('item 1: SchemaViolation'))

    def test_record_then_replay(self):
        report = parse_report(MALFORMED_REPORT, 'tiktok', QUERY)
        store = self.root / 'judge-fixtures'
        recorder = Gateway('record', store=FixtureStore(store), backend=ScriptedBackend(self.default_scripts()))
        recorded = self.evaluator({}, gateway=recorder).execute_rq(report, rq_item(), {'web_search', 'url_fetch'})
        replayed = self.evaluator({}, gateway=Gateway('replay', store=FixtureStore(store))).execute_rq(
            report, rq_item(), {'web_search', 'url_fetch'})
        self.assertEqual(replayed, recorded)

    def test_three_points_off(self):
        result = RqResult.from_penalties(0, 'q', [Penalty('minor_gap', 'a'), Penalty('false_equivalence', 'b')])
        self.assertEqual(result.score, 7)
        self.assertEqual(result.fraction, Fraction(7, 10))

    def test_score_must_match_deductions(self):
        with self.assertRaises(EvaluationError):
            RqResult(index=0, question='q', score=10, penalties=(Penalty('minor_gap', 'a'),))

    @given(st.lists(st.sampled_from(sorted(DEDUCTION_POINTS)), max_size=8))
    def test_score_is_floored_at_zero(self, categories):
        result = RqResult.from_penalties(0, 'q', [Penalty(category, '') for category in categories])
        self.assertEqual(result.score, max(0, 10 - sum(DEDUCTION_POINTS[c] for c in categories)))
        self.assertTrue(0 <= result.score <= 10)
