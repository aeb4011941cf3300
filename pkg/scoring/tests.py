import itertools
import json
import tempfile
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from adaptive.results import DimensionScore, KicVerdicts, Penalty, RqResult, WqScores
from conf.jsonfiles import write_json
from scoring.exceptions import EmptyChecklist, EmptyResults, EmptyTaskSet, InvalidScorecard, ScoringError
from scoring.formulas import (
    cf_score, citation_integrity, claim_attribution, da_score, factuality_score, kic_score, rq_score, wq_final,
)
from scoring.scorecards import METRICS, Scorecard, aggregate, build_scorecard, load_scorecard
from scoring.tables import percent, render_table
from workflow.citations import CitationResult
from workflow.exceptions import PreconditionViolation
from workflow.labels import LabelCounts


def counts(supp=0, part=0, neu=0, con=0, unver=0):
    return LabelCounts(n_supp=supp, n_part=part, n_neu=neu, n_con=con, n_unver=unver)


def wq(ic, org, sf):
    return WqScores((
        DimensionScore('IdeasContent', dict.fromkeys(
            ['main_idea_clarity', 'detail_relevance', 'information_density', 'conceptual_synthesis'], ic)),
        DimensionScore('Organization', dict.fromkeys(
            ['heading_structure', 'bullet_grouping_logic', 'structural_coherence'], org)),
        DimensionScore('SentenceFluency', dict.fromkeys(
            ['rhythm_variety', 'transition_smoothness', 'readability_flow'], sf)),
    ))


def verdicts(yes, total):
    marks = tuple(['yes'] * yes + ['no'] * (total - yes))
    return KicVerdicts(marks, ('',) * total, ('',) * total)


def rq(*scores):
    penalties = {10: [], 9: ['minor_gap'], 8: ['minor_gap', 'minor_gap'], 6: ['circular_argument', 'minor_gap'],
                 5: ['circular_argument', 'false_equivalence'], 4: ['circular_argument', 'unsupported_causal_claim'],
                 0: ['circular_argument'] * 4}
    return [RqResult.from_penalties(i, 'q', [Penalty(c, '') for c in penalties[s]]) for i, s in enumerate(scores)]


def ratings(*scores):
    return [SimpleNamespace(score=score) for score in scores]


def card(task_id='t', **scores):
    values = dict.fromkeys(METRICS)
    values.update({metric: Fraction(value) if value is not None else None for metric, value in scores.items()})
    return Scorecard(task_id=task_id, scores=values)


class FactualityScoreTest(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(factuality_score(counts(supp=6, unver=4)), 1)
        self.assertEqual(factuality_score(counts(supp=3, part=2, con=1)), Fraction(2, 3))
        self.assertIsNone(factuality_score(counts(unver=5)))

    def test_neutral_is_not_a_factuality_label(self):
        with self.assertRaises(PreconditionViolation):
            factuality_score(counts(neu=1))

    def test_matches_formula_for_all_small_counts(self):
        for supp, part, con, unver in itertools.product(range(7), repeat=4):
            denominator = supp + part + con
            expected = Fraction(2 * supp + part, 2 * denominator) if denominator else None
            self.assertEqual(factuality_score(counts(supp, part, 0, con, unver)), expected)

    def test_label_weight_ordering(self):
        for supp, part, con in itertools.product(range(5), repeat=3):
            base = factuality_score(counts(supp, part, 0, con))
            more_supported = factuality_score(counts(supp + 1, part, 0, con))
            more_contradicted = factuality_score(counts(supp, part, 0, con + 1))
            if base is not None:
                self.assertGreaterEqual(more_supported, base)
                self.assertLessEqual(more_contradicted, base)


class CitationScoresTest(SimpleTestCase):
    def test_cf_examples(self):
        self.assertEqual(cf_score(counts(supp=4, unver=2)), 1)
        self.assertEqual(cf_score(counts(2, 1, 1, 1)), Fraction(1, 2))
        self.assertIsNone(cf_score(counts(unver=3)))

    def test_cf_matches_formula_for_all_small_counts(self):
        for supp, part, neu, con, unver in itertools.product(range(7), repeat=5):
            denominator = supp + part + neu + con
            expected = Fraction(2 * supp + part, 2 * denominator) if denominator else None
            self.assertEqual(cf_score(counts(supp, part, neu, con, unver)), expected)

    def test_claim_attribution(self):
        self.assertEqual(claim_attribution(10, 10), 1)
        self.assertEqual(claim_attribution(0, 10), 0)
        self.assertEqual(claim_attribution(7, 20), Fraction(7, 20))
        self.assertIsNone(claim_attribution(0, 0))
        with self.assertRaises(PreconditionViolation):
            claim_attribution(3, 2)

    def test_integrity_examples(self):
        self.assertEqual(citation_integrity(Fraction(1), Fraction(1)), 1)
        self.assertEqual(citation_integrity(Fraction(0), None), 0)
        self.assertEqual(citation_integrity(Fraction(4, 5), Fraction(1, 5)), Fraction(8, 25))
        self.assertIsNone(citation_integrity(None, Fraction(1, 2)))
        self.assertIsNone(citation_integrity(Fraction(1, 2), None))

    @settings(max_examples=10_000, deadline=None)
    @given(st.fractions(min_value=0, max_value=1, max_denominator=10_000),
           st.fractions(min_value=0, max_value=1, max_denominator=10_000))
    def test_harmonic_mean_algebra(self, ca, cf):
        ci = citation_integrity(ca, cf)
        if ca == 0:
            self.assertEqual(ci, 0)
            return
        if cf == 0:
            self.assertEqual(ci, 0)
            return
        self.assertEqual(ci, 2 * ca * cf / (ca + cf))
        low = min(ca, cf)
        self.assertLessEqual(low, ci)
        self.assertLessEqual(ci, 2 * low)
        self.assertLessEqual(ci, (ca + cf) / 2)
        if ca == cf:
            self.assertEqual(ci, ca)


class OtherScoresTest(SimpleTestCase):
    def test_da(self):
        self.assertEqual(da_score(ratings(10, 10)), 1)
        self.assertEqual(da_score(ratings(9, 7, 4)), Fraction(2, 3))
        self.assertIsNone(da_score([]))

    def test_kic_exhaustive(self):
        for total in range(1, 21):
            for yes in range(total + 1):
                self.assertEqual(kic_score(verdicts(yes, total)), Fraction(yes, total))
        self.assertEqual(kic_score(verdicts(7, 14)), Fraction(1, 2))
        with self.assertRaises(EmptyChecklist):
            kic_score(verdicts(0, 0))

    def test_rq(self):
        self.assertEqual(rq_score(rq(10)), 1)
        self.assertEqual(rq_score(rq(8, 4)), Fraction(3, 5))
        self.assertEqual(rq_score(rq(0)), 0)
        with self.assertRaises(EmptyResults):
            rq_score([])

    def test_wq(self):
        self.assertEqual(wq_final(wq(60, 60, 60)), Fraction(3, 5))
        self.assertAlmostEqual(float(wq_final(wq(0, 0, 100))), 0.3333, places=4)
        self.assertEqual(wq_final(wq(100, 100, 100)), 1)


class ScorecardTest(SimpleTestCase):
    def test_build_from_metric_outputs(self):
        citations = CitationResult(n_cited=7, n_total=10, cf_counts=counts(supp=5, neu=2))
        result = build_scorecard('t1', wq=wq(60, 60, 60), factuality=counts(supp=3, part=2, con=1, unver=2),
                                 citations=citations, ratings=ratings(9), kic=verdicts(7, 14),
                                 rq=rq(8, 4), run_id='run-1')
        self.assertEqual(result.scores['factuality'], Fraction(2, 3))
        self.assertEqual(result.scores['ca'], Fraction(7, 10))
        self.assertEqual(result.scores['cf'], Fraction(5, 7))
        self.assertEqual(result.scores['ci'], citation_integrity(Fraction(7, 10), Fraction(5, 7)))
        self.assertEqual(result.unverifiable_fraction, Fraction(1, 4))
        self.assertEqual(result.undefined_metrics, [])

    def test_zero_citation_report_scores_zero_ci(self):
        citations = CitationResult(n_cited=0, n_total=4, cf_counts=counts())
        result = build_scorecard('t', citations=citations)
        self.assertEqual(result.scores['ci'], 0)
        self.assertIsNone(result.scores['cf'])

    def test_unjudgeable_citations_leave_ci_undefined(self):
        citations = CitationResult(n_cited=2, n_total=4, cf_counts=counts(unver=2))
        result = build_scorecard('t', citations=citations)
        self.assertIsNone(result.scores['ci'])
        self.assertTrue(result.notes['ci'])

    def test_metrics_not_run_are_undefined(self):
        result = build_scorecard('t', factuality=counts(supp=1))
        self.assertEqual(result.undefined_metrics, ['wq', 'ci', 'ca', 'cf', 'da', 'kic', 'rq'])

    def test_json_shape(self):
        data = build_scorecard('t', factuality=counts(supp=1, unver=1)).to_dict()
        self.assertEqual(set(data['scores']), set(METRICS))
        self.assertEqual(data['scores']['factuality'], 1.0)
        self.assertEqual(set(data['diagnostics']), {'undefined_metrics', 'unverifiable_fraction',
                                                    'excluded_counts', 'notes'})
        self.assertEqual(data['diagnostics']['unverifiable_fraction'], 0.5)

    def test_load_saved_scorecard(self):
        original = build_scorecard('t', factuality=counts(supp=1, con=1), ratings=ratings(7))
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(Path(tmp) / 't.json', original.to_dict())
            self.assertEqual(load_scorecard(path).scores, original.scores)
            data = original.to_dict()
            data['scores']['wq'] = 1.5
            write_json(path, data)
            with self.assertRaises(InvalidScorecard) as raised:
                load_scorecard(path)
            self.assertIn('scores.wq', str(raised.exception))
            path.write_text('{not json', encoding='utf-8')
            with self.assertRaises(InvalidScorecard):
                load_scorecard(path)

    def test_out_of_range_score_rejected(self):
        with self.assertRaises(ScoringError):
            card(wq=Fraction(3, 2))


class AggregateTest(SimpleTestCase):
    def test_single_task(self):
        citations = CitationResult(n_cited=3, n_total=4, cf_counts=counts(supp=2, part=1))
        only = build_scorecard('t', wq=wq(60, 70, 80), factuality=counts(supp=2, con=1), citations=citations)
        self.assertEqual(aggregate([only]).scores, only.scores)

    def test_mean_and_exclusion(self):
        self.assertEqual(aggregate([card(factuality=0.4), card(factuality=0.6)]).scores['factuality'],
                         (Fraction(0.4) + Fraction(0.6)) / 2)
        result = aggregate([card(factuality=Fraction(2, 5)), card(factuality=None)])
        self.assertEqual(result.scores['factuality'], Fraction(2, 5))
        self.assertEqual(result.excluded_counts['factuality'], 1)
        self.assertEqual(result.task_count, 2)

    def test_dataset_ci_from_mean_ca_and_cf(self):
        first = card(ca=Fraction(1), cf=Fraction(1, 2), ci=Fraction(2, 3))
        second = card(ca=Fraction(1, 2), cf=Fraction(1), ci=Fraction(2, 3))
        result = aggregate([first, second])
        self.assertEqual(result.scores['ci'], Fraction(3, 4))

    def test_empty(self):
        with self.assertRaises(EmptyTaskSet):
            aggregate([])

    @given(st.permutations([Fraction(1, 3), Fraction(2, 7), None, Fraction(1), Fraction(0)]))
    def test_order_does_not_matter(self, values):
        cards = [card(f't{i}', factuality=value, ca=value, cf=value) for i, value in enumerate(values)]
        reference = aggregate(sorted(cards, key=lambda c: str(c.scores['factuality'])))
        self.assertEqual(aggregate(cards).scores, reference.scores)


class TableTest(SimpleTestCase):
    def test_percent(self):
        self.assertEqual(percent(Fraction(2, 3)), '66.67')
        self.assertEqual(percent(Fraction(1, 8)), '12.50')
        self.assertEqual(percent(Fraction(1, 800)), '0.13')
        self.assertEqual(percent(None), 'n/a')

    def test_table_rows(self):
        cards = [card('t1', factuality=Fraction(2, 5)), card('t2', factuality=Fraction(3, 5))]
        table = render_table(cards, aggregate(cards))
        lines = table.splitlines()
        self.assertTrue(lines[0].startswith('Task'))
        self.assertIn('50.00', next(line for line in lines if line.startswith('Aggregate')))
        self.assertTrue(next(line for line in lines if line.startswith('Excluded')).split()[1:] == [
            '2', '0', '2', '2', '2', '2', '2', '2'])
        json.dumps(aggregate(cards).to_dict())
