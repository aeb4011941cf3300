import re
import tempfile
from datetime import date
from pathlib import Path

from django.test import SimpleTestCase
from django.utils import timezone
from hypothesis import given, strategies as st

from conf.jsonfiles import write_json
from evidence.exceptions import BackendUnavailable
from evidence.tools import build_evidence_tools
from evidence.types import FetchedDocument
from gateway.client import Gateway
from gateway.testing import ScriptedBackend
from reports.parser import parse_report
from workflow.authority import DomainRater, band_for
from workflow.citations import NO_VERIFIABLE_CLAIMS, CitationPipeline
from workflow.claims import Claim
from workflow.exceptions import EmptyReport, EvaluationError, PreconditionViolation
from workflow.factuality import EvidenceBundle, FactualityPipeline, contains_token, guard_label, neutralize
from workflow.labels import DomainCategory, FaithfulnessLabel, LabelCounts, best_label
from workflow.serializers import DomainRatingSerializer

TODAY = date(2026, 1, 2)
CPI_URL = 'https://stats.example.gov/cpi'
CPI_TEXT = ('The annual inflation rate was 2.4% in September 2024. '
            'Analysts said the claim that inflation reached 2% is wrong; the rate stayed above 2.3%.')
CONFIRMING = 'The annual inflation rate was 2.4% in September 2024.'
REFUTING = 'Analysts said the claim that inflation reached 2% is wrong; the rate stayed above 2.3%.'

FACT_REPORT = """# Inflation outlook

Inflation dropped to 2.4% in September 2024 according to the [BLS](https://www.bls.gov/cpi/). The Federal Reserve cut rates by 50 basis points.
"""

SPAN_REPORT = """# Energy

Solar capacity grew 24% in 2023. Wind output was flat in Europe.
Battery prices fell for the third year.

- Coal use rose in India.
- Gas prices  halved   since 2022.
"""

CI_REPORT = """# TikTok

The following section discusses the legal timeline.
Congress passed the divestiture law in April 2024 ([Congress](https://www.congress.gov/bill/118th-congress/house-bill/7521)).
Water boils at 100 °C at sea level.
The deadline was extended to January 23, 2026. Source: https://www.reuters.com/tiktok-deadline

The app has about 170 million US users.
"""

CONGRESS_URL = 'https://www.congress.gov/bill/118th-congress/house-bill/7521'
REUTERS_URL = 'https://www.reuters.com/tiktok-deadline'


def claim_of(req):
    return re.search(r'^Claim: (.*)$', req.user_prompt, re.MULTILINE).group(1)


def domain_of(req):
    return re.search(r'^Domain: (.*)$', req.user_prompt, re.MULTILINE).group(1)


def streams(supporting, opposing):
    """PassagesSerializer answers for the supporting and the opposing pass."""
    def reply(req):
        passages = supporting if 'explicitly confirm' in req.user_prompt else opposing
        return {'passages': [{'source': 1, 'passage': passage} for passage in passages]}
    return reply


def document(text, url=CPI_URL, status='ok'):
    return FetchedDocument(url=url, content_text=text, retrieved_at=timezone.now(), status=status)


class WorkflowTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        write_json(self.root / 'evidence' / 'web_search.json', {
            '*': [{'url': CPI_URL, 'title': 'Consumer prices', 'snippet': 'inflation rate by month'}],
            'dead topic': [{'url': 'https://gone.example.com/a', 'title': 'gone'}],
            'dead topic two': [],
        })
        write_json(self.root / 'evidence' / 'pages.json', {
            CPI_URL: {'text': CPI_TEXT},
            CONGRESS_URL: {'text': 'Protecting Americans from Foreign Adversary Controlled Applications Act, '
                                   'signed into law April 24, 2024.'},
            REUTERS_URL: {'status': 404, 'body': ''},
        })
        self.evidence = build_evidence_tools('replay', fixture_dir=self.root)

    def tearDown(self):
        self.tmp.cleanup()

    def gateway(self, scripts):
        self.backend = ScriptedBackend(scripts)
        return Gateway('live', backend=self.backend)

    def factuality(self, scripts, **kwargs):
        return FactualityPipeline(self.gateway(scripts), self.evidence, today=TODAY, workers=4, **kwargs)


class ExtractKeyClaimsTest(WorkflowTestCase):
    def test_fewer_claims_than_cap(self):
        report = parse_report(FACT_REPORT, 't1', 'Inflation outlook?')
        pipeline = self.factuality({'KeyClaimsSerializer': {'claims': [
            {'claim': 'Inflation dropped to 2.4% in September 2024.', 'quote': 'Inflation dropped to 2.4%'},
            {'claim': 'The Fed cut rates by 50 basis points.', 'quote': 'cut rates by 50 basis points'},
        ]}})
        claims = pipeline.extract_key_claims(report)
        self.assertEqual(len(claims), 2)
        self.assertEqual(claims[0].cited_urls, ('https://www.bls.gov/cpi/',))
        self.assertIn('Current date: January 2, 2026', self.backend.requests[0].user_prompt)

    def test_cap_keeps_emission_order(self):
        report = parse_report(FACT_REPORT, 't1', 'Inflation outlook?')
        drafts = [{'claim': f'Claim number {i}.', 'quote': 'Inflation dropped'} for i in range(35)]
        claims = self.factuality({'KeyClaimsSerializer': {'claims': drafts}}).extract_key_claims(report, n=30)
        self.assertEqual(len(claims), 30)
        self.assertEqual(claims[-1].text, 'Claim number 29.')

    def test_spans_slice_the_claimed_text(self):
        report = parse_report(SPAN_REPORT, 'energy', 'Energy trends?')
        drafts = [
            {'claim': 'Solar capacity grew 24% in 2023.', 'quote': 'Solar capacity grew 24% in 2023'},
            {'claim': 'European wind output was flat.', 'quote': 'Wind output was flat in Europe.'},
            {'claim': 'Coal use rose in India.', 'quote': 'Coal use rose in India.'},
            {'claim': 'Gas prices halved since 2022.', 'quote': 'Gas prices halved since 2022'},
            {'claim': 'Battery prices dropped again.', 'quote': 'battery cost declines'},
        ]
        expected = [
            'Solar capacity grew 24% in 2023',
            'Wind output was flat in Europe.',
            'Coal use rose in India.',
            'Gas prices  halved   since 2022',
            'Battery prices fell for the third year.',
        ]
        claims = self.factuality({'KeyClaimsSerializer': {'claims': drafts}}).extract_key_claims(report)
        for claim, text in zip(claims, expected):
            with self.subTest(claim=claim.text):
                start, end = claim.source_span
                self.assertEqual(report.text[start:end], text)

    def test_report_without_prose(self):
        report = parse_report('# Heading only\n\n## Another\n', 'empty', 'q')
        with self.assertRaises(EmptyReport):
            self.factuality({}).extract_key_claims(report)


class NeutralizeTest(WorkflowTestCase):
    def test_claim_values_are_not_searched(self):
        claim = Claim(text='Inflation dropped to 2% in 2024.', source_span=(0, 10))
        pipeline = self.factuality({'NeutralQueriesSerializer': {'queries': [
            'current inflation rate', 'inflation dropped to 2%', 'inflation 2024 statistics']}})
        queries = pipeline.neutralize_queries(claim)
        self.assertIn('current inflation rate', queries)
        self.assertLessEqual(len(queries), 3)
        for query in queries:
            self.assertFalse(contains_token(query, '2%') or contains_token(query, '2024'), query)

    def test_cutoff_is_stated(self):
        claim = Claim(text='Rates were cut.', source_span=(0, 5))
        pipeline = self.factuality({'NeutralQueriesSerializer': {'queries': ['fed rate decision', 'policy rate']}},
                                   cutoff_date=date(2024, 6, 30))
        pipeline.neutralize_queries(claim)
        self.assertIn('on or before June 30, 2024', self.backend.requests[0].user_prompt)

    def test_unverifiable_claim_rejected(self):
        claim = Claim(text='This section discusses rates.', source_span=(0, 5), verifiable=False)
        with self.assertRaises(PreconditionViolation):
            self.factuality({}).neutralize_queries(claim)

    @given(st.lists(st.integers(min_value=0, max_value=5000), min_size=1, max_size=3),
           st.lists(st.sampled_from(['rate', 'level', 'in', 'growth', 'latest']), max_size=4))
    def test_no_query_keeps_a_claim_number(self, numbers, filler):
        claim = 'Output rose to ' + ' and '.join(f'{n}%' if n % 2 else str(n) for n in numbers) + '.'
        queries = [' '.join(filler + [str(n)]) for n in numbers] + [f'{numbers[0]}% {" ".join(filler)}']
        for query in neutralize(claim, queries, limit=4):
            for token in re.findall(r'\d+(?:[.,]\d+)*%?', claim):
                self.assertFalse(contains_token(query, token), (claim, query))

    def test_rewritten_figures_are_dropped(self):
        cases = [
            ('Inflation dropped to 2% in March.', 'inflation 2 percent March', 'inflation March'),
            ('Output rose 3.1 percent in 2023.', 'output growth 3.1% latest', 'output growth latest'),
            ('Sales reached 1,200 units.', 'sales 1200 units', 'sales units'),
            ('Sales reached 1200 units.', 'sales 1,200.0 units', 'sales units'),
        ]
        for claim, query, expected in cases:
            self.assertEqual(neutralize(claim, [query], limit=3), [expected])

    def test_other_figures_are_kept(self):
        self.assertEqual(neutralize('Inflation hit 2% in 2024.', ['inflation target 3% 2025'], limit=3),
                         ['inflation target 3% 2025'])

    @given(st.integers(min_value=0, max_value=999999), st.integers(min_value=0, max_value=99),
           st.sampled_from(['{}', '{}%', '{} percent', '{} per cent']),
           st.sampled_from(['{}', '{}%', '{} percent']),
           st.booleans(), st.booleans())
    def test_no_spelling_of_a_claim_number_survives(self, whole, cents, claim_form, query_form,
                                                    claim_commas, query_commas):
        def spell(form, commas):
            number = f'{whole:,}' if commas else str(whole)
            if cents:
                number = f'{number}.{cents:02d}'
            return form.format(number)

        claim = f'Revenue reached {spell(claim_form, claim_commas)} last year.'
        query = f'revenue {spell(query_form, query_commas)} annual report'
        for kept in neutralize(claim, [query], limit=3):
            self.assertFalse(contains_token(kept, spell('{}', False)), (claim, kept))
            self.assertFalse(contains_token(claim, kept), (claim, kept))


class DualStreamTest(WorkflowTestCase):
    claim = Claim(text='Inflation reached 2% in September 2024.', source_span=(0, 10))

    def test_confirmation_only(self):
        pipeline = self.factuality({'PassagesSerializer': streams([CONFIRMING], [])})
        bundle = pipeline.dual_stream_extract(self.claim, [document(CPI_TEXT)])
        self.assertEqual(bundle.supporting, ((CPI_URL, CONFIRMING),))
        self.assertEqual(bundle.opposing, ())

    def test_planted_refutation(self):
        pipeline = self.factuality({'PassagesSerializer': streams([], [REFUTING])})
        bundle = pipeline.dual_stream_extract(self.claim, [document(CPI_TEXT)])
        self.assertIn((CPI_URL, REFUTING), bundle.opposing)
        self.assertEqual(self.backend.calls['PassagesSerializer'], 2)

    def test_only_verbatim_passages_kept(self):
        reworded = 'Inflation was 2.4 percent in September.'
        spaced = 'The annual  inflation rate\nwas 2.4% in September 2024.'
        pipeline = self.factuality({'PassagesSerializer': streams([reworded, spaced], [])})
        bundle = pipeline.dual_stream_extract(self.claim, [document(CPI_TEXT)])
        self.assertEqual(bundle.supporting, ((CPI_URL, CONFIRMING),))
        for url, passage in bundle.supporting + bundle.opposing:
            self.assertIn(passage, CPI_TEXT)

    def test_no_documents(self):
        pipeline = self.factuality({})
        bundle = pipeline.dual_stream_extract(self.claim, [document('', status='not_found')])
        self.assertTrue(bundle.empty)
        self.assertEqual(self.backend.total_calls, 0)


class JudgeFactualityTest(WorkflowTestCase):
    claim = Claim(text='Inflation reached 2.4% in September 2024.', source_span=(0, 10))

    def test_empty_bundle_needs_no_call(self):
        pipeline = self.factuality({})
        self.assertEqual(pipeline.judge_factuality(self.claim, EvidenceBundle()).label, 'Unverifiable')
        self.assertEqual(self.backend.total_calls, 0)

    def test_confirmation_supported(self):
        pipeline = self.factuality({'FactualityJudgmentSerializer': {'label': 'Supported', 'rationale': 'matches'}})
        bundle = EvidenceBundle(supporting=((CPI_URL, CONFIRMING),))
        self.assertEqual(pipeline.judge_factuality(self.claim, bundle).label, 'Supported')

    def test_refutation_contradicted(self):
        pipeline = self.factuality({'FactualityJudgmentSerializer': {'label': 'Contradicted', 'rationale': 'x'}})
        bundle = EvidenceBundle(opposing=((CPI_URL, REFUTING),))
        self.assertEqual(pipeline.judge_factuality(self.claim, bundle).label, 'Contradicted')

    def test_verdict_without_its_evidence_is_unverifiable(self):
        pipeline = self.factuality({'FactualityJudgmentSerializer': {'label': 'Supported', 'rationale': 'guess'}})
        bundle = EvidenceBundle(opposing=((CPI_URL, REFUTING),))
        self.assertEqual(pipeline.judge_factuality(self.claim, bundle).label, 'Unverifiable')

    @given(st.sampled_from(['Supported', 'PartiallySupported', 'Contradicted', 'Unverifiable']),
           st.booleans(), st.booleans(), st.booleans(), st.booleans())
    def test_removing_evidence_only_moves_toward_unverifiable(self, judged, supp, opp, keep_supp, keep_opp):
        full = EvidenceBundle(supporting=((CPI_URL, CONFIRMING),) if supp else (),
                              opposing=((CPI_URL, REFUTING),) if opp else ())
        ablated = EvidenceBundle(supporting=full.supporting if keep_supp else (),
                                 opposing=full.opposing if keep_opp else ())
        before = guard_label(judged, full) if not full.empty else 'Unverifiable'
        after = guard_label(judged, ablated) if not ablated.empty else 'Unverifiable'
        self.assertIn(after, (before, 'Unverifiable'))


class RunFactualityTest(WorkflowTestCase):
    def scripts(self, labels, claims=None):
        claims = claims or [f'Inflation claim {chr(65 + i)}.' for i in range(len(labels))]
        by_claim = dict(zip(claims, labels))

        def queries(req):
            if 'dead' in claim_of(req):
                return {'queries': ['dead topic', 'dead topic two']}
            return {'queries': ['current inflation rate', 'consumer price index']}

        return {
            'KeyClaimsSerializer': {'claims': [{'claim': c, 'quote': 'Inflation dropped'} for c in claims]},
            'NeutralQueriesSerializer': queries,
            'PassagesSerializer': streams([CONFIRMING], [REFUTING]),
            'FactualityJudgmentSerializer': lambda req: {'label': by_claim[claim_of(req)], 'rationale': ''},
        }

    def test_all_supported(self):
        report = parse_report(FACT_REPORT, 't1', 'Inflation outlook?')
        counts, records = self.factuality(self.scripts(['Supported'] * 6)).run_factuality(report)
        self.assertEqual(counts, LabelCounts(n_supp=6))
        self.assertEqual([r.index for r in records], list(range(6)))

    def test_mixed_labels(self):
        report = parse_report(FACT_REPORT, 't1', 'Inflation outlook?')
        labels = ['Supported', 'PartiallySupported', 'Supported', 'Contradicted', 'PartiallySupported', 'Supported']
        counts, records = self.factuality(self.scripts(labels)).run_factuality(report)
        self.assertEqual((counts.n_supp, counts.n_part, counts.n_neu, counts.n_con, counts.n_unver), (3, 2, 0, 1, 0))
        self.assertEqual([r.label for r in records], labels)
        self.assertEqual(counts.total, len(records))

    def test_failed_fetches_give_unverifiable(self):
        report = parse_report(FACT_REPORT, 't1', 'Inflation outlook?')
        claims = ['Inflation claim A.', 'A dead claim.']
        counts, records = self.factuality(self.scripts(['Supported', 'Supported'], claims)).run_factuality(report)
        self.assertEqual(counts, LabelCounts(n_supp=1, n_unver=1))
        self.assertEqual(records[1].evidence_urls, [])
        self.assertEqual(self.backend.calls['FactualityJudgmentSerializer'], 1)

    def test_gateway_failure_degrades_one_claim(self):
        report = parse_report(FACT_REPORT, 't1', 'Inflation outlook?')
        scripts = self.scripts(['Supported', 'Supported'])
        scripts['FactualityJudgmentSerializer'] = lambda req: (
            {'label': 'Supported', 'rationale': ''} if claim_of(req).endswith('A.') else {'label': 'Maybe'})
        with self.assertLogs('evaluation_log', level='WARNING'):
            counts, records = self.factuality(scripts).run_factuality(report)
        self.assertEqual(counts, LabelCounts(n_supp=1, n_unver=1))
        self.assertIn('SchemaViolation', records[1].diagnostic)
        self.assertIn('queries', records[0].to_dict())


class VerifiableClaimsTest(WorkflowTestCase):
    CLAIMS = {'claims': [
        {'claim': 'The following section discusses the legal timeline.',
         'quote': 'The following section discusses the legal timeline.', 'category': 'meta_talk'},
        {'claim': 'Congress passed the divestiture law in April 2024.',
         'quote': 'Congress passed the divestiture law in April 2024', 'category': 'verifiable'},
        {'claim': 'Water boils at 100 °C at sea level.',
         'quote': 'Water boils at 100 °C at sea level.', 'category': 'common_knowledge'},
        {'claim': 'The deadline was extended to January 23, 2026.',
         'quote': 'The deadline was extended to January 23, 2026.', 'category': 'verifiable'},
        {'claim': 'TikTok has about 170 million US users.',
         'quote': 'The app has about 170 million US users.', 'category': 'verifiable'},
    ]}

    def pipeline(self, faithfulness=None):
        scripts = {'VerifiableClaimsSerializer': self.CLAIMS}
        if faithfulness:
            scripts['FaithfulnessJudgmentSerializer'] = faithfulness
        return CitationPipeline(self.gateway(scripts), self.evidence, workers=2)

    def test_filtering_and_attachment(self):
        report = parse_report(CI_REPORT, 'tiktok', 'TikTok status?')
        claims = self.pipeline().extract_verifiable_claims(report)
        self.assertEqual([c.verifiable for c in claims], [False, True, False, True, True])
        self.assertEqual(claims[1].cited_urls, (CONGRESS_URL,))
        # the bare link sits in the next sentence and belongs to the deadline claim
        self.assertEqual(claims[3].cited_urls, (REUTERS_URL,))
        self.assertEqual(claims[4].cited_urls, ())

    def test_run_ci(self):
        report = parse_report(CI_REPORT, 'tiktok', 'TikTok status?')
        result = self.pipeline({'label': 'Supported', 'rationale': 'stated'}).run_ci(report)
        self.assertEqual(result.ca_inputs, {'n_cited': 2, 'n_total': 3})
        # the Reuters page is gone, so only the Congress source reaches the judge
        self.assertEqual(result.cf_counts, LabelCounts(n_supp=1, n_unver=1))
        self.assertEqual(self.backend.calls['FaithfulnessJudgmentSerializer'], 1)
        self.assertEqual(result.cf_counts.total, result.n_cited)

    def test_zero_citations(self):
        report = parse_report('# R\n\nThe app has about 170 million US users.\n', 'r', 'q')
        pipeline = CitationPipeline(self.gateway({'VerifiableClaimsSerializer': {'claims': [
            {'claim': 'TikTok has 170 million US users.', 'quote': 'The app has about 170 million US users.',
             'category': 'verifiable'}]}}), self.evidence)
        result = pipeline.run_ci(report)
        self.assertEqual(result.ca_inputs, {'n_cited': 0, 'n_total': 1})
        self.assertEqual(result.cf_counts, LabelCounts())
        self.assertEqual(result.diagnostics, [])

    def test_no_verifiable_claims(self):
        report = parse_report('# R\n\nThe following section discusses rates.\n', 'r', 'q')
        pipeline = CitationPipeline(self.gateway({'VerifiableClaimsSerializer': {'claims': [
            {'claim': 'The section discusses rates.', 'quote': 'The following section discusses rates.',
             'category': 'meta_talk'}]}}), self.evidence)
        result = pipeline.run_ci(report)
        self.assertEqual(result.n_total, 0)
        self.assertEqual(result.diagnostics, [NO_VERIFIABLE_CLAIMS])

    def test_ten_verifiable_seven_cited(self):
        lines = [f'Fact {i} holds [src](https://site{i}.example.com/p).' if i < 7 else f'Fact {i} holds.'
                 for i in range(10)]
        pages = {f'https://site{i}.example.com/p': {'text': f'Fact {i} holds.'} for i in range(7)}
        write_json(self.root / 'evidence' / 'pages.json', pages)
        evidence = build_evidence_tools('replay', fixture_dir=self.root)
        report = parse_report('# Facts\n\n' + '\n\n'.join(lines) + '\n', 'facts', 'q')
        claims = {'claims': [{'claim': f'Fact {i} holds.', 'quote': f'Fact {i} holds', 'category': 'verifiable'}
                             for i in range(10)]}
        gateway = self.gateway({'VerifiableClaimsSerializer': claims,
                                'FaithfulnessJudgmentSerializer': {'label': 'Supported', 'rationale': ''}})
        result = CitationPipeline(gateway, evidence, workers=3).run_ci(report)
        self.assertEqual((result.n_total, result.n_cited), (10, 7))
        self.assertEqual(result.cf_counts, LabelCounts(n_supp=7))


class FaithfulnessTest(WorkflowTestCase):
    claim = Claim(text='Congress passed the law in April 2024.', source_span=(0, 5), cited_urls=(CONGRESS_URL,))

    def pipeline(self, reply):
        return CitationPipeline(self.gateway({'FaithfulnessJudgmentSerializer': reply}), self.evidence)

    def test_missing_source_needs_no_call(self):
        pipeline = self.pipeline({'label': 'Supported', 'rationale': ''})
        source = document('', url=CONGRESS_URL, status='not_found')
        self.assertEqual(pipeline.judge_citation_faithfulness(self.claim, source).label, 'Unverifiable')
        self.assertEqual(self.backend.total_calls, 0)

    def test_verbatim_source_supported(self):
        pipeline = self.pipeline({'label': 'Supported', 'rationale': 'the source states it'})
        source = document('Congress passed the law in April 2024.', url=CONGRESS_URL)
        self.assertEqual(pipeline.judge_citation_faithfulness(self.claim, source).label, 'Supported')

    def test_unrelated_source_neutral(self):
        pipeline = self.pipeline({'label': 'Neutral', 'rationale': 'different topic'})
        source = document('A recipe for sourdough bread.', url=CONGRESS_URL)
        self.assertEqual(pipeline.judge_citation_faithfulness(self.claim, source).label, 'Neutral')

    def test_uncited_source_rejected(self):
        with self.assertRaises(PreconditionViolation):
            self.pipeline({}).judge_citation_faithfulness(self.claim, document('x', url='https://other.org/'))

    def test_best_label_across_sources(self):
        claim = Claim(text='The law passed in 2024.', source_span=(0, 5), cited_urls=(CPI_URL, CONGRESS_URL))
        pipeline = self.pipeline(lambda req: {
            'label': 'Supported' if 'congress.gov' in req.user_prompt else 'Neutral', 'rationale': ''})
        record = pipeline.judge_claim(claim)
        self.assertEqual(record.label, 'Supported')
        self.assertEqual(record.sources[CPI_URL]['label'], 'Neutral')

    def test_failing_source_does_not_hide_the_others(self):
        fetched = []

        class FlakyEvidence:
            def fetch(inner, url):
                fetched.append(url)
                if url == CPI_URL:
                    raise BackendUnavailable('connection reset')
                return self.evidence.fetch(url)

        claim = Claim(text='The law passed in 2024.', source_span=(0, 5), cited_urls=(CPI_URL, CONGRESS_URL))
        gateway = self.gateway({'FaithfulnessJudgmentSerializer': {'label': 'Supported', 'rationale': ''}})
        record = CitationPipeline(gateway, FlakyEvidence()).judge_claim(claim)
        self.assertEqual(fetched, [CPI_URL, CONGRESS_URL])
        self.assertEqual(record.label, 'Supported')
        self.assertEqual(record.sources[CPI_URL]['status'], 'error')
        self.assertEqual(record.sources[CONGRESS_URL]['label'], 'Supported')
        self.assertIn('BackendUnavailable', record.diagnostic)

    def test_source_is_fetched_as_cited(self):
        cited = CONGRESS_URL.replace('www.congress', 'www.Congress') + '/?utm_source=feed'
        report = parse_report(f'# R\n\nCongress passed the law in April 2024 [bill]({cited}).\n', 'r', 'q')
        fetched = []

        class RecordingEvidence:
            def fetch(inner, url):
                fetched.append(url)
                return self.evidence.fetch(url)

        gateway = self.gateway({
            'VerifiableClaimsSerializer': {'claims': [{
                'claim': 'Congress passed the law in April 2024.', 'quote': 'Congress passed the law in April 2024',
                'category': 'verifiable'}]},
            'FaithfulnessJudgmentSerializer': {'label': 'Supported', 'rationale': ''},
        })
        result = CitationPipeline(gateway, RecordingEvidence()).run_ci(report)
        self.assertEqual(fetched, [cited])
        self.assertEqual(result.cf_counts, LabelCounts(n_supp=1))


class LabelsTest(SimpleTestCase):
    def test_best_label_order(self):
        self.assertEqual(best_label(['Contradicted', 'Neutral']), 'Neutral')
        self.assertEqual(best_label(['Unverifiable', 'PartiallySupported']), 'PartiallySupported')
        self.assertEqual(best_label([]), FaithfulnessLabel.UNVERIFIABLE)

    def test_tally_and_validation(self):
        counts = LabelCounts.tally(['Supported', 'Neutral', 'Supported', 'Unverifiable'])
        self.assertEqual(counts.to_dict(), {'n_supp': 2, 'n_part': 0, 'n_neu': 1, 'n_con': 0, 'n_unver': 1})
        self.assertEqual(LabelCounts.from_dict(counts.to_dict()), counts)
        with self.assertRaises(EvaluationError):
            LabelCounts(n_supp=-1)
        with self.assertRaises(EvaluationError):
            LabelCounts.tally(['Probably'])

    def test_domain_rating_accepts_exactly_the_categories(self):
        self.assertEqual(list(DomainRatingSerializer().fields['category'].choices), DomainCategory.values)
        for category in DomainCategory.values:
            self.assertTrue(DomainRatingSerializer(data={'category': category, 'score': 5, 'rationale': ''}).is_valid())
        self.assertFalse(DomainRatingSerializer(data={'category': 'Blog', 'score': 5, 'rationale': ''}).is_valid())


DA_REPORT = """# Sources

Nature reported it ([a](https://www.nature.com/articles/a)) and again ([b](https://nature.com/articles/b)).
See also https://example.com/page for details.
"""

DOMAIN_SCORES = {
    'nature.com': {'category': 'Academic', 'score': 9, 'rationale': ''},
    'example.com': {'category': 'Commercial', 'score': 5, 'rationale': ''},
    'cdc.gov': {'category': 'Government', 'score': 10, 'rationale': ''},
    'twitter.com': {'category': 'Other', 'score': 2, 'rationale': ''},
}


class DomainAuthorityTest(SimpleTestCase):
    def rater(self, scripts=None):
        self.backend = ScriptedBackend(scripts or {
            'DomainRatingSerializer': lambda req: DOMAIN_SCORES[domain_of(req)]})
        return DomainRater(Gateway('live', backend=self.backend), workers=2)

    def test_one_rating_per_root_domain(self):
        ratings = self.rater().run_da(parse_report(DA_REPORT, 'da', 'q'))
        self.assertEqual([str(r.domain) for r in ratings], ['nature.com', 'example.com'])
        self.assertEqual(self.backend.total_calls, 2)

    def test_government_and_social_bands(self):
        report = parse_report('# S\n\nA <https://www.cdc.gov/flu> and <https://twitter.com/someone/status/1>.\n',
                              'da', 'q')
        government, social = self.rater().run_da(report)
        self.assertEqual((government.category, government.band), ('Government', 'Definitive'))
        self.assertGreaterEqual(government.score, 9)
        self.assertLessEqual(social.score, 3)
        self.assertEqual(social.band, 'Low')

    def test_host_without_registrable_domain(self):
        report = parse_report('# S\n\nLocal copy at http://localhost:8000/x and http://10.0.0.1/y.\n', 'da', 'q')
        ratings = self.rater().run_da(report)
        self.assertEqual([(str(r.domain), r.score, r.category) for r in ratings],
                         [('localhost', 1, 'Other'), ('10.0.0.1', 1, 'Other')])
        self.assertEqual(self.backend.total_calls, 0)

    def test_judge_failure_scores_one(self):
        rater = self.rater({'DomainRatingSerializer': {'category': 'News', 'score': 11, 'rationale': ''}})
        with self.assertLogs('evaluation_log', level='WARNING'):
            ratings = rater.run_da(parse_report(DA_REPORT, 'da', 'q'))
        self.assertTrue(all(r.score == 1 and r.diagnostic for r in ratings))

    def test_bands(self):
        self.assertEqual([band_for(s) for s in (10, 9, 8, 7, 6, 4, 3, 1)],
                         ['Definitive', 'Definitive', 'High', 'High', 'Moderate', 'Moderate', 'Low', 'Low'])
