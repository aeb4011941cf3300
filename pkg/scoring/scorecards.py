import logging
from dataclasses import dataclass, field
from fractions import Fraction

from rest_framework import serializers

from conf.jsonfiles import read_json
from conf.validation import format_errors
from scoring.exceptions import EmptyChecklist, EmptyResults, EmptyTaskSet, InvalidScorecard, ScoringError
from scoring.formulas import (
    as_fraction, cf_score, citation_integrity, claim_attribution, da_score, factuality_score, kic_score, rq_score,
    wq_final,
)

logger = logging.getLogger('evaluation_log')

SCORECARD_VERSION = 1
METRICS = ('wq', 'factuality', 'ci', 'ca', 'cf', 'da', 'kic', 'rq')
# metrics a run can select; ca and cf come with ci
SELECTABLE_METRICS = ('wq', 'factuality', 'ci', 'da', 'kic', 'rq')
STATIC_METRICS = ('wq', 'factuality', 'ci', 'da')
ADAPTIVE_METRICS = ('kic', 'rq')
AGGREGATE_ID = 'aggregate'


def _unit(value):
    return None if value is None else float(value)


@dataclass
class Scorecard:
    task_id: str
    # metric -> Fraction in [0, 1], or None when undefined or not run
    scores: dict
    unverifiable_fraction: Fraction = None
    # metric -> list of messages
    notes: dict = field(default_factory=dict)
    excluded_counts: dict = field(default_factory=dict)
    task_count: int = 1
    run_id: str = ''

    def __post_init__(self):
        if set(self.scores) != set(METRICS):
            raise ScoringError(f"Scorecard {self.task_id} needs exactly the metrics {list(METRICS)}")
        for metric, value in self.scores.items():
            if value is not None and not 0 <= value <= 1:
                raise ScoringError(f"{self.task_id}: {metric} score {value} lies outside [0, 1]")

    @property
    def undefined_metrics(self):
        return [metric for metric in METRICS if self.scores[metric] is None]

    def note(self, metric, message):
        self.notes.setdefault(metric, []).append(message)

    def to_dict(self):
        diagnostics = {
            'undefined_metrics': self.undefined_metrics,
            'unverifiable_fraction': _unit(self.unverifiable_fraction),
            'excluded_counts': dict(self.excluded_counts),
            'notes': {metric: list(messages) for metric, messages in self.notes.items()},
        }
        return {
            'version': SCORECARD_VERSION,
            'run_id': self.run_id,
            'task_id': self.task_id,
            'task_count': self.task_count,
            'scores': {metric: _unit(self.scores[metric]) for metric in METRICS},
            'diagnostics': diagnostics,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            task_id=data['task_id'],
            scores={metric: as_fraction(data['scores'][metric]) for metric in METRICS},
            unverifiable_fraction=as_fraction(data['diagnostics']['unverifiable_fraction']),
            notes={metric: list(messages) for metric, messages in data['diagnostics']['notes'].items()},
            excluded_counts=dict(data['diagnostics']['excluded_counts']),
            task_count=data['task_count'],
            run_id=data['run_id'],
        )


class DiagnosticsFileSerializer(serializers.Serializer):
    undefined_metrics = serializers.ListField(child=serializers.ChoiceField(choices=METRICS))
    unverifiable_fraction = serializers.FloatField(allow_null=True, min_value=0, max_value=1)
    excluded_counts = serializers.DictField(child=serializers.IntegerField(min_value=0), required=False, default=dict)
    notes = serializers.DictField(child=serializers.ListField(child=serializers.CharField()), required=False,
                                  default=dict)


class ScorecardFileSerializer(serializers.Serializer):
    version = serializers.IntegerField()
    run_id = serializers.CharField(allow_blank=True, required=False, default='')
    task_id = serializers.CharField()
    task_count = serializers.IntegerField(min_value=1, required=False, default=1)
    scores = serializers.DictField(child=serializers.FloatField(allow_null=True, min_value=0, max_value=1))
    diagnostics = DiagnosticsFileSerializer()

    def validate_version(self, value):
        if value != SCORECARD_VERSION:
            raise serializers.ValidationError(f"Unsupported scorecard version {value}.")
        return value

    def validate_scores(self, value):
        if set(value) != set(METRICS):
            raise serializers.ValidationError(f"Expected exactly the metrics {', '.join(METRICS)}.")
        return value


def load_scorecard(path):
    try:
        data = read_json(path)
    except ValueError as exc:
        raise InvalidScorecard(path, f"not valid JSON ({exc})")
    serializer = ScorecardFileSerializer(data=data)
    if not serializer.is_valid():
        raise InvalidScorecard(path, format_errors(serializer.errors))
    return Scorecard.from_dict(serializer.validated_data)


def build_scorecard(task_id, wq=None, factuality=None, citations=None, ratings=None, kic=None, rq=None,
                    notes=None, run_id=''):
    """Scorecard from the raw outputs of whichever metrics ran; a metric given as None stays undefined."""
    card = Scorecard(task_id=task_id, scores=dict.fromkeys(METRICS), run_id=run_id)
    for metric, messages in (notes or {}).items():
        for message in messages:
            card.note(metric, message)

    if wq is not None:
        card.scores['wq'] = wq_final(wq)
    if factuality is not None:
        card.scores['factuality'] = factuality_score(factuality)
        if factuality.total:
            card.unverifiable_fraction = Fraction(factuality.n_unver, factuality.total)
    if citations is not None:
        ca = claim_attribution(citations.n_cited, citations.n_total)
        cf = cf_score(citations.cf_counts)
        card.scores.update(ca=ca, cf=cf, ci=citation_integrity(ca, cf))
        for message in citations.diagnostics:
            card.note('ci', message)
        if card.scores['ci'] is None and ca:
            card.note('ci', 'no cited source could be judged, so faithfulness is undefined')
    if ratings is not None:
        card.scores['da'] = da_score(ratings)
    if kic is not None:
        try:
            card.scores['kic'] = kic_score(kic)
        except EmptyChecklist as exc:
            card.note('kic', str(exc))
    if rq is not None:
        try:
            card.scores['rq'] = rq_score(rq)
        except EmptyResults as exc:
            card.note('rq', str(exc))
    return card


def _mean(values):
    return sum(values, Fraction(0)) / len(values) if values else None


def aggregate(scorecards):
    """Per-metric mean over the tasks where the metric is defined.

    Dataset CI is the harmonic mean of the dataset CA and CF means, not the
    mean of per-task CI values.
    """
    scorecards = list(scorecards)
    if not scorecards:
        raise EmptyTaskSet()
    scores, excluded = {}, {}
    for metric in METRICS:
        defined = [as_fraction(card.scores[metric]) for card in scorecards if card.scores[metric] is not None]
        scores[metric] = _mean(defined)
        excluded[metric] = len(scorecards) - len(defined)
    scores['ci'] = citation_integrity(scores['ca'], scores['cf'])
    unverifiable = [as_fraction(card.unverifiable_fraction) for card in scorecards
                    if card.unverifiable_fraction is not None]
    result = Scorecard(task_id=AGGREGATE_ID, scores=scores, unverifiable_fraction=_mean(unverifiable),
                       excluded_counts=excluded, task_count=len(scorecards))
    logger.info(f"Aggregated {len(scorecards)} scorecard(s); excluded {excluded}")
    return result
