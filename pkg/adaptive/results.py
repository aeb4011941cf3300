from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from adaptive.rubric import DEDUCTION_POINTS, DEDUCTION_SCHEDULE_VERSION, DIMENSIONS, DIMENSIONS_BY_KEY, RQ_START
from adaptive.serializers import NO, YES
from workflow.exceptions import EvaluationError


@dataclass(frozen=True)
class DimensionScore:
    dimension: str
    # sub-dimension key -> integer score in [0, 100]
    sub_scores: dict
    rationale: str = ''

    def __post_init__(self):
        rubric = DIMENSIONS_BY_KEY.get(self.dimension)
        if rubric is None:
            raise EvaluationError(f"Unknown writing-quality dimension {self.dimension!r}")
        if sorted(self.sub_scores) != sorted(rubric.keys):
            raise EvaluationError(f"{self.dimension} needs sub-scores for {rubric.keys}, got {sorted(self.sub_scores)}")
        for key, value in self.sub_scores.items():
            if not 0 <= value <= 100:
                raise EvaluationError(f"{self.dimension}.{key} must lie in [0, 100], got {value}")

    @property
    def score(self):
        return DIMENSIONS_BY_KEY[self.dimension].weighted(self.sub_scores)

    def to_dict(self):
        return {
            'score': float(self.score),
            'sub_scores': dict(self.sub_scores),
            'rationale': self.rationale,
        }


@dataclass(frozen=True)
class WqScores:
    dimensions: tuple

    def __post_init__(self):
        keys = [d.dimension for d in self.dimensions]
        if keys != [d.key for d in DIMENSIONS]:
            raise EvaluationError(f"Writing quality needs one score per dimension in rubric order, got {keys}")

    def score(self, key):
        return next(d.score for d in self.dimensions if d.dimension == key)

    def values(self):
        """Dimension scores in [0, 100], as exact fractions."""
        return {d.dimension: d.score for d in self.dimensions}

    def to_dict(self):
        return {d.dimension: d.to_dict() for d in self.dimensions}


@dataclass(frozen=True)
class KicVerdicts:
    verdicts: tuple
    justifications: tuple
    diagnostics: tuple

    def __post_init__(self):
        if not len(self.verdicts) == len(self.justifications) == len(self.diagnostics):
            raise EvaluationError("Verdicts, justifications and diagnostics must align item by item")
        unknown = set(self.verdicts) - {YES, NO}
        if unknown:
            raise EvaluationError(f"Unknown checklist verdicts {sorted(unknown)}")

    def __len__(self):
        return len(self.verdicts)

    @property
    def yes_count(self):
        return self.verdicts.count(YES)

    def audit_rows(self, protocol):
        return [
            {
                'item': index,
                'question': item.question,
                'verdict': verdict,
                'justification': justification,
                'diagnostic': diagnostic,
            }
            for index, (item, verdict, justification, diagnostic)
            in enumerate(zip(protocol.kic_items, self.verdicts, self.justifications, self.diagnostics))
        ]


@dataclass(frozen=True)
class Penalty:
    category: str
    reason: str

    @property
    def points(self):
        return DEDUCTION_POINTS[self.category]

    def to_dict(self):
        return {'category': self.category, 'reason': self.reason, 'points': self.points}


def deducted_score(penalties):
    return max(0, RQ_START - sum(penalty.points for penalty in penalties))


@dataclass(frozen=True)
class RqResult:
    index: int
    question: str
    score: int
    penalties: tuple = ()
    # Observation dicts in call order
    transcript: tuple = ()
    incomplete: bool = False
    summary: str = ''
    schedule_version: int = DEDUCTION_SCHEDULE_VERSION
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.score, int) or not 0 <= self.score <= RQ_START:
            raise EvaluationError(f"Reasoning score must be an integer in [0, {RQ_START}], got {self.score!r}")
        if self.score != deducted_score(self.penalties):
            raise EvaluationError(f"Score {self.score} does not match its deductions")

    @classmethod
    def from_penalties(cls, index, question, penalties, **kwargs):
        penalties = tuple(penalties)
        return cls(index=index, question=question, score=deducted_score(penalties), penalties=penalties, **kwargs)

    @property
    def fraction(self):
        return Fraction(self.score, RQ_START)

    def audit_row(self):
        return {
            'item': self.index,
            'question': self.question,
            'score': self.score,
            'deductions': [penalty.to_dict() for penalty in self.penalties],
            'incomplete': self.incomplete,
            'summary': self.summary,
            'schedule_version': self.schedule_version,
            'transcript': list(self.transcript),
        }
