from __future__ import annotations

from dataclasses import dataclass

from django.db import models

from workflow.exceptions import EvaluationError


class FactualityLabel(models.TextChoices):
    SUPPORTED = 'Supported', 'Supported'
    PARTIALLY_SUPPORTED = 'PartiallySupported', 'Partially supported'
    CONTRADICTED = 'Contradicted', 'Contradicted'
    UNVERIFIABLE = 'Unverifiable', 'Unverifiable'


class FaithfulnessLabel(models.TextChoices):
    SUPPORTED = 'Supported', 'Supported'
    PARTIALLY_SUPPORTED = 'PartiallySupported', 'Partially supported'
    NEUTRAL = 'Neutral', 'Neutral'
    CONTRADICTED = 'Contradicted', 'Contradicted'
    UNVERIFIABLE = 'Unverifiable', 'Unverifiable'


class DomainCategory(models.TextChoices):
    GOVERNMENT = 'Government'
    ACADEMIC = 'Academic'
    NEWS = 'News'
    COMMERCIAL = 'Commercial'
    OTHER = 'Other'


# best first
FAITHFULNESS_ORDER = (
    FaithfulnessLabel.SUPPORTED.value,
    FaithfulnessLabel.PARTIALLY_SUPPORTED.value,
    FaithfulnessLabel.NEUTRAL.value,
    FaithfulnessLabel.CONTRADICTED.value,
    FaithfulnessLabel.UNVERIFIABLE.value,
)


def best_label(labels):
    labels = list(labels)
    if not labels:
        return FaithfulnessLabel.UNVERIFIABLE.value
    return min(labels, key=FAITHFULNESS_ORDER.index)


@dataclass(frozen=True)
class Judgment:
    label: str
    rationale: str = ''


@dataclass(frozen=True)
class LabelCounts:
    n_supp: int = 0
    n_part: int = 0
    n_neu: int = 0
    n_con: int = 0
    n_unver: int = 0

    FIELDS = {
        'Supported': 'n_supp',
        'PartiallySupported': 'n_part',
        'Neutral': 'n_neu',
        'Contradicted': 'n_con',
        'Unverifiable': 'n_unver',
    }

    def __post_init__(self):
        for name in self.FIELDS.values():
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise EvaluationError(f"{name} must be a non-negative integer, got {value!r}")

    @classmethod
    def tally(cls, labels):
        """Fold labels in the order given."""
        counts = dict.fromkeys(cls.FIELDS.values(), 0)
        for label in labels:
            if label not in cls.FIELDS:
                raise EvaluationError(f"Unknown label {label!r}")
            counts[cls.FIELDS[label]] += 1
        return cls(**counts)

    @property
    def total(self):
        return self.n_supp + self.n_part + self.n_neu + self.n_con + self.n_unver

    def to_dict(self):
        return {name: getattr(self, name) for name in self.FIELDS.values()}

    @classmethod
    def from_dict(cls, data):
        return cls(**{name: data.get(name, 0) for name in cls.FIELDS.values()})
