"""Matched-report experiments: reasoning-flaw pairs and knowledge-cutoff variants."""
import logging
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from typing import Optional

from harness.exceptions import DegenerateBaseline, HarnessError
from scoring.formulas import kic_score, rq_score

logger = logging.getLogger('harness_log')


def _same_query(protocol, *reports):
    for report in reports:
        if report.query.strip() != protocol.query.strip():
            raise HarnessError(f"Report {report.task_id} answers {report.query!r}, "
                               f"protocol {protocol.task_id} was built for {protocol.query!r}")


@dataclass
class PairComparison:
    rq_sound: Fraction
    rq_malformed: Fraction
    diagnostics: list = field(default_factory=list)

    @property
    def relative_degradation(self):
        return (self.rq_sound - self.rq_malformed) / self.rq_sound

    def to_dict(self):
        return {
            'rq_sound': float(self.rq_sound),
            'rq_malformed': float(self.rq_malformed),
            'relative_degradation': float(self.relative_degradation),
            'diagnostics': list(self.diagnostics),
        }


def compare_pairs(evaluator, sound, malformed, protocol):
    """Reasoning scores of a sound report and its flawed twin under one protocol."""
    _same_query(protocol, sound, malformed)
    sound_results, sound_notes = evaluator.run_rq(sound, protocol)
    malformed_results, malformed_notes = evaluator.run_rq(malformed, protocol)
    comparison = PairComparison(
        rq_sound=rq_score(sound_results),
        rq_malformed=rq_score(malformed_results),
        diagnostics=[f"sound {note}" for note in sound_notes] + [f"malformed {note}" for note in malformed_notes],
    )
    if comparison.rq_sound == 0:
        raise DegenerateBaseline(protocol.query)
    logger.info(f"{protocol.task_id}: reasoning {comparison.rq_sound} -> {comparison.rq_malformed}, "
                f"degradation {comparison.relative_degradation}")
    return comparison


@dataclass(frozen=True)
class ReportVariant:
    # None for the up-to-date report
    cutoff: Optional[date]
    report: object

    @property
    def label(self):
        return 'current' if self.cutoff is None else self.cutoff.isoformat()


@dataclass(frozen=True)
class TemporalPoint:
    cutoff: Optional[date]
    kic: Fraction
    yes_count: int
    items: int

    def to_dict(self):
        return {
            'cutoff': None if self.cutoff is None else self.cutoff.isoformat(),
            'kic': float(self.kic),
            'yes_count': self.yes_count,
            'items': self.items,
        }


def cutoff_order(variant):
    """Current report first, then the most recent cutoff to the oldest."""
    return (variant.cutoff is not None, -(variant.cutoff or date.min).toordinal())


def temporal_run(evaluator, variants, protocol):
    """Key-information coverage of each report variant, newest knowledge first.

    The protocol must come from a creation run without a search cutoff; the
    cutoff only ever applied to how the variants were written.
    """
    variants = sorted(variants, key=cutoff_order)
    _same_query(protocol, *(variant.report for variant in variants))
    points = []
    for variant in variants:
        verdicts = evaluator.evaluate_kic(variant.report, protocol)
        point = TemporalPoint(cutoff=variant.cutoff, kic=kic_score(verdicts), yes_count=verdicts.yes_count,
                              items=len(verdicts))
        logger.info(f"{protocol.task_id} [{variant.label}]: KIC {point.yes_count}/{point.items}")
        points.append(point)
    return points
