"""Closed-form metric scores.

Every function is pure and exact: scores are Fractions in [0, 1], and None
stands for an undefined score (an empty denominator), which aggregation
leaves out instead of counting as zero.
"""
from fractions import Fraction

from scoring.exceptions import EmptyChecklist, EmptyResults
from workflow.exceptions import PreconditionViolation

HALF = Fraction(1, 2)


def as_fraction(value):
    """Exact Fraction for int, float or Fraction input; None passes through."""
    if value is None or isinstance(value, Fraction):
        return value
    return Fraction(value)


def factuality_score(counts):
    """(supported + half of partially supported) over every claim with a verdict."""
    if counts.n_neu:
        raise PreconditionViolation(f"Factuality labels have no Neutral, got {counts.n_neu}")
    denominator = counts.n_supp + counts.n_part + counts.n_con
    if not denominator:
        return None
    return (counts.n_supp + HALF * counts.n_part) / denominator


def cf_score(counts):
    """Neutral sources count against faithfulness; Unverifiable ones are left out."""
    denominator = counts.n_supp + counts.n_part + counts.n_neu + counts.n_con
    if not denominator:
        return None
    return (counts.n_supp + HALF * counts.n_part) / denominator


def claim_attribution(n_cited, n_total):
    if n_cited > n_total:
        raise PreconditionViolation(f"{n_cited} cited claims out of only {n_total}")
    if not n_total:
        return None
    return Fraction(n_cited, n_total)


def citation_integrity(ca, cf):
    """Harmonic mean of attribution and faithfulness.

    A report that cites nothing scores 0 even though its faithfulness is
    undefined.
    """
    ca, cf = as_fraction(ca), as_fraction(cf)
    if ca is None:
        return None
    if ca == 0:
        return Fraction(0)
    if cf is None:
        return None
    if ca + cf == 0:
        return Fraction(0)
    return 2 * ca * cf / (ca + cf)


def da_score(ratings):
    """Mean of the domain ratings scaled from 1..10 to [0, 1]."""
    ratings = list(ratings)
    if not ratings:
        return None
    return Fraction(sum(rating.score for rating in ratings), 10 * len(ratings))


def kic_score(verdicts):
    if not len(verdicts):
        raise EmptyChecklist()
    return Fraction(verdicts.yes_count, len(verdicts))


def rq_score(results):
    results = list(results)
    if not results:
        raise EmptyResults()
    return Fraction(sum(result.score for result in results), 10 * len(results))


def wq_final(scores):
    """Unweighted mean of the three dimension scores, from [0, 100] to [0, 1]."""
    values = list(scores.values().values())
    return sum(values, Fraction(0)) / len(values) / 100
