"""Fixed scoring rubrics: writing-quality dimensions and reasoning deductions."""
from dataclasses import dataclass
from fractions import Fraction

from django.db import models

from workflow.exceptions import EvaluationError


@dataclass(frozen=True)
class SubDimension:
    key: str
    name: str
    weight: Fraction
    description: str


@dataclass(frozen=True)
class Dimension:
    key: str
    name: str
    subdimensions: tuple

    def __post_init__(self):
        total = sum((sub.weight for sub in self.subdimensions), Fraction(0))
        if total != 1:
            raise EvaluationError(f"{self.key} sub-dimension weights sum to {total}, not 1")

    @property
    def keys(self):
        return [sub.key for sub in self.subdimensions]

    def weighted(self, sub_scores):
        """Weighted sum of sub-scores, exact."""
        return sum((sub.weight * Fraction(sub_scores[sub.key]) for sub in self.subdimensions), Fraction(0))

    def render(self):
        return '\n'.join(f"- {sub.key} ({sub.name}, weight {float(sub.weight):g}): {sub.description}"
                         for sub in self.subdimensions)


IDEAS_CONTENT = Dimension('IdeasContent', 'Ideas and Content', (
    SubDimension('main_idea_clarity', 'Main Idea Clarity', Fraction(1, 4), (
        "This dimension assesses the clarity and specificity of the main idea expressed in the section summary. "
        "A high-quality section will present a focused and well-articulated central idea that is tightly aligned "
        "with the report question. Summaries lacking precision, or that simply list general topics without "
        "insight or framing, should be penalized. Do not give high scores if the main idea is vague, "
        "overgeneralized, or merely implied.")),
    SubDimension('detail_relevance', 'Detail Relevance', Fraction(1, 4), (
        "This dimension focuses on how well the supporting details in the summary reinforce the main idea. "
        "Bullet points should be specific, relevant, and purposefully selected. Low-quality summaries may include "
        "off-topic, overly generic, or redundant details that do not support the section's main message. Do not "
        "reward high scores based on the amount of content alone—focus on alignment and purpose.")),
    SubDimension('information_density', 'Information Density', Fraction(1, 4), (
        "This dimension measures the information richness of the section summary. High-density summaries use "
        "each bullet to convey important, non-obvious, and topic-specific content. Shallow summaries repeat known "
        "facts, use vague language, or include fluff. Length alone should not be rewarded—focus on content value "
        "per line.")),
    SubDimension('conceptual_synthesis', 'Conceptual Synthesis', Fraction(1, 4), (
        "This dimension evaluates the structural and conceptual integration in the summary. Look for signs of "
        "synthesis such as: grouping related points, identifying contrasts, cause-effect relationships, or "
        "thematic framing. Poor summaries are unordered lists with no visible logic. Do not reward correctness "
        "alone—this dimension rewards insight, not just content.")),
))

ORGANIZATION = Dimension('Organization', 'Organization', (
    SubDimension('heading_structure', 'Heading Structure', Fraction(3, 10), (
        "This dimension assesses the use and clarity of headings in the section. High-quality summaries include "
        "headings that meaningfully segment the content, reflect topic hierarchy, and help orient the reader. "
        "Avoid rewarding default, generic, or misaligned headings. Headings should reflect actual conceptual "
        "boundaries.")),
    SubDimension('bullet_grouping_logic', 'Bullet Grouping Logic', Fraction(2, 5), (
        "This dimension evaluates the internal logic of bullet groupings. High-quality summaries group related "
        "points together according to thematic, temporal, causal, or hierarchical logic. Low-quality groupings "
        "mix unrelated ideas, interrupt flow, or reflect no discernible principle.")),
    SubDimension('structural_coherence', 'Structural Coherence', Fraction(3, 10), (
        "This dimension assesses whether the section's structure contributes to a logical, easy-to-follow reading "
        "experience. A coherent structure will show consistent flow from one part to the next, maintain logical "
        "transitions between bullet blocks, and avoid jarring shifts. Low-scoring sections often feel fragmented, "
        "with unclear order, repetition, or misplaced content.")),
))

SENTENCE_FLUENCY = Dimension('SentenceFluency', 'Sentence Fluency', (
    SubDimension('rhythm_variety', 'Rhythm & Variety', Fraction(3, 10), (
        "This dimension evaluates how naturally and dynamically the sentences flow. Strong writing features "
        "variation in sentence length and structure, avoiding repetitive patterns. Rhythm refers to the pacing "
        "and cadence of the prose—whether it reads with natural emphasis or becomes monotonous. High-scoring "
        "writing feels expressive and crafted, not just correct.")),
    SubDimension('transition_smoothness', 'Transition Smoothness', Fraction(3, 10), (
        "This dimension focuses on how smoothly the sentences connect to each other. High-quality prose includes "
        "natural linking phrases, varied connectors, and logical sequencing. Low-scoring writing jumps between "
        "ideas, or has jarring, abrupt shifts between sentences. Do not reward correctness alone—this dimension "
        "targets flow between thoughts.")),
    SubDimension('readability_flow', 'Readability & Flow', Fraction(2, 5), (
        "This dimension evaluates the overall readability and flow of the paragraph. High-scoring writing reads "
        "smoothly aloud and requires little effort to follow. Low-scoring writing may include awkward phrasing, "
        "overcomplex or confusing sentence structures, or poor pacing. This metric captures the global fluency "
        "felt by readers, especially in multi-sentence passages.")),
))

DIMENSIONS = (IDEAS_CONTENT, ORGANIZATION, SENTENCE_FLUENCY)
DIMENSIONS_BY_KEY = {dimension.key: dimension for dimension in DIMENSIONS}


class DeductionCategory(models.TextChoices):
    UNSUPPORTED_CAUSAL_CLAIM = 'unsupported_causal_claim', 'Unsupported causal claim'
    CIRCULAR_ARGUMENT = 'circular_argument', 'Circular argument'
    IGNORED_COUNTER_EVIDENCE = 'ignored_counter_evidence', 'Ignored counter-evidence'
    FALSE_EQUIVALENCE = 'false_equivalence', 'False equivalence'
    CHERRY_PICKED_EVIDENCE = 'cherry_picked_evidence', 'Cherry-picked evidence'
    MINOR_GAP = 'minor_gap', 'Minor gap'


# bump the version whenever a point value changes
DEDUCTION_SCHEDULE_VERSION = 1
DEDUCTION_POINTS = {
    DeductionCategory.UNSUPPORTED_CAUSAL_CLAIM.value: 3,
    DeductionCategory.CIRCULAR_ARGUMENT.value: 3,
    DeductionCategory.IGNORED_COUNTER_EVIDENCE.value: 2,
    DeductionCategory.FALSE_EQUIVALENCE.value: 2,
    DeductionCategory.CHERRY_PICKED_EVIDENCE.value: 2,
    DeductionCategory.MINOR_GAP.value: 1,
}
RQ_START = 10


def render_schedule():
    return '\n'.join(f"- {category} ({DeductionCategory(category).label}): -{points}"
                     for category, points in DEDUCTION_POINTS.items())
