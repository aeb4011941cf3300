from rest_framework import serializers

from adaptive.rubric import DeductionCategory
from protocols.serializers import AgentStepSerializer

YES, NO = 'yes', 'no'


def sub_score(name):
    return serializers.IntegerField(min_value=0, max_value=100, help_text=f'{name} score, 0 to 100')


class IdeasContentScoresSerializer(serializers.Serializer):
    main_idea_clarity = sub_score('Main Idea Clarity')
    detail_relevance = sub_score('Detail Relevance')
    information_density = sub_score('Information Density')
    conceptual_synthesis = sub_score('Conceptual Synthesis')
    rationale = serializers.CharField(required=False, allow_blank=True, default='')


class OrganizationScoresSerializer(serializers.Serializer):
    heading_structure = sub_score('Heading Structure')
    bullet_grouping_logic = sub_score('Bullet Grouping Logic')
    structural_coherence = sub_score('Structural Coherence')
    rationale = serializers.CharField(required=False, allow_blank=True, default='')


class SentenceFluencyScoresSerializer(serializers.Serializer):
    rhythm_variety = sub_score('Rhythm & Variety')
    transition_smoothness = sub_score('Transition Smoothness')
    readability_flow = sub_score('Readability & Flow')
    rationale = serializers.CharField(required=False, allow_blank=True, default='')


DIMENSION_SERIALIZERS = {
    'IdeasContent': IdeasContentScoresSerializer,
    'Organization': OrganizationScoresSerializer,
    'SentenceFluency': SentenceFluencyScoresSerializer,
}


class KicVerdictSerializer(serializers.Serializer):
    verdict = serializers.ChoiceField(choices=[YES, NO])
    justification = serializers.CharField(required=False, allow_blank=True, default='',
                                          help_text='The report text the verdict rests on')


class ValidationStepSerializer(AgentStepSerializer):
    findings = serializers.CharField(required=False, allow_blank=True, default='',
                                     help_text="What the report argues and what the checks showed so far")


class DeductionSerializer(serializers.Serializer):
    category = serializers.ChoiceField(choices=DeductionCategory.values)
    reason = serializers.CharField(help_text='The flawed step, quoted or pinned to the report')


class RqVerdictSerializer(serializers.Serializer):
    deductions = DeductionSerializer(many=True, required=False, default=list)
    summary = serializers.CharField(required=False, allow_blank=True, default='')
