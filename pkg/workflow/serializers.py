from rest_framework import serializers

from workflow.labels import DomainCategory, FactualityLabel, FaithfulnessLabel

CLAIM_CATEGORIES = ['verifiable', 'meta_talk', 'subjective', 'common_knowledge']


class ClaimDraftSerializer(serializers.Serializer):
    claim = serializers.CharField(help_text='Self-contained factual assertion')
    quote = serializers.CharField(help_text='The report text the claim comes from, copied exactly')


class KeyClaimsSerializer(serializers.Serializer):
    claims = ClaimDraftSerializer(many=True)


class CategorizedClaimSerializer(ClaimDraftSerializer):
    category = serializers.ChoiceField(choices=CLAIM_CATEGORIES)


class VerifiableClaimsSerializer(serializers.Serializer):
    claims = CategorizedClaimSerializer(many=True)


class NeutralQueriesSerializer(serializers.Serializer):
    queries = serializers.ListField(child=serializers.CharField(), min_length=2, max_length=4)


class PassageSerializer(serializers.Serializer):
    source = serializers.IntegerField(min_value=1, help_text='Number of the document the passage comes from')
    passage = serializers.CharField(help_text='Copied exactly from the document')


class PassagesSerializer(serializers.Serializer):
    passages = PassageSerializer(many=True)


class FactualityJudgmentSerializer(serializers.Serializer):
    label = serializers.ChoiceField(choices=FactualityLabel.values)
    rationale = serializers.CharField(allow_blank=True)


class FaithfulnessJudgmentSerializer(serializers.Serializer):
    label = serializers.ChoiceField(choices=FaithfulnessLabel.values)
    rationale = serializers.CharField(allow_blank=True)


class DomainRatingSerializer(serializers.Serializer):
    category = serializers.ChoiceField(choices=DomainCategory.values)
    score = serializers.IntegerField(min_value=1, max_value=10)
    rationale = serializers.CharField(allow_blank=True)
