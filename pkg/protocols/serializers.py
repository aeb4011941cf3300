import re

from rest_framework import serializers

from evidence.types import Tool
from reports.links import is_absolute_http_url

FINISH = 'finish'
AGENT_ACTIONS = [*Tool.values, FINISH]
MAX_PARALLEL_CALLS = 3

YES_NO_RE = re.compile(
    r'^(does|do|did|is|are|was|were|has|have|had|will|would|can|could|should|must)\b', re.IGNORECASE)


class ToolSelectionSerializer(serializers.Serializer):
    tools = serializers.ListField(
        child=serializers.ChoiceField(choices=Tool.values),
        help_text='Tools worth using for this query; web_search and url_fetch are always included')
    rationale = serializers.CharField(required=False, allow_blank=True)


class KicDraftSerializer(serializers.Serializer):
    question = serializers.CharField(help_text='Yes/no question a report can be checked against')
    grounding_urls = serializers.ListField(
        child=serializers.CharField(), min_length=1,
        help_text='URLs from the observations above that support this item')

    def validate_question(self, value):
        if not value.endswith('?') or not YES_NO_RE.match(value):
            raise serializers.ValidationError(
                "Must be a yes/no question that starts with an auxiliary verb and ends with '?'.")
        return value


class PlanSerializer(serializers.Serializer):
    extract_step = serializers.CharField(help_text='Which reasoning chain to pull out of the report')
    verify_step = serializers.CharField(help_text='External checks to run against that chain')
    verify_tools = serializers.ListField(child=serializers.ChoiceField(choices=Tool.values), min_length=1)
    compare_step = serializers.CharField(help_text='Criteria for comparing the report against the checks')


class RqDraftSerializer(PlanSerializer):
    question = serializers.CharField(help_text='Open-ended analytical question')
    grounding_urls = serializers.ListField(child=serializers.CharField(), min_length=1)


class AgentStepSerializer(serializers.Serializer):
    thought = serializers.CharField(required=False, allow_blank=True)
    action = serializers.ChoiceField(choices=AGENT_ACTIONS)
    arguments = serializers.ListField(
        child=serializers.CharField(), required=False, default=list, max_length=MAX_PARALLEL_CALLS,
        help_text='Search queries, or URLs for url_fetch; calls run in parallel')

    def validate(self, attrs):
        if attrs['action'] != FINISH and not attrs.get('arguments'):
            raise serializers.ValidationError({'arguments': ['A tool action needs at least one argument.']})
        return attrs


class KicStepSerializer(AgentStepSerializer):
    items = KicDraftSerializer(many=True, required=False, default=list)


class RqStepSerializer(AgentStepSerializer):
    items = RqDraftSerializer(many=True, required=False, default=list)


class GroundingFileSerializer(serializers.Serializer):
    url = serializers.CharField()
    snippet = serializers.CharField(allow_blank=True, trim_whitespace=False)

    def validate_url(self, value):
        if not is_absolute_http_url(value):
            raise serializers.ValidationError("Enter an absolute http(s) URL.")
        return value


class KicItemFileSerializer(serializers.Serializer):
    question = serializers.CharField(trim_whitespace=False)
    grounding = GroundingFileSerializer(many=True, allow_empty=False)
    weight = serializers.FloatField(min_value=0, default=1.0)


class PlanFileSerializer(serializers.Serializer):
    extract_step = serializers.CharField(trim_whitespace=False)
    verify_step = serializers.CharField(trim_whitespace=False)
    verify_tools = serializers.ListField(child=serializers.ChoiceField(choices=Tool.values), min_length=1)
    compare_step = serializers.CharField(trim_whitespace=False)


class RqItemFileSerializer(serializers.Serializer):
    question = serializers.CharField(trim_whitespace=False)
    plan = PlanFileSerializer()
    grounding = GroundingFileSerializer(many=True, allow_empty=False)


class ProtocolFileSerializer(serializers.Serializer):
    version = serializers.IntegerField()
    task_id = serializers.CharField()
    query = serializers.CharField(trim_whitespace=False)
    created_at = serializers.DateTimeField()
    tools_selected = serializers.ListField(child=serializers.ChoiceField(choices=Tool.values), allow_empty=False)
    kic_items = KicItemFileSerializer(many=True, allow_empty=False)
    rq_items = RqItemFileSerializer(many=True, allow_empty=False)
