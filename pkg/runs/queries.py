from dataclasses import dataclass
from pathlib import Path

from rest_framework import serializers

from conf.jsonfiles import read_json
from conf.validation import format_errors
from reports.manifests import MANIFEST_VERSION, ManifestTaskSerializer
from runs.exceptions import ConfigError


class QueryTaskSerializer(ManifestTaskSerializer):
    report = serializers.CharField(required=False)


class QueryFileSerializer(serializers.Serializer):
    version = serializers.IntegerField()
    tasks = QueryTaskSerializer(many=True, allow_empty=False)

    def validate_version(self, value):
        if value != MANIFEST_VERSION:
            raise serializers.ValidationError(f"unsupported query file version {value}")
        return value

    def validate_tasks(self, value):
        ids = [task['task_id'] for task in value]
        duplicates = sorted({task_id for task_id in ids if ids.count(task_id) > 1})
        if duplicates:
            raise serializers.ValidationError(f"duplicate task_id {', '.join(duplicates)}")
        return value


@dataclass(frozen=True)
class QueryTask:
    task_id: str
    query: str


def load_queries(path):
    """Tasks of a query file; report manifests qualify too, their report paths are ignored."""
    path = Path(path)
    try:
        data = read_json(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"Cannot read query file {path}: {exc}") from exc
    serializer = QueryFileSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(f"Invalid query file {path}: {format_errors(serializer.errors)}")
    return [QueryTask(task['task_id'], task['query']) for task in serializer.validated_data['tasks']]
