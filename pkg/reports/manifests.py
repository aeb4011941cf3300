import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional

from rest_framework import serializers

from conf.validation import format_errors
from reports.exceptions import ManifestError
from reports.parser import parse_report

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class ManifestEntry:
    task_id: str
    query: str
    report_path: Path
    generated_at: Optional[date] = None


class ManifestTaskSerializer(serializers.Serializer):
    task_id = serializers.RegexField(r'^[A-Za-z0-9_.-]+$', max_length=128)
    query = serializers.CharField()
    report = serializers.CharField()
    generated_at = serializers.DateField(required=False, allow_null=True)


class ManifestSerializer(serializers.Serializer):
    version = serializers.IntegerField()
    tasks = ManifestTaskSerializer(many=True, allow_empty=False)

    def validate_version(self, value):
        if value != MANIFEST_VERSION:
            raise serializers.ValidationError(f"unsupported manifest version {value}")
        return value

    def validate_tasks(self, value):
        seen = set()
        for task in value:
            if task['task_id'] in seen:
                raise serializers.ValidationError(f"duplicate task_id {task['task_id']!r}")
            seen.add(task['task_id'])
        return value


def load_manifest(path):
    """Read a batch manifest; report paths are resolved relative to the manifest file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, ValueError) as exc:
        raise ManifestError(f"Cannot read manifest {path}: {exc}") from exc
    serializer = ManifestSerializer(data=data)
    if not serializer.is_valid():
        raise ManifestError(f"Invalid manifest {path}: {format_errors(serializer.errors)}")
    return [
        ManifestEntry(
            task_id=task['task_id'],
            query=task['query'],
            report_path=(path.parent / task['report']).resolve(),
            generated_at=task.get('generated_at'),
        )
        for task in serializer.validated_data['tasks']
    ]


def read_report(entry):
    try:
        markdown = entry.report_path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ManifestError(f"Cannot read report for task {entry.task_id}: {exc}") from exc
    return parse_report(markdown, entry.task_id, entry.query, generated_at=entry.generated_at)
