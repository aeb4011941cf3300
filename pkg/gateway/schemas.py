"""Judge output schemas are DRF serializers.

describe_schema() turns a serializer class into the structural description that
is shown to the judge and hashed into fixture keys; validate_output() checks a
raw completion against the same serializer.
"""
import json
import re

from rest_framework import serializers

from conf.validation import format_errors

FENCED_JSON_RE = re.compile(r'```(?:json)?\s*(.*?)```', re.DOTALL)


def _describe_field(field):
    if isinstance(field, serializers.ListSerializer):
        schema = {'type': 'array', 'items': _describe_field(field.child)}
        if not getattr(field, 'allow_empty', True):
            schema['minItems'] = 1
        if getattr(field, 'max_length', None):
            schema['maxItems'] = field.max_length
    elif isinstance(field, serializers.Serializer):
        schema = _describe_fields(field.fields)
    elif isinstance(field, serializers.ListField):
        schema = {'type': 'array', 'items': _describe_field(field.child)}
        if field.min_length:
            schema['minItems'] = field.min_length
        if field.max_length:
            schema['maxItems'] = field.max_length
    elif isinstance(field, serializers.ChoiceField):
        schema = {'type': 'string', 'enum': [str(choice) for choice in field.choices]}
    elif isinstance(field, serializers.BooleanField):
        schema = {'type': 'boolean'}
    elif isinstance(field, serializers.IntegerField):
        schema = {'type': 'integer'}
        if field.min_value is not None:
            schema['minimum'] = field.min_value
        if field.max_value is not None:
            schema['maximum'] = field.max_value
    elif isinstance(field, (serializers.FloatField, serializers.DecimalField)):
        schema = {'type': 'number'}
        if field.min_value is not None:
            schema['minimum'] = float(field.min_value)
        if field.max_value is not None:
            schema['maximum'] = float(field.max_value)
    elif isinstance(field, serializers.URLField):
        schema = {'type': 'string', 'format': 'uri'}
    elif isinstance(field, serializers.DateField):
        schema = {'type': 'string', 'format': 'date'}
    else:
        schema = {'type': 'string'}
    if field.help_text:
        schema['description'] = str(field.help_text)
    if getattr(field, 'allow_null', False):
        schema['nullable'] = True
    return schema


def _describe_fields(fields):
    return {
        'type': 'object',
        'properties': {name: _describe_field(field) for name, field in fields.items()},
        'required': [name for name, field in fields.items() if field.required],
    }


def describe_schema(serializer_class):
    schema = _describe_fields(serializer_class().fields)
    schema['title'] = serializer_class.__name__
    return schema


def schema_name(serializer_class):
    return serializer_class.__name__


def extract_json(raw_text):
    text = (raw_text or '').strip()
    fenced = FENCED_JSON_RE.search(text)
    if fenced:
        text = fenced.group(1).strip()
    try:
        return json.loads(text)
    except ValueError:
        start, end = text.find('{'), text.rfind('}')
        if start == -1 or end <= start:
            raise
        return json.loads(text[start:end + 1])


def validate_output(serializer_class, raw_text):
    """Return (payload, None) for a valid completion or (None, error message)."""
    try:
        data = extract_json(raw_text)
    except ValueError as exc:
        return None, f"response is not valid JSON: {exc}"
    if not isinstance(data, dict):
        return None, f"expected a JSON object, got {type(data).__name__}"
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        return None, format_errors(serializer.errors)
    # plain JSON types only, so payloads compare equal after a replay
    return json.loads(json.dumps(serializer.data)), None
