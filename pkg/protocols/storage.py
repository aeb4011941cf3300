import json
import logging
from pathlib import Path

from django.conf import settings

from conf.jsonfiles import write_json
from conf.validation import format_errors
from protocols.documents import PROTOCOL_VERSION, Grounding, KicItem, Protocol, RqItem, ValidationPlan
from protocols.exceptions import CorruptFile, ProtocolError, SchemaVersionMismatch
from protocols.serializers import ProtocolFileSerializer

logger = logging.getLogger('protocol_log')


def protocol_path(task_id, directory=None):
    return Path(directory or settings.PROTOCOL_DIR) / f'{task_id}.json'


def save_protocol(protocol, directory=None):
    path = write_json(protocol_path(protocol.task_id, directory), protocol.to_dict())
    logger.info(f"Saved protocol {protocol.task_id} to {path}")
    return path


def _grounding(entries):
    return tuple(Grounding(url=entry['url'], snippet=entry['snippet']) for entry in entries)


def protocol_from_data(data):
    return Protocol(
        task_id=data['task_id'],
        query=data['query'],
        created_at=data['created_at'],
        tools_selected=frozenset(data['tools_selected']),
        kic_items=tuple(
            KicItem(question=item['question'], grounding=_grounding(item['grounding']), weight=item['weight'])
            for item in data['kic_items']
        ),
        rq_items=tuple(
            RqItem(
                question=item['question'],
                plan=ValidationPlan(
                    extract_step=item['plan']['extract_step'],
                    verify_step=item['plan']['verify_step'],
                    verify_tools=tuple(item['plan']['verify_tools']),
                    compare_step=item['plan']['compare_step'],
                ),
                grounding=_grounding(item['grounding']),
            )
            for item in data['rq_items']
        ),
    )


def load_protocol(path):
    """Read a protocol file; a missing file raises FileNotFoundError."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except ValueError as exc:
        raise CorruptFile(path, f"not valid JSON ({exc})") from exc
    if not isinstance(data, dict) or 'version' not in data:
        raise CorruptFile(path, "not a protocol document")
    version = data['version']
    if isinstance(version, bool) or version != PROTOCOL_VERSION:
        raise SchemaVersionMismatch(path, version)
    serializer = ProtocolFileSerializer(data=data)
    if not serializer.is_valid():
        raise CorruptFile(path, format_errors(serializer.errors))
    try:
        return protocol_from_data(serializer.validated_data)
    except ProtocolError as exc:
        raise CorruptFile(path, str(exc)) from exc
