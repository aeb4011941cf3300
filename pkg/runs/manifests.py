import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path

import django
from django.conf import settings
from django.utils import timezone

from conf.jsonfiles import digest, file_digest
from protocols.documents import PROTOCOL_VERSION
from scoring.scorecards import SCORECARD_VERSION

logger = logging.getLogger('run_log')

RUN_MANIFEST_VERSION = 1
ENGINE_VERSION = '1.0'


def input_digests(paths):
    """sha256 per existing input file, keyed by path."""
    return {str(path): file_digest(path) for path in sorted(set(map(Path, paths))) if Path(path).is_file()}


def versions():
    return {
        'engine': ENGINE_VERSION,
        'django': django.get_version(),
        'python': platform.python_version(),
        'prompt_version': settings.PROMPT_VERSION,
        'model': settings.LLM_MODEL,
        'protocol_schema': PROTOCOL_VERSION,
        'scorecard_schema': SCORECARD_VERSION,
    }


def make_run_id(command, config, inputs):
    """Content address of the run: identical command, config and inputs give the same id."""
    stamp = dict(versions())
    stamp.pop('python')
    return digest({'command': command, 'config': config, 'inputs': inputs, 'versions': stamp})[:16]


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: dict
    run_id: str = ''
    versions: dict = field(default_factory=versions)
    started_at: str = ''
    finished_at: str = ''
    outcome: str = ''
    failures: list = field(default_factory=list)

    def __post_init__(self):
        self.run_id = self.run_id or make_run_id(self.command, self.config, self.inputs)
        self.started_at = self.started_at or timezone.now().isoformat()

    def finish(self, outcome, failures=()):
        self.outcome = outcome
        self.failures = list(failures)
        self.finished_at = timezone.now().isoformat()
        logger.info(f"Run {self.run_id} ({self.command}) finished: {outcome}")
        return self

    def to_dict(self):
        return {
            'version': RUN_MANIFEST_VERSION,
            'run_id': self.run_id,
            'command': self.command,
            'config': self.config,
            'inputs': self.inputs,
            'versions': self.versions,
            'started_at': self.started_at,
            'finished_at': self.finished_at,
            'outcome': self.outcome,
            'failures': self.failures,
        }


def start_run(command, config, input_paths):
    manifest = RunManifest(command=command, config=config.snapshot(), inputs=input_digests(input_paths))
    logger.info(f"Run {manifest.run_id} ({command}) started in {config.mode} mode")
    return manifest
