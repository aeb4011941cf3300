import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from conf.jsonfiles import dumps
from runs.cli import EXIT_FATAL
from scoring.exceptions import ScoringError
from scoring.scorecards import load_scorecard
from scoring.tables import percent

# (kind, keys the document must carry)
KINDS = (
    ('protocol', {'kic_items', 'rq_items'}),
    ('scorecard', {'scores', 'diagnostics'}),
    ('run manifest', {'run_id', 'command', 'inputs'}),
    ('sweep', {'grid', 'factuality', 'alignment'}),
    ('judge fixture', {'digest', 'request', 'response'}),
    ('task manifest', {'tasks'}),
)


def detect_kind(data):
    if isinstance(data, list):
        return 'claim pairs'
    for kind, keys in KINDS:
        if isinstance(data, dict) and keys <= set(data):
            return kind
    return 'unknown'


class Command(BaseCommand):
    help = 'Pretty-prints any stored artifact: protocol, scorecard, manifest, sweep or audit lines'

    def add_arguments(self, parser):
        parser.add_argument('path')

    def handle(self, *args, **options):
        path = Path(options['path'])
        try:
            text = path.read_text(encoding='utf-8')
            if path.suffix == '.jsonl':
                rows = [json.loads(line) for line in text.splitlines() if line.strip()]
                self.stdout.write(f"audit lines: {len(rows)} row(s)")
                for row in rows:
                    self.stdout.write(dumps(row), ending='')
                return
            data = json.loads(text)
        except (OSError, ValueError) as exc:
            raise CommandError(f"Cannot read {path}: {exc}", returncode=EXIT_FATAL) from exc

        kind = detect_kind(data)
        self.stdout.write(f"{kind}: {path}")
        if kind == 'scorecard':
            try:
                card = load_scorecard(path)
            except ScoringError as exc:
                self.stderr.write(str(exc))
            else:
                for metric, value in card.scores.items():
                    self.stdout.write(f"  {metric:<11}{percent(value):>8}")
        self.stdout.write(dumps(data), ending='')
