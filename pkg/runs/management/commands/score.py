from pathlib import Path

from runs.cli import RunCommand
from scoring.exceptions import ScoringError
from scoring.scorecards import aggregate
from scoring.tables import render_table


class Command(RunCommand):
    help = 'Aggregates per-task scorecards and prints the result table'
    name = 'score'

    def add_arguments(self, parser):
        parser.add_argument('scorecards', nargs='?', help='Scorecard directory (default <results>/scorecards)')
        self.add_run_arguments(parser)

    def handle(self, *args, **options):
        config = self.run_config(options, check=False)
        directory = Path(options.get('scorecards') or self.store.scorecard_dir)
        self.start(config, sorted(directory.glob('*.json')))
        try:
            cards = self.store.load_scorecards(directory)
            result = aggregate(cards)
        except ScoringError as exc:
            raise self.fatal(exc) from exc
        result.run_id = self.manifest.run_id
        path = self.store.save_aggregate(result)
        self.stdout.write(render_table(cards, result))
        self.finish([], produced=[path])
        self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
