"""Shared plumbing of the management commands.

Exit codes: 0 success, 1 configuration or input error (nothing useful was
produced), 2 partial success (some tasks or points failed).
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from gateway.client import MODES
from runs.config import build_run_config, parse_metrics
from runs.exceptions import RunError
from runs.manifests import start_run
from runs.stores import ResultStore

logger = logging.getLogger('run_log')

EXIT_FATAL = 1
EXIT_PARTIAL = 2


class RunCommand(BaseCommand):
    name = ''

    def add_run_arguments(self, parser):
        parser.add_argument('--config', help='YAML file overriding settings for this run')
        parser.add_argument('--mode', choices=MODES, help='Backend mode: live, record or replay')
        parser.add_argument('--fixtures', help='Fixture directory for record and replay modes')
        parser.add_argument('--results', help='Results directory')
        parser.add_argument('--workers', type=int, help='Tasks evaluated concurrently')
        parser.add_argument('--seed', type=int, help='Seed for any randomized selection')

    def run_config(self, options, check=True, **extra):
        flags = {
            'mode': options.get('mode'),
            'fixture_dir': options.get('fixtures'),
            'results_dir': options.get('results'),
            'workers': options.get('workers'),
            'seed': options.get('seed'),
            **extra,
        }
        if options.get('metrics'):
            flags['metrics'] = parse_metrics(options['metrics'])
        config = build_run_config(options.get('config'), check=check, **flags)
        self.store = ResultStore(config.results_dir)
        return config

    def start(self, config, inputs):
        self.manifest = start_run(self.name, config, inputs)
        return self.manifest

    def finish(self, failures, produced):
        """Close the manifest, export metrics and pick the exit code."""
        if failures and not produced:
            outcome = 'failed'
        elif failures:
            outcome = 'partial'
        else:
            outcome = 'ok'
        self.manifest.finish(outcome, failures)
        self.store.save_manifest(self.manifest)
        self.store.save_metrics()
        for failure in failures:
            self.stderr.write(failure)
        if outcome == 'failed':
            raise CommandError(f"{self.name}: nothing produced; {failures[0]}", returncode=EXIT_FATAL)
        if outcome == 'partial':
            raise CommandError(f"{self.name}: {len(failures)} failure(s), see {self.store.manifest_path(self.manifest.run_id)}",
                               returncode=EXIT_PARTIAL)

    def fatal(self, exc):
        logger.error(f"{self.name}: {exc}")
        return CommandError(str(exc), returncode=EXIT_FATAL)

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except RunError as exc:
            raise self.fatal(exc) from exc
