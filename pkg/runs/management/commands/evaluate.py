from reports.exceptions import ManifestError, ReportError
from reports.manifests import load_manifest, read_report
from runs.cli import RunCommand
from runs.evaluation import TaskEvaluator, find_protocols


class Command(RunCommand):
    help = 'Scores every report of a manifest and writes one scorecard per task'
    name = 'evaluate'

    def add_arguments(self, parser):
        parser.add_argument('manifest', help='Report manifest (JSON)')
        parser.add_argument('--metrics', help='Comma-separated subset of wq,factuality,ci,da,kic,rq')
        parser.add_argument('--protocols', help='Directory holding <task_id>.json protocols')
        parser.add_argument('--cutoff-date', dest='cutoff_date', help='Ignore evidence published after this date')
        self.add_run_arguments(parser)

    def handle(self, *args, **options):
        config = self.run_config(options, protocol_dir=options.get('protocols'),
                                 cutoff_date=options.get('cutoff_date'))
        try:
            entries = load_manifest(options['manifest'])
        except ManifestError as exc:
            raise self.fatal(exc) from exc
        protocol_files = find_protocols(entries, config.metrics, config.protocol_dir)
        self.start(config, [options['manifest']] + [entry.report_path for entry in entries]
                   + list(protocol_files.values()))

        failures, items = [], []
        for entry in entries:
            try:
                items.append((entry, read_report(entry)))
            except ReportError as exc:
                failures.append(f"{entry.task_id}: {exc.__class__.__name__}: {exc}")

        evaluator = TaskEvaluator(config.gateway(), config.evidence(namespace=self.manifest.run_id), config.metrics,
                                  today=config.run_date, cutoff_date=config.cutoff_date, workers=config.workers)
        outcomes = evaluator.evaluate_all(items, protocol_files, run_id=self.manifest.run_id, workers=config.workers)
        written = []
        for outcome in outcomes:
            failures += [f"{outcome.task_id}: {failure}" for failure in outcome.failures]
            if outcome.scorecard is None:
                continue
            for metric, rows in outcome.audit.items():
                self.store.save_audit(outcome.task_id, metric, self.manifest.run_id, rows)
            written.append(self.store.save_scorecard(outcome.scorecard))
            self.stdout.write(f"Wrote {self.store.scorecard_path(outcome.task_id)}")
        self.finish(failures, produced=written)
        self.stdout.write(self.style.SUCCESS(f"{len(written)} scorecard(s) written, run {self.manifest.run_id}"))
