from harness.exceptions import HarnessError
from harness.pairs import BUNDLED_PAIRS, load_pairs
from harness.sweep import (
    CitationAligner, PipelineVerifier, aligned_source, oracle_verifier, parse_grid, run_sweep,
)
from runs.cli import RunCommand
from workflow.citations import CitationPipeline
from workflow.factuality import FactualityPipeline


class Command(RunCommand):
    help = 'Runs the factuality corruption sweep over adversarial claim pairs'
    name = 'sweep'

    def add_arguments(self, parser):
        parser.add_argument('--pairs', default=str(BUNDLED_PAIRS), help='Claim pair file (JSON)')
        parser.add_argument('--grid', default='', help="Corruption rates, e.g. '0,1/3,2/3,1', or a step count")
        parser.add_argument('--n', type=int, default=15, help='Batch size')
        parser.add_argument('--verifier', choices=('oracle', 'live'), default='oracle',
                            help='oracle: ground-truth labels; live: the factuality and citation pipelines')
        parser.add_argument('--shuffle', action='store_true',
                            help='Pick false variants by seeded draw instead of ascending pair id')
        parser.add_argument('--parallel', type=int, default=1, help='Grid points scored concurrently')
        self.add_run_arguments(parser)

    def checks(self, options, config):
        if options['verifier'] == 'oracle':
            return oracle_verifier, aligned_source
        gateway = config.gateway()
        evidence = config.evidence(namespace='sweep')
        factuality = FactualityPipeline(gateway, evidence, today=config.run_date, cutoff_date=config.cutoff_date,
                                        workers=config.workers)
        return PipelineVerifier(factuality), CitationAligner(CitationPipeline(gateway, evidence, workers=config.workers))

    def handle(self, *args, **options):
        config = self.run_config(options, check=options['verifier'] == 'live')
        try:
            pairs = load_pairs(options['pairs'])
            grid = parse_grid(options['grid'])
        except HarnessError as exc:
            raise self.fatal(exc) from exc
        self.start(config, [options['pairs']])
        verifier, aligner = self.checks(options, config)
        try:
            curve = run_sweep(grid, pairs, verifier=verifier, aligner=aligner, n=options['n'],
                              seed=config.seed if options['shuffle'] else None, workers=options['parallel'],
                              pair_source=options['pairs'])
        except HarnessError as exc:
            raise self.fatal(exc) from exc
        curve.run_id = self.manifest.run_id
        path = self.store.save_sweep(curve)
        for point in curve.points:
            value = 'failed' if point.failed else f"{float(point.factuality):.4f} / {float(point.alignment):.4f}"
            self.stdout.write(f"r={float(point.r):.4f}  factuality / alignment  {value}")
        failures = [f"r={point.r}: {point.error}" for point in curve.failed_points]
        produced = [point for point in curve.points if not point.failed]
        self.finish(failures, produced=produced)
        self.stdout.write(self.style.SUCCESS(f"Wrote {path} and {self.store.sweep_csv_path}"))
