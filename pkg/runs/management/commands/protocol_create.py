from concurrent.futures import ThreadPoolExecutor

from evidence.exceptions import EvidenceError
from gateway.exceptions import GatewayError
from protocols.creation import ProtocolBuilder
from protocols.exceptions import ProtocolError
from protocols.storage import save_protocol
from runs.cli import RunCommand
from runs.queries import load_queries


class Command(RunCommand):
    help = 'Builds one evaluation protocol per query from live-date evidence'
    name = 'protocol_create'

    def add_arguments(self, parser):
        parser.add_argument('queries', help='Query file or report manifest (JSON)')
        parser.add_argument('--protocols', help='Directory the protocol files are written to')
        parser.add_argument('--tools', help='Comma-separated optional tools, skipping tool selection')
        self.add_run_arguments(parser)

    def handle(self, *args, **options):
        config = self.run_config(options, protocol_dir=options.get('protocols'))
        tasks = load_queries(options['queries'])
        self.start(config, [options['queries']])
        tools = [tool.strip() for tool in (options.get('tools') or '').split(',') if tool.strip()]
        builder = ProtocolBuilder(config.gateway(), config.evidence(namespace='protocols'), today=config.run_date,
                                  clock=config.clock)

        def create(task):
            try:
                protocol = builder.create(task.task_id, task.query, tools=tools or None)
            except (ProtocolError, GatewayError, EvidenceError) as exc:
                return None, f"{task.task_id}: {exc.__class__.__name__}: {exc}"
            return save_protocol(protocol, config.protocol_dir), ''

        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(create, tasks))
        written = [path for path, _ in outcomes if path is not None]
        for path in written:
            self.stdout.write(f"Wrote {path}")
        self.finish([message for _, message in outcomes if message], produced=written)
        self.stdout.write(self.style.SUCCESS(f"{len(written)} protocol(s) created, run {self.manifest.run_id}"))
