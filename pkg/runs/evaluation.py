"""Per-task metric execution for the evaluate command."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from adaptive.checklist import ChecklistEvaluator
from adaptive.reasoning import ReasoningEvaluator
from adaptive.writing import WritingQualityEvaluator
from protocols.exceptions import ProtocolError
from protocols.storage import load_protocol, protocol_path
from runs.exceptions import MissingProtocol
from scoring.exceptions import ScoringError
from scoring.scorecards import ADAPTIVE_METRICS, build_scorecard
from workflow.authority import DomainRater
from workflow.citations import CitationPipeline
from workflow.factuality import RECOVERABLE, FactualityPipeline

logger = logging.getLogger('run_log')


@dataclass
class TaskOutcome:
    task_id: str
    scorecard: object = None
    # metric -> audit rows
    audit: dict = field(default_factory=dict)
    # metric -> messages carried into the scorecard diagnostics
    notes: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return self.scorecard is not None and not self.failures


def find_protocols(entries, metrics, directory):
    """Protocol path per task; MissingProtocol when adaptive metrics lack one."""
    if not set(metrics) & set(ADAPTIVE_METRICS):
        return {}
    paths = {entry.task_id: protocol_path(entry.task_id, directory) for entry in entries}
    missing = [task_id for task_id, path in paths.items() if not path.exists()]
    if missing:
        raise MissingProtocol(missing, directory)
    return paths


class TaskEvaluator:
    def __init__(self, gateway, evidence, metrics, today, cutoff_date=None, workers=None):
        self.metrics = tuple(metrics)
        self.factuality = FactualityPipeline(gateway, evidence, today=today, cutoff_date=cutoff_date, workers=workers)
        self.citations = CitationPipeline(gateway, evidence, workers=workers)
        self.authority = DomainRater(gateway, workers=workers)
        self.writing = WritingQualityEvaluator(gateway, workers=workers)
        self.checklist = ChecklistEvaluator(gateway, workers=workers)
        self.reasoning = ReasoningEvaluator(gateway, evidence, today=today, workers=workers)

    def _wq(self, report, protocol, outcome):
        scores = self.writing.evaluate_wq(report)
        outcome.audit['wq'] = [scores.to_dict()]
        return {'wq': scores}

    def _factuality(self, report, protocol, outcome):
        counts, records = self.factuality.run_factuality(report)
        outcome.audit['factuality'] = [record.to_dict() for record in records]
        return {'factuality': counts}

    def _ci(self, report, protocol, outcome):
        result = self.citations.run_ci(report)
        outcome.audit['ci'] = [record.to_dict() for record in result.records]
        return {'citations': result}

    def _da(self, report, protocol, outcome):
        ratings = self.authority.run_da(report)
        outcome.audit['da'] = [rating.to_dict() for rating in ratings]
        return {'ratings': ratings}

    def _kic(self, report, protocol, outcome):
        verdicts = self.checklist.evaluate_kic(report, protocol)
        outcome.audit['kic'] = verdicts.audit_rows(protocol)
        return {'kic': verdicts}

    def _rq(self, report, protocol, outcome):
        results, diagnostics = self.reasoning.run_rq(report, protocol)
        outcome.audit['rq'] = [result.audit_row() for result in results]
        for message in diagnostics:
            outcome.notes.setdefault('rq', []).append(message)
            outcome.failures.append(f"rq {message}")
        return {'rq': results}

    def evaluate(self, entry, report, protocol_file=None, run_id=''):
        """Every selected metric; a metric that fails stays undefined and is reported."""
        outcome = TaskOutcome(task_id=entry.task_id)
        protocol = None
        if protocol_file is not None:
            try:
                protocol = load_protocol(protocol_file)
            except ProtocolError as exc:
                outcome.failures.append(f"protocol: {exc}")
        inputs = {}
        for metric in self.metrics:
            if metric in ADAPTIVE_METRICS and protocol is None:
                continue
            try:
                inputs.update(getattr(self, f'_{metric}')(report, protocol, outcome))
            except RECOVERABLE + (ScoringError,) as exc:
                logger.error(f"{entry.task_id}: {metric} failed: {exc}")
                outcome.failures.append(f"{metric}: {exc.__class__.__name__}: {exc}")
                outcome.notes.setdefault(metric, []).append(f"{exc.__class__.__name__}: {exc}")
        try:
            outcome.scorecard = build_scorecard(entry.task_id, notes=outcome.notes, run_id=run_id, **inputs)
        except RECOVERABLE + (ScoringError,) as exc:
            logger.error(f"{entry.task_id}: scorecard failed: {exc}")
            outcome.failures.append(f"scorecard: {exc}")
        return outcome

    def evaluate_all(self, items, protocol_files, run_id='', workers=1):
        """items: (ManifestEntry, Report) pairs; outcomes come back in input order."""
        def one(item):
            entry, report = item
            return self.evaluate(entry, report, protocol_files.get(entry.task_id), run_id)

        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            return list(pool.map(one, items))
