import json
import logging
from pathlib import Path

from conf.jsonfiles import atomic_write, read_json, write_json
from conf.metrics import write_metrics
from scoring.scorecards import load_scorecard

logger = logging.getLogger('run_log')


class ResultStore:
    """File layout of everything a run writes under the results directory."""

    def __init__(self, root):
        self.root = Path(root)

    @property
    def scorecard_dir(self):
        return self.root / 'scorecards'

    def scorecard_path(self, task_id):
        return self.scorecard_dir / f'{task_id}.json'

    def audit_path(self, task_id, metric):
        return self.root / 'audit' / task_id / f'{metric}.jsonl'

    def manifest_path(self, run_id):
        return self.root / 'manifests' / f'{run_id}.json'

    @property
    def aggregate_path(self):
        return self.root / 'aggregate.json'

    @property
    def sweep_path(self):
        return self.root / 'sweep.json'

    @property
    def sweep_csv_path(self):
        return self.root / 'sweep.csv'

    @property
    def metrics_path(self):
        return self.root / 'metrics.prom'

    def save_scorecard(self, card):
        return write_json(self.scorecard_path(card.task_id), card.to_dict())

    def save_audit(self, task_id, metric, run_id, rows):
        lines = [json.dumps({'run_id': run_id, **row}, sort_keys=True, ensure_ascii=False) for row in rows]
        return atomic_write(self.audit_path(task_id, metric), ''.join(f'{line}\n' for line in lines))

    def save_manifest(self, manifest):
        return write_json(self.manifest_path(manifest.run_id), manifest.to_dict())

    def save_aggregate(self, card):
        return write_json(self.aggregate_path, card.to_dict())

    def save_sweep(self, curve):
        write_json(self.sweep_path, curve.to_dict())
        atomic_write(self.sweep_csv_path, curve.to_csv())
        return self.sweep_path

    def save_metrics(self):
        return write_metrics(self.metrics_path)

    def load_scorecards(self, directory=None):
        directory = Path(directory or self.scorecard_dir)
        paths = sorted(directory.glob('*.json')) if directory.is_dir() else []
        cards = [load_scorecard(path) for path in paths]
        logger.info(f"Loaded {len(cards)} scorecard(s) from {directory}")
        return cards

    def load_manifest(self, run_id):
        return read_json(self.manifest_path(run_id))
