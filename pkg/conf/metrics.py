from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, write_to_textfile

REGISTRY = CollectorRegistry()

JUDGE_CALLS = Counter(
    'judge_calls', 'Judged completions by backend mode and outcome',
    ['mode', 'outcome'], registry=REGISTRY,
)
SCHEMA_REPAIRS = Counter(
    'judge_schema_repairs', 'Re-asks issued after schema validation failures',
    registry=REGISTRY,
)
FIXTURE_MISSES = Counter(
    'judge_fixture_misses', 'Replay lookups with no recording', registry=REGISTRY,
)
SEARCHES = Counter(
    'evidence_searches', 'Search tool invocations', ['tool'], registry=REGISTRY,
)
FETCHES = Counter(
    'evidence_fetches', 'URL fetches by resulting status', ['status'], registry=REGISTRY,
)
CUTOFF_EXCLUSIONS = Counter(
    'evidence_cutoff_exclusions', 'Search results dropped by the publication cutoff',
    registry=REGISTRY,
)


def write_metrics(path):
    """Textfile-collector export; no HTTP exporter is started."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
    return path
