"""Per-run configuration.

Settings give the defaults, an optional YAML file overrides them for one run
and command-line flags override both. Provider credentials stay in settings
and never enter a RunConfig.
"""
import dataclasses
from dataclasses import dataclass
from datetime import date, datetime, time, timezone as dt_timezone
from pathlib import Path
from typing import Optional

import yaml
from django.conf import settings
from django.utils import timezone
from rest_framework import serializers

from conf.dates import as_date
from conf.validation import format_errors
from evidence.tools import build_evidence_tools
from gateway.client import MODES, Gateway
from runs.exceptions import ConfigError
from scoring.scorecards import SELECTABLE_METRICS


class RunConfigFileSerializer(serializers.Serializer):
    mode = serializers.ChoiceField(choices=MODES, required=False)
    protocol_dir = serializers.CharField(required=False)
    cache_dir = serializers.CharField(required=False)
    fixture_dir = serializers.CharField(required=False)
    results_dir = serializers.CharField(required=False)
    workers = serializers.IntegerField(min_value=1, required=False)
    max_concurrency = serializers.IntegerField(min_value=1, required=False)
    metrics = serializers.ListField(child=serializers.ChoiceField(choices=SELECTABLE_METRICS), allow_empty=False,
                                    required=False)
    cutoff_date = serializers.DateField(required=False, allow_null=True)
    today = serializers.DateField(required=False, allow_null=True)
    seed = serializers.IntegerField(required=False, allow_null=True)

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown setting.'] for key in unknown})
        return super().to_internal_value(data)


def parse_metrics(text):
    metrics = [part.strip().lower() for part in (text or '').split(',') if part.strip()]
    unknown = [metric for metric in metrics if metric not in SELECTABLE_METRICS]
    if unknown:
        raise ConfigError(f"Unknown metric(s) {', '.join(unknown)}; choose from {', '.join(SELECTABLE_METRICS)}")
    if not metrics:
        raise ConfigError('Select at least one metric')
    return tuple(metric for metric in SELECTABLE_METRICS if metric in metrics)


@dataclass(frozen=True)
class RunConfig:
    mode: str
    protocol_dir: Path
    cache_dir: Path
    fixture_dir: Path
    results_dir: Path
    workers: int
    max_concurrency: int
    metrics: tuple = SELECTABLE_METRICS
    cutoff_date: Optional[date] = None
    # fixed "current date" for prompts; replays need it to stay byte-identical
    today: Optional[date] = None
    seed: int = 15

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"Unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.mode == 'replay' and not self.fixture_dir.is_dir():
            raise ConfigError(f"Replay mode needs an existing fixture directory, {self.fixture_dir} is missing")
        if self.mode in ('live', 'record') and not settings.LLM_API_KEY:
            raise ConfigError(f"{self.mode} mode needs provider credentials; set LLM_API_KEY")
        if self.cutoff_date and self.today and self.cutoff_date > self.today:
            raise ConfigError(f"Cutoff {self.cutoff_date} lies after the run date {self.today}")
        return self

    @property
    def run_date(self):
        return self.today or timezone.localdate()

    def clock(self):
        if self.today is None:
            return timezone.now()
        return datetime.combine(self.today, time.min, tzinfo=dt_timezone.utc)

    def snapshot(self):
        """JSON-ready copy for manifests; holds no credentials."""
        data = dataclasses.asdict(self)
        for key, value in data.items():
            if isinstance(value, (Path, date)):
                data[key] = str(value)
        data['metrics'] = list(self.metrics)
        return data

    def gateway(self):
        return Gateway.from_settings(self.mode, fixture_dir=self.fixture_dir, max_concurrency=self.max_concurrency)

    def evidence(self, namespace='default'):
        return build_evidence_tools(self.mode, fixture_dir=self.fixture_dir, cache_dir=self.cache_dir,
                                    namespace=namespace)


def read_config_file(path):
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding='utf-8')) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    serializer = RunConfigFileSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(f"Invalid config file {path}: {format_errors(serializer.errors)}")
    return dict(serializer.validated_data)


def defaults():
    return {
        'mode': settings.BACKEND_MODE,
        'protocol_dir': settings.PROTOCOL_DIR,
        'cache_dir': settings.CACHE_DIR,
        'fixture_dir': settings.FIXTURE_DIR,
        'results_dir': settings.RESULTS_DIR,
        'workers': settings.EVALUATION_WORKERS,
        'max_concurrency': settings.LLM_MAX_CONCURRENCY,
        'metrics': SELECTABLE_METRICS,
        'cutoff_date': None,
        'today': settings.RUN_DATE,
        'seed': settings.SWEEP_SEED,
    }


def build_run_config(config_path=None, check=True, **flags):
    """Merge settings, the YAML file and the given flags (None flags are ignored).

    check=False skips the backend checks, for runs that call no provider.
    """
    values = defaults()
    if config_path:
        values.update(read_config_file(config_path))
    values.update({key: value for key, value in flags.items() if value is not None})
    try:
        config = RunConfig(
            mode=values['mode'],
            protocol_dir=Path(values['protocol_dir']),
            cache_dir=Path(values['cache_dir']),
            fixture_dir=Path(values['fixture_dir']),
            results_dir=Path(values['results_dir']),
            workers=int(values['workers']),
            max_concurrency=int(values['max_concurrency']),
            metrics=tuple(values['metrics']),
            cutoff_date=as_date(values['cutoff_date']),
            today=as_date(values['today']),
            seed=int(values['seed']),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if config.workers < 1:
        raise ConfigError(f"Worker count must be positive, got {config.workers}")
    return config.validate() if check else config
