"""Factuality corruption sweep.

Each grid point replaces a fraction r of the true claims with their false,
citation-aligned variants and scores the batch twice: once by verifying each
claim against outside evidence, once by checking it only against the source it
cites.
"""
import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from harness.exceptions import HarnessError
from harness.pairs import CorruptionConfig, build_batch
from scoring.formulas import cf_score, factuality_score
from workflow.factuality import RECOVERABLE
from workflow.labels import FactualityLabel, FaithfulnessLabel, LabelCounts

logger = logging.getLogger('harness_log')

SWEEP_VERSION = 1
CSV_COLUMNS = ('r', 'factuality', 'alignment')


def default_grid(steps=15):
    return [Fraction(i, steps) for i in range(steps + 1)]


def parse_grid(text):
    """'0,1/3,2/3,1' or a bare step count such as '15'."""
    text = (text or '').strip()
    if not text:
        return default_grid()
    try:
        if ',' not in text and '/' not in text and '.' not in text and int(text) > 1:
            return default_grid(int(text))
        grid = [Fraction(part.strip()) for part in text.split(',')]
    except (ValueError, ZeroDivisionError) as exc:
        raise HarnessError(f"Bad grid {text!r}: {exc}") from exc
    check_grid(grid)
    return grid


def check_grid(grid):
    if not grid:
        raise HarnessError('Empty sweep grid')
    for r in grid:
        if not 0 <= r <= 1:
            raise HarnessError(f"Grid value {r} lies outside [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise HarnessError('Grid values must be strictly increasing')


def oracle_verifier(item):
    """Ground truth: true variants are Supported, false ones Contradicted."""
    return FactualityLabel.CONTRADICTED.value if item.corrupted else FactualityLabel.SUPPORTED.value


def aligned_source(item):
    """Every variant matches the source it cites."""
    return FaithfulnessLabel.SUPPORTED.value


class PipelineVerifier:
    def __init__(self, pipeline):
        self.pipeline = pipeline

    def __call__(self, item):
        return self.pipeline.verify(item.claim, item.pair_id).label


class CitationAligner:
    def __init__(self, pipeline):
        self.pipeline = pipeline

    def __call__(self, item):
        return self.pipeline.judge_claim(item.claim, item.pair_id).label


@dataclass
class SweepPoint:
    r: Fraction
    k: int
    factuality: Optional[Fraction] = None
    alignment: Optional[Fraction] = None
    error: str = ''

    @property
    def failed(self):
        return bool(self.error)

    def to_dict(self):
        return {
            'r': float(self.r),
            'k': self.k,
            'factuality': None if self.factuality is None else float(self.factuality),
            'alignment': None if self.alignment is None else float(self.alignment),
            'error': self.error,
        }


@dataclass
class SweepCurve:
    points: list
    config: dict = field(default_factory=dict)
    run_id: str = ''

    def __post_init__(self):
        check_grid([point.r for point in self.points])

    @property
    def grid(self):
        return [point.r for point in self.points]

    @property
    def failed_points(self):
        return [point for point in self.points if point.failed]

    def to_dict(self):
        def unit(value):
            return None if value is None else float(value)

        return {
            'version': SWEEP_VERSION,
            'run_id': self.run_id,
            'grid': [float(point.r) for point in self.points],
            'factuality': [unit(point.factuality) for point in self.points],
            'alignment': [unit(point.alignment) for point in self.points],
            'points': [point.to_dict() for point in self.points],
            'config': self.config,
        }

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for point in self.points:
            writer.writerow([
                f'{float(point.r):.6f}',
                '' if point.factuality is None else f'{float(point.factuality):.6f}',
                '' if point.alignment is None else f'{float(point.alignment):.6f}',
            ])
        return buffer.getvalue()


def score_point(pairs, cfg, verifier, aligner):
    point = SweepPoint(r=cfg.r, k=cfg.k)
    try:
        batch = build_batch(pairs, cfg)
        point.factuality = factuality_score(LabelCounts.tally(verifier(item) for item in batch))
        point.alignment = cf_score(LabelCounts.tally(aligner(item) for item in batch))
    except RECOVERABLE + (HarnessError,) as exc:
        point.error = f"{exc.__class__.__name__}: {exc}"
        logger.error(f"Sweep point r={cfg.r} failed: {point.error}")
        return point
    logger.info(f"r={cfg.r} k={cfg.k}: factuality {point.factuality}, alignment {point.alignment}")
    return point


def run_sweep(grid, pairs, verifier=oracle_verifier, aligner=aligned_source, n=15, seed=None, workers=1,
              pair_source=None):
    """One point per grid value; a failed point is marked, not fatal."""
    grid = [Fraction(r) for r in grid]
    check_grid(grid)
    configs = [CorruptionConfig(r=r, n=n, pair_source=pair_source, seed=seed) for r in grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda cfg: score_point(pairs, cfg, verifier, aligner), configs))
    else:
        points = [score_point(pairs, cfg, verifier, aligner) for cfg in configs]
    config = {
        'n': n,
        'seed': seed,
        'pair_source': str(configs[0].to_dict()['pair_source']),
        'verifier': getattr(verifier, '__name__', verifier.__class__.__name__),
        'aligner': getattr(aligner, '__name__', aligner.__class__.__name__),
    }
    curve = SweepCurve(points=points, config=config)
    if curve.failed_points:
        logger.warning(f"{len(curve.failed_points)} of {len(points)} sweep point(s) failed")
    return curve
