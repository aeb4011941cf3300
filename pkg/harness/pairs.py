"""Adversarial claim pairs and the corrupted batches built from them."""
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from rest_framework import serializers

from conf.validation import format_errors
from harness.exceptions import FormatError, HarnessError
from workflow.claims import Claim

BUNDLED_PAIRS = Path(__file__).resolve().parent / 'data' / 'adversarial_pairs.json'
REASONING_QUERIES = Path(__file__).resolve().parent / 'data' / 'reasoning_queries.json'

TRUE_VARIANT = 'true'
FALSE_VARIANT = 'false'


@dataclass(frozen=True)
class ClaimPair:
    id: int
    topic: str
    true_claim: str
    true_url: str
    # cited by a source that states it, so citation alignment always holds
    false_claim: str
    false_url: str

    def variant(self, corrupted):
        if corrupted:
            return BatchClaim(self.id, FALSE_VARIANT, Claim(self.false_claim, (0, 0), cited_urls=(self.false_url,)))
        return BatchClaim(self.id, TRUE_VARIANT, Claim(self.true_claim, (0, 0), cited_urls=(self.true_url,)))


@dataclass(frozen=True)
class BatchClaim:
    pair_id: int
    variant: str
    claim: Claim

    @property
    def corrupted(self):
        return self.variant == FALSE_VARIANT


class VariantSerializer(serializers.Serializer):
    claim = serializers.CharField()
    url = serializers.URLField()


class ClaimPairSerializer(serializers.Serializer):
    id = serializers.IntegerField(min_value=1)
    topic = serializers.CharField()
    true = VariantSerializer()
    false = VariantSerializer()


def _element_lines(text):
    """Line number where each top-level array element starts."""
    decoder = json.JSONDecoder()
    lines, index = [], text.index('[') + 1
    while True:
        while index < len(text) and text[index] in ' \t\r\n,':
            index += 1
        if index >= len(text) or text[index] == ']':
            return lines
        lines.append(text.count('\n', 0, index) + 1)
        _, index = decoder.raw_decode(text, index)


def load_pairs(path=None):
    path = Path(path or BUNDLED_PAIRS)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise HarnessError(f"Cannot read pair file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.lineno, exc.msg) from exc
    if not isinstance(data, list):
        raise FormatError(path, 1, 'expected a JSON array of claim pairs')

    lines = _element_lines(text)
    pairs, seen = [], set()
    for index, entry in enumerate(data):
        serializer = ClaimPairSerializer(data=entry)
        if not serializer.is_valid():
            raise FormatError(path, lines[index], f"pair {index + 1}: {format_errors(serializer.errors)}")
        item = serializer.validated_data
        if item['id'] in seen:
            raise FormatError(path, lines[index], f"duplicate pair id {item['id']}")
        seen.add(item['id'])
        pairs.append(ClaimPair(
            id=item['id'],
            topic=item['topic'],
            true_claim=item['true']['claim'],
            true_url=item['true']['url'],
            false_claim=item['false']['claim'],
            false_url=item['false']['url'],
        ))
    return sorted(pairs, key=lambda pair: pair.id)


def corrupted_count(r, n):
    """round(r * n) with halves rounded up."""
    return int(Fraction(r) * n + Fraction(1, 2))


@dataclass(frozen=True)
class CorruptionConfig:
    r: Fraction
    n: int = 15
    pair_source: Optional[Path] = None
    # None selects false variants by ascending pair id
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'r', Fraction(self.r))
        if not 0 <= self.r <= 1:
            raise HarnessError(f"Corruption rate must lie in [0, 1], got {self.r}")
        if self.n < 1:
            raise HarnessError(f"Batch size must be positive, got {self.n}")

    @property
    def k(self):
        return corrupted_count(self.r, self.n)

    def to_dict(self):
        return {'r': float(self.r), 'n': self.n, 'k': self.k,
                'pair_source': str(self.pair_source or BUNDLED_PAIRS), 'seed': self.seed}


def build_batch(pairs, cfg):
    """n claims, the first k of them (by pair id, or by seeded draw) false variants."""
    pairs = sorted(pairs, key=lambda pair: pair.id)
    if cfg.n > len(pairs):
        raise HarnessError(f"Batch of {cfg.n} needs more than the {len(pairs)} pairs available")
    pairs = pairs[:cfg.n]
    if cfg.seed is None:
        corrupted = {pair.id for pair in pairs[:cfg.k]}
    else:
        corrupted = {pair.id for pair in random.Random(cfg.seed).sample(pairs, cfg.k)}
    return [pair.variant(pair.id in corrupted) for pair in pairs]
