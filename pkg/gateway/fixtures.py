import logging
import threading
from pathlib import Path

from conf.jsonfiles import read_json, write_json
from gateway.schemas import describe_schema

logger = logging.getLogger('gateway_log')

FIXTURE_VERSION = 1


class FixtureStore:
    """Content-addressed recordings: <root>/judge/<digest[:2]>/<digest>.json.

    Reads take no lock; writes are serialized and atomic.
    """

    def __init__(self, root):
        self.root = Path(root)
        self._write_lock = threading.Lock()

    def path_for(self, key):
        return self.root / 'judge' / key.digest[:2] / f"{key.digest}.json"

    def get(self, key):
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            record = read_json(path)
            return record['response']['raw_text'], record['response'].get('provider_meta', {})
        except (OSError, ValueError, KeyError) as exc:
            logger.error(f"Unreadable fixture {path}: {exc}")
            return None

    def put(self, key, req, raw_text, provider_meta):
        record = {
            'version': FIXTURE_VERSION,
            'digest': key.digest,
            'request': {
                'schema': req.schema_name,
                'role_prompt': req.role_prompt,
                'user_prompt': req.user_prompt,
                'output_schema': describe_schema(req.output_schema),
            },
            'response': {'raw_text': raw_text, 'provider_meta': provider_meta},
        }
        with self._write_lock:
            write_json(self.path_for(key), record)
        logger.debug(f"Recorded {req.schema_name} fixture {key.digest}")

    def __len__(self):
        return sum(1 for _ in (self.root / 'judge').glob('*/*.json'))
