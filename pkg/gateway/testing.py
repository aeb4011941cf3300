"""Scripted provider for tests and offline fixture recording."""
import json
import threading
from collections import Counter

from gateway.exceptions import BackendUnavailable


class ScriptedBackend:
    """Answers by output schema name.

    Each script entry is a dict/str reply, or a callable taking the JudgeRequest
    and returning one. A list entry is consumed one reply per call, the last
    reply repeating.
    """

    def __init__(self, scripts=None, model='scripted'):
        self.scripts = dict(scripts or {})
        self.model = model
        self.calls = Counter()
        self.requests = []
        self._lock = threading.Lock()

    @property
    def total_calls(self):
        return sum(self.calls.values())

    def _reply(self, req, name):
        script = self.scripts.get(name)
        if script is None:
            raise BackendUnavailable(f"No script for {name}")
        if isinstance(script, list):
            index = min(self.calls[name] - 1, len(script) - 1)
            script = script[index]
        if callable(script):
            script = script(req)
        return script if isinstance(script, str) else json.dumps(script, sort_keys=True)

    def complete(self, req):
        name = req.schema_name
        with self._lock:
            self.calls[name] += 1
            self.requests.append(req)
            text = self._reply(req, name)
        return text, {'model': self.model, 'finish_reason': 'stop'}
