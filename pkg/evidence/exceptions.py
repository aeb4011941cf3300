class EvidenceError(Exception):
    """Base class for search and fetch errors."""


class BackendUnavailable(EvidenceError):
    pass


class RateLimited(EvidenceError):
    def __init__(self, tool, retry_after=None):
        self.tool = tool
        self.retry_after = retry_after
        super().__init__(f"{tool} search is rate limited")
