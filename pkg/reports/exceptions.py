class ReportError(Exception):
    """Base class for report parsing and URL handling errors."""


class EmptyInput(ReportError):
    def __init__(self, task_id=None):
        self.task_id = task_id
        super().__init__(f"Report is blank (task {task_id})")


class MalformedUrl(ReportError):
    def __init__(self, url):
        self.url = url
        super().__init__(f"Not an absolute http(s) URL: {url!r}")


class UnknownSuffix(ReportError):
    """The host has no registrable domain; callers use the full host instead."""

    def __init__(self, host):
        self.host = host
        super().__init__(f"No registrable domain for host {host!r}")


class ManifestError(ReportError):
    pass
