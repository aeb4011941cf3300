class HarnessError(Exception):
    """Base class for controlled-experiment errors."""


class FormatError(HarnessError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        self.message = message
        super().__init__(f"{path}, line {line}: {message}")


class DegenerateBaseline(HarnessError):
    def __init__(self, query=''):
        self.query = query
        super().__init__(f"Sound report scored 0 on reasoning quality, degradation is undefined: {query!r}")
