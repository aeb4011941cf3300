class ScoringError(Exception):
    """Base class for score computation and scorecard errors."""


class EmptyChecklist(ScoringError):
    def __init__(self):
        super().__init__("Checklist coverage needs at least one item")


class EmptyResults(ScoringError):
    def __init__(self):
        super().__init__("Reasoning quality needs at least one scored item")


class EmptyTaskSet(ScoringError):
    def __init__(self):
        super().__init__("Aggregation needs at least one scorecard")


class InvalidScorecard(ScoringError):
    def __init__(self, path, error):
        self.path = path
        self.error = error
        super().__init__(f"{path}: {error}")
