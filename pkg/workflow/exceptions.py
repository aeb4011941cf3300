class EvaluationError(Exception):
    """Base class for metric pipeline errors."""


class EmptyReport(EvaluationError):
    def __init__(self, task_id):
        self.task_id = task_id
        super().__init__(f"Report {task_id} has no prose to extract claims from")


class PreconditionViolation(EvaluationError):
    pass
