class RunError(Exception):
    """Base class for command and run-configuration errors."""


class ConfigError(RunError):
    pass


class MissingProtocol(RunError):
    def __init__(self, task_ids, directory):
        self.task_ids = list(task_ids)
        self.directory = directory
        super().__init__(f"No protocol in {directory} for {', '.join(self.task_ids)}; "
                         f"run protocol_create first or select only static metrics")
