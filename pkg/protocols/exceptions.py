class ProtocolError(Exception):
    """Base class for protocol creation and protocol file errors."""


class BudgetExhausted(ProtocolError):
    def __init__(self, budget, found, minimum):
        self.budget = budget
        self.found = found
        self.minimum = minimum
        super().__init__(f"Step budget of {budget} used up with {found} grounded item(s); {minimum} required")


class ItemRejected(ProtocolError):
    """A drafted item that cannot enter the protocol; the agent drops it and carries on."""


class PlanToolMismatch(ItemRejected):
    def __init__(self, question, tools):
        self.question = question
        self.tools = sorted(tools)
        super().__init__(f"Validation plan uses unselected tool(s) {', '.join(self.tools)}: {question!r}")


class SchemaVersionMismatch(ProtocolError):
    def __init__(self, path, version):
        self.path = path
        self.version = version
        super().__init__(f"{path}: unsupported protocol version {version!r}")


class CorruptFile(ProtocolError):
    def __init__(self, path, error):
        self.path = path
        self.error = error
        super().__init__(f"{path}: {error}")
