class GatewayError(Exception):
    """Base class for judged-completion errors."""


class SchemaViolation(GatewayError):
    def __init__(self, schema_name, error):
        self.schema_name = schema_name
        self.error = error
        super().__init__(f"{schema_name}: no valid response after all attempts ({error})")


class BackendUnavailable(GatewayError):
    pass


class FixtureMiss(GatewayError):
    def __init__(self, digest, schema_name=''):
        self.digest = digest
        super().__init__(f"No recorded response for {schema_name or 'request'} {digest}")


class AttemptsExhausted(GatewayError):
    def __init__(self, error):
        self.error = error
        super().__init__(f"Repair attempts exhausted; last validation error: {error}")
