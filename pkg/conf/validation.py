"""Helpers shared by every DRF payload validator."""


def format_errors(errors, path=''):
    """Flatten serializer errors into 'field.sub: message' phrases."""
    if isinstance(errors, dict):
        parts = [format_errors(value, f"{path}.{key}" if path else str(key)) for key, value in errors.items()]
    elif isinstance(errors, list) and errors and all(isinstance(e, str) for e in errors):
        return f"{path or 'response'}: {' '.join(str(e) for e in errors)}"
    elif isinstance(errors, list):
        parts = [format_errors(value, f"{path}[{index}]") for index, value in enumerate(errors)]
    else:
        return f"{path or 'response'}: {errors}"
    return '; '.join(part for part in parts if part)
