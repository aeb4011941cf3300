from datetime import date

from django.utils.dateparse import parse_date


def long_date(day):
    """'January 23, 2026': the form dates take in judge prompts."""
    return f"{day:%B} {day.day}, {day.year}"


def as_date(value):
    """ISO date from config or CLI text; dates pass through, blanks give None."""
    if value is None or isinstance(value, date):
        return value
    text = str(value).strip()
    if not text:
        return None
    parsed = parse_date(text)
    if parsed is None:
        raise ValueError(f"Not an ISO date (YYYY-MM-DD): {value!r}")
    return parsed
