from decimal import ROUND_HALF_UP, Decimal

from scoring.formulas import as_fraction

COLUMNS = (
    ('wq', 'WQ'),
    ('factuality', 'Fact.'),
    ('ci', 'CI'),
    ('ca', 'CA'),
    ('cf', 'CF'),
    ('da', 'DA'),
    ('kic', 'KIC'),
    ('rq', 'RQ'),
)
UNDEFINED = 'n/a'
CENT = Decimal('0.01')


def percent(value):
    """Score on the 0-100 scale with two decimals, rounded half up."""
    value = as_fraction(value)
    if value is None:
        return UNDEFINED
    exact = Decimal(value.numerator * 100) / Decimal(value.denominator)
    return str(exact.quantize(CENT, rounding=ROUND_HALF_UP))


def render_table(scorecards, aggregate):
    header = ['Task'] + [title for _, title in COLUMNS]
    rows = [[card.task_id] + [percent(card.scores[metric]) for metric, _ in COLUMNS] for card in scorecards]
    rows.append(['Aggregate'] + [percent(aggregate.scores[metric]) for metric, _ in COLUMNS])
    rows.append(['Excluded'] + [str(aggregate.excluded_counts.get(metric, 0)) for metric, _ in COLUMNS])
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]

    def line(cells):
        return '  '.join([cells[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(cells[1:], widths[1:])])

    rule = '-' * len(line(header))
    return '\n'.join([line(header), rule] + [line(row) for row in rows[:-2]] + [rule] + [line(row) for row in rows[-2:]])
