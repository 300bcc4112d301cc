"""
Emission of result rows as an aligned text table, CSV or JSON.
"""
import csv
import json
import math
import typing

import numpy as np

import lifeplan

Row = typing.Mapping[str, typing.Any]

# Columns printed with four decimals in text tables; everything else numeric gets six.
TIME_COLUMNS = frozenset({'T1', 'T2', 'exp_duration', 'mean_xi', 'analytic_xi', 'se_xi', 'xi'})


def _native(value: typing.Any) -> typing.Any:
    """Numpy scalars as the matching Python scalars."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def _text_cell(column: str, value: typing.Any) -> str:
    value = _native(value)
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return ('%.4f' if column in TIME_COLUMNS else '%.6f') % value
    if value is None:
        return '-'
    return str(value)


def _plain_cell(value: typing.Any) -> str:
    value = _native(value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ''
    return str(value)


def _json_value(value: typing.Any) -> typing.Any:
    value = _native(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def columns_of(rows: typing.Sequence[Row]) -> typing.List[str]:
    """Column names in first-seen order."""
    columns: typing.List[str] = []
    for row in rows:
        for column in row:
            if column not in columns:
                columns.append(column)
    return columns


def render_table(rows: typing.Sequence[Row], stream: typing.TextIO) -> None:
    columns = columns_of(rows)
    cells = [[_text_cell(column, row.get(column)) for column in columns] for row in rows]
    widths = [max([len(column)] + [len(line[index]) for line in cells])
              for index, column in enumerate(columns)]
    stream.write('  '.join(column.rjust(width) for column, width in zip(columns, widths)) + '\n')
    for line in cells:
        stream.write('  '.join(cell.rjust(width) for cell, width in zip(line, widths)) + '\n')


def render_csv(rows: typing.Sequence[Row], stream: typing.TextIO) -> None:
    columns = columns_of(rows)
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_plain_cell(row.get(column)) for column in columns])


def render_json(rows: typing.Sequence[Row], stream: typing.TextIO,
                meta: typing.Mapping[str, typing.Any]) -> None:
    document = {
        'rows': [{key: _json_value(value) for key, value in row.items()} for row in rows],
        'meta': dict(meta, version=lifeplan.__version__),
    }
    json.dump(document, stream, indent=2)
    stream.write('\n')


def emit(rows: typing.Sequence[Row], output_format: str, stream: typing.TextIO,
         meta: typing.Optional[typing.Mapping[str, typing.Any]] = None) -> None:
    """Write rows in the requested format. meta is only written in JSON."""
    if output_format == 'table':
        render_table(rows, stream)
    elif output_format == 'csv':
        render_csv(rows, stream)
    elif output_format == 'json':
        render_json(rows, stream, meta or {})
    else:
        raise ValueError(output_format)
