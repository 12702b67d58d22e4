"""Prediction CSV and run-record CSV formats.

Prediction files have the header ``y,<model_1>,...,<model_m>``, one row per
evaluation observation, ``y`` in {0, 1}.  Accuracy files hold 0/1 predicted
labels, AUC files real-valued scores.  UTF-8, LF line endings, ``.`` as
decimal separator.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .measures import EvaluationTable, MeasureKind


class InputError(ValueError):
    """Malformed input file; the message points at the offending cell."""


def _number(text, row, col, name):
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"row {row}, column {name!r} (#{col}): not a number: {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"row {row}, column {name!r} (#{col}): non-finite value {text!r}")
    return value


def parse_predictions(text, kind):
    """Parse prediction CSV text into an :class:`EvaluationTable`."""
    kind = MeasureKind.parse(kind)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty prediction file") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "y":
        raise InputError("first header field must be 'y'")
    if len(header) < 2:
        raise InputError("no model columns after 'y'")
    ids = header[1:]
    if len(set(ids)) != len(ids) or any(not i for i in ids):
        raise InputError("model column names must be nonempty and distinct")
    labels, preds = [], []
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"row {row_no}: expected {len(header)} fields, found {len(row)}")
        values = [_number(cell, row_no, c + 1, header[c]) for c, cell in enumerate(row)]
        if values[0] not in (0.0, 1.0):
            raise InputError(f"row {row_no}, column 'y' (#1): label must be 0 or 1, got {row[0]!r}")
        if kind is MeasureKind.ACCURACY:
            for c, v in enumerate(values[1:], start=1):
                if v not in (0.0, 1.0):
                    raise InputError(
                        f"row {row_no}, column {header[c]!r} (#{c + 1}): accuracy mode needs 0/1 "
                        f"predictions, got {row[c]!r}"
                    )
        labels.append(int(values[0]))
        preds.append(values[1:])
    if len(labels) < 2:
        raise InputError("need at least 2 data rows")
    try:
        table = EvaluationTable(np.array(labels), np.array(preds), ids)
        table.check_kind(kind)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return table


def read_predictions(path, kind):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_predictions(fh.read(), kind)


def _fmt(value, kind):
    if kind is MeasureKind.ACCURACY:
        return str(int(value))
    return repr(float(value))


def format_predictions(table, kind):
    """Serialise ``table``; :func:`parse_predictions` inverts this exactly."""
    kind = MeasureKind.parse(kind)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["y", *table.model_ids])
    for y, row in zip(table.labels, table.predictions):
        writer.writerow([str(int(y)), *(_fmt(v, kind) for v in row)])
    return buf.getvalue()


def write_predictions(table, kind, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_predictions(table, kind))


def _cell(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def format_rows(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()
