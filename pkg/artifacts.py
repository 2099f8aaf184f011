"""
JSON and CSV artifacts.

Floats are written with repr, the shortest string that round-trips, so two
runs with the same inputs produce byte-identical files. Non-finite values
are spelled INF, -INF and NAN.
"""

import csv
import io
import json
import math
import sys
from typing import Any, Iterable, Optional, Sequence

import numpy as np


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, tuples listed, non-finite floats spelled out"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _plain_float(float(value))
    return value


def _plain_float(x: float):
    if math.isnan(x):
        return 'NAN'
    if math.isinf(x):
        return 'INF' if x > 0 else '-INF'
    return x


def format_cell(value: Any) -> str:
    """CSV cell text"""
    value = _plain(value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps_json(data: Any) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True) + '\n'


def write_json(data: Any, path: Optional[str] = None) -> None:
    """JSON to path, or stdout when path is None or '-'"""
    text = dumps_json(data)
    if path in (None, '-'):
        sys.stdout.write(text)
        return
    with open(path, 'w', newline='\n') as f:
        f.write(text)


def dumps_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], path: Optional[str] = None) -> None:
    """CSV with a header row; header only when rows is empty"""
    text = dumps_csv(columns, rows)
    if path in (None, '-'):
        sys.stdout.write(text)
        return
    with open(path, 'w', newline='') as f:
        f.write(text)


def load_json_argument(argument: str) -> Any:
    """Inline JSON text, or a path to a JSON file"""
    text = argument.strip()
    if text.startswith('{') or text.startswith('['):
        return json.loads(text)
    with open(argument) as f:
        return json.load(f)
