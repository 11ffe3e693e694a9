"""CSV and JSON output.

Files carry no timestamps: the same scenario, seed and sample count always
produce byte-identical output. Numbers go out with 17 significant digits.
"""
import csv
import json
import logging
import math
import os
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from app import __version__

log = logging.getLogger("cvdyn.reports")


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def header_line(config_hash: str) -> str:
    return f"# cvdyn {__version__} config-sha256={config_hash or 'none'}"


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence], config_hash: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(header_line(config_hash) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
            count += 1
    log.info("Wrote %s (%d rows)", path, count)
    return path


def write_columns(path: str, columns: Mapping[str, np.ndarray], order: Sequence[str],
                  config_hash: str) -> str:
    """Write column arrays of equal length in `order`."""
    data = [np.asarray(columns[name]) for name in order]
    return write_csv(path, order, zip(*data), config_hash)


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    """(column names, rows as strings) of a file written by write_csv."""
    with open(path, newline="", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_summary(path: str, command: str, summary: Mapping[str, Any], config_hash: str) -> str:
    """JSON document with the tool version and config hash ahead of the results."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    data = {
        "tool": "cvdyn",
        "version": __version__,
        "config_sha256": config_hash or None,
        "command": command,
        "results": _jsonable(summary),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    log.info("Wrote %s", path)
    return path
