# utils/output_writer.py - CSV and JSON emission for run bundles

import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


def format_number(value, digits=17):
    """Locale-free fixed-precision rendering"""
    if isinstance(value, str):
        return value
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), f'.{digits}g')


def write_atomic(path, text):
    """Write text through a temporary file in the same directory, then rename"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return str(path)


class OutputWriter:
    """Collects the files of one run bundle"""

    def __init__(self, directory, digits=17):
        self.directory = Path(directory)
        self.digits = digits
        self.files = []

    def _target(self, name):
        self.files.append(name)
        return self.directory / name

    def write_table(self, name, columns, rows):
        """CSV with a header line and one line per row"""
        lines = [','.join(columns)]
        for row in rows:
            lines.append(','.join(format_number(v, self.digits) for v in row))
        path = write_atomic(self._target(name), '\n'.join(lines) + '\n')
        logger.debug(f"Wrote {path} ({len(lines) - 1} rows)")
        return path

    def write_matrix(self, name, row_axis, col_axis, row_coords, col_coords, matrix):
        """Matrix CSV; header holds the axis names then the column coordinates"""
        matrix = np.asarray(matrix)
        header = [f'{row_axis}\\{col_axis}'] + [format_number(c, self.digits) for c in col_coords]
        lines = [','.join(header)]
        for coord, row in zip(row_coords, matrix):
            lines.append(','.join([format_number(coord, self.digits)]
                                  + [format_number(v, self.digits) for v in row]))
        path = write_atomic(self._target(name), '\n'.join(lines) + '\n')
        logger.debug(f"Wrote {path} ({matrix.shape[0]}x{matrix.shape[1]})")
        return path

    def write_json(self, name, data, track=True):
        text = json.dumps(data, indent=2, sort_keys=True, default=_json_default) + '\n'
        target = self._target(name) if track else self.directory / name
        return write_atomic(target, text)


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)
