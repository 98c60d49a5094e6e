import csv
import logging
import os

import numpy as np

from .exceptions import ParameterError

logger = logging.getLogger(__name__)


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return '%.15g' % value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def emit_csv(rows, path, fieldnames=None):
    """
    Write homogeneous dict rows with a header, LF line endings and floats to
    15 significant digits. ``fieldnames`` fixes the header of an empty file.
    """
    rows = list(rows)
    if fieldnames is None:
        if not rows:
            raise ParameterError('an empty row set needs explicit fieldnames')
        fieldnames = list(rows[0])
    for row in rows:
        if list(row) != list(fieldnames):
            raise ParameterError('rows must share the columns {}'.format(', '.join(fieldnames)))
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([format_value(row[name]) for name in fieldnames])
    logger.info('singular_ma.export.written path=%s rows=%d', path, len(rows))
    return path


def nodal_rows(solution):
    return [{'x1': x[0], 'x2': x[1], 'u': u} for x, u in zip(solution.grid.nodes, solution.values)]
