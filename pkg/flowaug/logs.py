"""Append-only JSON-lines logs of training progress.

A log directory holds a 'description.txt' explaining the records and a
'log.jsonl' file with one JSON object per line, one line per unit of progress
(e.g. one epoch). See read_log for reading a log back.
"""

import json
import logging
import os
import time

import numpy as np


def serialize(x):
    """Serialize a value x so that it is JSON-writable.

    Numpy arrays and scalars are not JSON serializable, so they are converted
    to lists and Python scalars. This function is recursive to handle nestings
    inside of lists/tuples/dictionaries.

    Args:
        x: Value to serialize.

    Returns:
        Serialized value that can be JSON dumped.
    """
    if isinstance(x, np.ndarray):
        return x.tolist()
    elif isinstance(x, np.floating):
        return float(x)
    elif isinstance(x, np.integer):
        return int(x)
    elif isinstance(x, (list, tuple)):
        return [serialize(a) for a in x]
    elif isinstance(x, dict):
        return {k: serialize(v) for k, v in x.items()}
    else:
        return x


class JsonLinesLogger(object):
    """Writes one JSON record per call to log().

    Records are flushed immediately, so a log of an interrupted run is valid up
    to its last complete line.
    """

    def __init__(self, log_dir, description, filename='log.jsonl',
                 timestamps=False):
        """Constructor.

        Args:
            log_dir: String. Directory, created if needed.
            description: String written to description.txt.
            filename: String. Name of the records file inside log_dir.
            timestamps: Bool. Whether to add a 'time' field to every record.
                Off by default so that logs of identical runs are identical.
        """
        os.makedirs(log_dir, exist_ok=True)
        self._log_dir = log_dir
        self._timestamps = timestamps
        self._path = os.path.join(log_dir, filename)

        description_filename = os.path.join(log_dir, 'description.txt')
        logging.info('Logging description to {}.'.format(description_filename))
        with open(description_filename, 'w') as f:
            f.write(description)

        # Truncate, a logger owns its file
        open(self._path, 'w').close()
        self._count = 0

    @property
    def path(self):
        return self._path

    def __len__(self):
        return self._count

    def log(self, record):
        record = serialize(dict(record))
        if self._timestamps:
            record['time'] = time.time()
        with open(self._path, 'a') as f:
            f.write(json.dumps(record, sort_keys=True) + '\n')
        self._count += 1


def read_log(path):
    """Read a JSON-lines log into a list of dicts."""
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]
