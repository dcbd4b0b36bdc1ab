"""Experiment manifests.

The manifest of an experiment directory lists, for every stage that ran, a
digest of the stage's inputs, the sha256 of every file it produced, its
wall-clock time and the command line that reproduces it on its own. A stage
whose inputs digest is unchanged and whose outputs still match their digests
is skipped when the experiment is run again.
"""

import collections
import hashlib
import json
import logging
import os
import platform
import sys

import numpy as np

import flowaug
from flowaug import errors
from flowaug import logs

MANIFEST_FILENAME = 'manifest.json'
TOOL_NAME = 'flowaug-lab'
TOOL_VERSION = flowaug.__version__

_CHUNK_BYTES = 1 << 20


def file_digest(path):
    """Hex sha256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(_CHUNK_BYTES), b''):
            h.update(chunk)
    return h.hexdigest()


def path_digest(path):
    """Hex sha256 of a file, or of a directory's relative names and files."""
    if not os.path.isdir(path):
        return file_digest(path)
    h = hashlib.sha256()
    for name in sorted(_walk_files(path)):
        h.update(name.encode('utf-8'))
        h.update(file_digest(os.path.join(path, name)).encode('ascii'))
    return h.hexdigest()


def _walk_files(directory):
    for root, _, files in os.walk(directory):
        for name in files:
            yield os.path.relpath(os.path.join(root, name), directory)


def inputs_digest(*parts):
    """Hex sha256 of JSON-serializable parts, independent of dict order."""
    text = json.dumps(logs.serialize(list(parts)), sort_keys=True)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def list_outputs(paths):
    """Map of every file under the given paths to its digest.

    Directories are expanded into the files they contain.
    """
    outputs = collections.OrderedDict()
    for path in paths:
        if os.path.isdir(path):
            for name in sorted(_walk_files(path)):
                full = os.path.join(path, name)
                outputs[full] = file_digest(full)
        else:
            outputs[path] = file_digest(path)
    return outputs


class ExperimentManifest(object):
    """Stage records of one experiment directory, persisted as JSON."""

    def __init__(self, out_dir, config=None):
        """Constructor.

        Args:
            out_dir: String. Experiment directory holding the manifest.
            config: Optional dict echo of the resolved experiment config.
        """
        self.out_dir = out_dir
        self.path = os.path.join(out_dir, MANIFEST_FILENAME)
        self.config = config
        self.stages = collections.OrderedDict()

    @classmethod
    def load(cls, out_dir):
        """Manifest of out_dir, empty if none was written yet."""
        manifest = cls(out_dir)
        if not os.path.exists(manifest.path):
            return manifest
        try:
            with open(manifest.path) as f:
                d = json.load(f)
            manifest.config = d.get('config')
            for name, record in d['stages'].items():
                manifest.stages[name] = record
        except (ValueError, KeyError, AttributeError) as e:
            raise errors.FormatError('corrupt manifest {}: {}'.format(
                manifest.path, e))
        return manifest

    def is_current(self, stage, digest):
        """Whether a stage ran with these inputs and its outputs are intact."""
        record = self.stages.get(stage)
        if record is None or record['inputs_digest'] != digest:
            return False
        for path, expected in record['outputs'].items():
            if not os.path.isfile(path) or file_digest(path) != expected:
                return False
        return True

    def record(self, stage, digest, outputs, seconds, command):
        """Store a completed stage and write the manifest.

        Args:
            stage: String stage name.
            digest: Inputs digest of the stage.
            outputs: Iterable of produced files or directories.
            seconds: Float wall-clock time.
            command: List of strings, the stand-alone command line.
        """
        self.stages[stage] = {
            'inputs_digest': digest,
            'outputs': list_outputs(outputs),
            'seconds': round(float(seconds), 3),
            'command': list(command),
        }
        self.save()

    def outputs(self, stage):
        return list(self.stages[stage]['outputs'])

    def commands(self):
        """Command lines of all stages, in execution order."""
        return [r['command'] for r in self.stages.values()]

    def verify(self):
        """Paths whose current digest differs from the recorded one."""
        mismatched = []
        for record in self.stages.values():
            for path, expected in record['outputs'].items():
                if not os.path.isfile(path) or file_digest(path) != expected:
                    mismatched.append(path)
        return mismatched

    def to_dict(self):
        return {
            'tool': {'name': TOOL_NAME, 'version': TOOL_VERSION},
            'environment': {
                'python': sys.version.split()[0],
                'platform': platform.platform(),
                'numpy': np.__version__,
            },
            'config': self.config,
            'stages': self.stages,
        }

    def save(self):
        os.makedirs(self.out_dir, exist_ok=True)
        with open(self.path, 'w') as f:
            json.dump(logs.serialize(self.to_dict()), f, indent=2)
        logging.debug('Wrote manifest {}.'.format(self.path))
