"""Self-describing container for model parameters.

A checkpoint is a numpy .npz archive. The entry '__header__' holds a UTF-8 JSON
header with the format name and version, the checkpoint kind ('flow' or
'classifier'), whatever the model needs to rebuild its architecture, and the
ordered list of parameter names and shapes. Parameters are stored as
little-endian float32 arrays named 'p000', 'p001', ... in that order.

load_checkpoint validates the header before any parameter array is read.
"""

import collections
import json
import logging

import numpy as np
import torch

from flowaug import errors
from flowaug import logs

FORMAT_NAME = 'flowaug-checkpoint'
FORMAT_VERSION = 1
DTYPE = '<f4'
_HEADER_KEY = '__header__'


def _param_key(i):
    return 'p{:03d}'.format(i)


def save_checkpoint(path, kind, header, state_dict):
    """Write parameters and a header to path.

    Args:
        path: String. Written as is; numpy adds no suffix to open files.
        kind: String. Checkpoint kind, checked again on load.
        header: Dict of JSON-serializable model metadata (architecture,
            preprocessing constants, config echo, ...).
        state_dict: Ordered mapping from parameter name to torch tensor.
    """
    header = dict(logs.serialize(header))
    header.update({
        'format': FORMAT_NAME,
        'version': FORMAT_VERSION,
        'kind': kind,
        'dtype': DTYPE,
        'parameters': [
            {'name': name, 'shape': list(tensor.shape)}
            for name, tensor in state_dict.items()
        ],
    })
    arrays = collections.OrderedDict()
    arrays[_HEADER_KEY] = np.frombuffer(
        json.dumps(header, sort_keys=True).encode('utf-8'), dtype=np.uint8)
    for i, tensor in enumerate(state_dict.values()):
        arrays[_param_key(i)] = (
            tensor.detach().cpu().numpy().astype(DTYPE))
    with open(path, 'wb') as f:
        np.savez(f, **arrays)
    logging.info('Wrote {} checkpoint with {} tensors to {}.'.format(
        kind, len(state_dict), path))


def read_header(path, kind):
    """Read and validate the header of a checkpoint.

    Raises:
        errors.FormatError: Unreadable file, wrong format or version, wrong
            kind or malformed parameter list.
    """
    try:
        with np.load(path, allow_pickle=False) as archive:
            raw = archive[_HEADER_KEY].tobytes()
        header = json.loads(raw.decode('utf-8'))
    except (OSError, KeyError, ValueError) as e:
        raise errors.FormatError(
            'corrupt checkpoint header {}: {}'.format(path, e))
    if not isinstance(header, dict):
        raise errors.FormatError('corrupt checkpoint header {}'.format(path))
    if header.get('format') != FORMAT_NAME:
        raise errors.FormatError('{} is not a {} file'.format(
            path, FORMAT_NAME))
    if header.get('version') != FORMAT_VERSION:
        raise errors.FormatError(
            'unsupported checkpoint version {} in {}'.format(
                header.get('version'), path))
    if header.get('kind') != kind:
        raise errors.FormatError('{} holds a {} checkpoint, expected {}'.format(
            path, header.get('kind'), kind))
    if header.get('dtype') != DTYPE:
        raise errors.FormatError('unsupported parameter dtype {}'.format(
            header.get('dtype')))
    parameters = header.get('parameters')
    if not isinstance(parameters, list) or not all(
            isinstance(p, dict) and 'name' in p and 'shape' in p
            for p in parameters):
        raise errors.FormatError(
            'malformed parameter list in {}'.format(path))
    return header


def load_checkpoint(path, kind, build_model):
    """Rebuild a model from a checkpoint.

    Args:
        path: String.
        kind: String. Expected checkpoint kind.
        build_model: Callable taking the validated header and returning a
            torch.nn.Module whose state_dict matches the declared parameters.

    Returns:
        model, header.

    Raises:
        errors.FormatError: Invalid header, or declared parameters that do not
            match the rebuilt model or the stored arrays.
    """
    header = read_header(path, kind)
    model = build_model(header)
    expected = model.state_dict()
    declared = header['parameters']
    names = [p['name'] for p in declared]
    if names != list(expected.keys()):
        raise errors.FormatError(
            'parameter names in {} do not match the architecture'.format(path))

    state = collections.OrderedDict()
    with np.load(path, allow_pickle=False) as archive:
        for i, p in enumerate(declared):
            key = _param_key(i)
            if key not in archive.files:
                raise errors.FormatError('missing tensor {} ({}) in {}'.format(
                    key, p['name'], path))
            array = archive[key]
            target = expected[p['name']]
            if (list(array.shape) != list(p['shape']) or
                    tuple(array.shape) != tuple(target.shape)):
                raise errors.FormatError(
                    'tensor {} has shape {}, expected {}'.format(
                        p['name'], list(array.shape), list(target.shape)))
            state[p['name']] = torch.from_numpy(
                array.astype(np.float32)).to(target.dtype)
    model.load_state_dict(state)
    model.eval()
    logging.info('Loaded {} checkpoint from {}.'.format(kind, path))
    return model, header
