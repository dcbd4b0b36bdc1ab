"""Flow checkpoints in the shared container format."""

from flowaug import checkpoints
from flowaug import errors
from . import flow_model

KIND = 'flow'


def save_flow(model, path, train_config=None):
    """Write a FlowModel with its architecture and preprocessing constants.

    Args:
        model: Instance of flow_model.FlowModel.
        path: String.
        train_config: Optional dict echoed in the header. Defaults to the
            config the model was trained with, if any.
    """
    if train_config is None:
        train_config = getattr(model, 'train_config', None)
    header = {
        'architecture': model.architecture,
        'preprocessing': model.preprocessing.to_dict(),
        'd_z': model.d_z,
        'config': train_config,
    }
    checkpoints.save_checkpoint(path, KIND, header, model.state_dict())


def _build(header):
    try:
        architecture = dict(header['architecture'])
        preprocessing = header['preprocessing']
        architecture['image_shape'] = tuple(architecture['image_shape'])
        if header['d_z'] != architecture['d_z']:
            raise errors.FormatError('d_z {} disagrees with architecture {}'
                                     .format(header['d_z'], architecture))
        return flow_model.FlowModel(
            epsilon=preprocessing['epsilon'],
            quants=preprocessing['quants'],
            **architecture)
    except (KeyError, TypeError, errors.InvalidArgumentError) as e:
        raise errors.FormatError('invalid flow architecture descriptor: {}'
                                 .format(e))


def load_flow(path):
    """Read a FlowModel written by save_flow, in eval mode."""
    model, header = checkpoints.load_checkpoint(path, KIND, _build)
    model.train_config = header.get('config')
    return model
