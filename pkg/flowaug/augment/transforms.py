"""FlowAug transforms in the space of the decoupled flow.

Every transform encodes its inputs with the posterior mean, edits the codes and
decodes. Labels are never touched: callers keep the source image's label.

Example usage:
    ```python
    rng = np.random.default_rng(0)
    spec = perturbations.PerturbSpec(sigma=0.2)
    x_aug = transforms.augment_gaussian(model, x, spec, rng)
    x_mix = transforms.augment_mix(model, x1, x2, perturbations.MixSpec(), rng)
    ```

All functions accept one image [H, W, 3] or a batch [N, H, W, 3].
"""

import numpy as np

from flowaug import errors
from flowaug.flowcore import flow_model
from . import perturbations


def perturb_codes(z, nu, spec, rng):
    """Apply a PerturbSpec to the targeted code, returning (z, nu)."""
    if spec.target == perturbations.GLOBAL_Z:
        return spec.apply(z, rng), nu
    return z, spec.apply(nu, rng)


def mix_codes(z1, nu1, z2, nu2, m, target):
    """Interpolate codes with weight m on the first image.

    Args:
        z1, nu1, z2, nu2: Codes of the two images, batched alike.
        m: Float or array [N] of (flipped) weights.
        target: 'global_z' or 'local_nu'.

    Returns:
        (z, nu) with the first image's other code retained.
    """
    m = np.asarray(m, dtype=np.float32)
    if target == perturbations.GLOBAL_Z:
        w = m.reshape(m.shape + (1,) * (z1.ndim - m.ndim))
        return w * z1 + (1. - w) * z2, nu1
    w = m.reshape(m.shape + (1,) * (nu1.ndim - m.ndim))
    return z1, w * nu1 + (1. - w) * nu2


def augment_gaussian(model, x, spec, rng):
    """Transform family T1: decode after perturbing one code.

    Args:
        model: Instance of flow_model.FlowModel.
        x: Image or batch with values in [0, 1].
        spec: Instance of perturbations.PerturbSpec.
        rng: numpy Generator. Perturbations are i.i.d. per coordinate.

    Returns:
        Float32 array shaped like x with values in [0, 1].
    """
    spec.validate()
    z, nu = flow_model.encode(model, x)
    z, nu = perturb_codes(z, nu, spec, rng)
    return flow_model.decode(model, z, nu)


def augment_mix(model, x1, x2, spec, rng, m=None):
    """Transform family T2: interpolate the codes of two images.

    The weight m ~ Beta(alpha, alpha) is mirrored to 1 - m when m < tr, so the
    first image, whose other code is retained, always keeps at least half the
    weight for tr = 0.5.

    Args:
        model: Instance of flow_model.FlowModel.
        x1: Image or batch. Donor of the retained code.
        x2: Image or batch shaped like x1.
        spec: Instance of perturbations.MixSpec.
        rng: numpy Generator.
        m: Optional float or array [N] overriding the Beta draw. The flip rule
            is still applied.

    Returns:
        Float32 array shaped like x1 with values in [0, 1].
    """
    spec.validate()
    if np.shape(x1) != np.shape(x2):
        raise errors.InvalidArgumentError(
            'x1 and x2 must have the same shape, got {} and {}'.format(
                np.shape(x1), np.shape(x2)))
    size = None if np.ndim(x1) == 3 else np.shape(x1)[0]
    if m is None:
        m = spec.sample_weight(rng, size=size)
    else:
        m = perturbations.flip_mix_weight(m, spec.tr)
    z1, nu1 = flow_model.encode(model, x1)
    z2, nu2 = flow_model.encode(model, x2)
    z, nu = mix_codes(z1, nu1, z2, nu2, m, spec.target)
    return flow_model.decode(model, z, nu)


def switch(model, x1, x2):
    """Decode the global code of x2 with the local code of x1."""
    if np.shape(x1) != np.shape(x2):
        raise errors.InvalidArgumentError(
            'x1 and x2 must have the same shape, got {} and {}'.format(
                np.shape(x1), np.shape(x2)))
    _, nu1 = flow_model.encode(model, x1)
    z2, _ = flow_model.encode(model, x2)
    return flow_model.decode(model, z2, nu1)


def reconstruct(model, x):
    """decode(encode(x)) with the posterior mean."""
    z, nu = flow_model.encode(model, x)
    return flow_model.decode(model, z, nu)
