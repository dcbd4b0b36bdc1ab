"""Perturbing the local code instead of the global code.

The same truncated-Gaussian perturbation is applied either to z or to nu.
Since nu carries the shape of the object, perturbing it damages the content
the classifier needs, and total accuracy drops.

Level 1 uses the uniform perturbation U(-0.2, 0.2) instead.
"""

from flowaug.augment import perturbations
from flowaug.synthdata import palettes
from flowaug.trainer import config as train_config_lib


def get_config(level=0):
    """Get experiment config."""

    if level == 0:
        perturb = {'distribution': perturbations.TRUNC_GAUSSIAN,
                   'mu': 0., 'sigma': 0.1, 'bound': 4.}
    else:
        perturb = {'distribution': perturbations.UNIFORM,
                   'low': -0.2, 'high': 0.2}

    methods = []
    for target in perturbations.TARGETS:
        methods.append({
            'name': 'flowaug_gauss_{}'.format(target),
            'method': train_config_lib.FLOWAUG_GAUSS,
            'perturb': dict(perturb, target=target),
        })

    config = {
        'name': 'nu_vs_z_ablation',
        'dataset': {
            'num_classes': 4,
            'palette': list(palettes.DEFAULT_PALETTE[:6]),
            'n_train': 4000,
            'n_test': 1200,
            'rho': 0.95,
            'seed': 0,
        },
        'flow': {'epochs': 20, 'seed': 0},
        'train': {'epochs': 15},
        'methods': methods,
        'seeds': [0, 1, 2, 3, 4],
        'out_dir': 'runs/nu_vs_z_ablation',
    }
    return config
