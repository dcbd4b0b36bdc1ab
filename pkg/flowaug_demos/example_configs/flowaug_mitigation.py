"""FlowAug against standard training and pixel-space baselines.

Same biased data as subgroup_discrepancy. A decoupled flow is trained on the
training split, then every method trains one classifier per seed. FlowAug
perturbs the global code with a truncated Gaussian (mu=0, sigma=0.1, b=4) or
mixes the global codes of two images, so backgrounds vary while shapes stay.

Level 0 compares standard, mixup, cutmix and the two FlowAug families. Level 1
adds the objectives that also use untransformed images and the lambda2 grid
of the combined objective.
"""

from flowaug.synthdata import palettes
from flowaug.trainer import config as train_config_lib


def get_config(level=0):
    """Get experiment config."""

    dataset = {
        'num_classes': 4,
        'palette': list(palettes.DEFAULT_PALETTE[:6]),
        'n_train': 4000,
        'n_test': 1200,
        'rho': 0.95,
        'seed': 0,
    }

    flow = {
        'epochs': 20,
        'batch_size': 64,
        'learning_rate': 1e-3,
        'd_z': 64,
        'num_blocks': 8,
        'seed': 0,
    }

    train = {
        'epochs': 15,
        'batch_size': 128,
        'K': 1,
    }

    methods = [
        train_config_lib.STANDARD,
        train_config_lib.MIXUP,
        train_config_lib.CUTMIX,
        {'method': train_config_lib.FLOWAUG_GAUSS,
         'perturb': {'mu': 0., 'sigma': 0.1, 'bound': 4.}},
        {'method': train_config_lib.FLOWAUG_MIX,
         'mix': {'alpha': 1., 'tr': 0.5}},
    ]
    if level > 0:
        methods.append({'method': train_config_lib.FLOWAUG_PLUS_STD,
                        'lam': 1.})
        methods.append({'method': train_config_lib.FLOWAUG_GAUSS_CUTMIX})
        for lambda2 in train_config_lib.LAMBDA2_GRID:
            methods.append({
                'name': 'combine_lambda2_{}'.format(lambda2),
                'method': train_config_lib.COMBINE,
                'lambda1': 1.,
                'lambda2': lambda2,
            })

    config = {
        'name': 'flowaug_mitigation',
        'dataset': dataset,
        'flow': flow,
        'train': train,
        'methods': methods,
        'seeds': [0, 1, 2, 3, 4],
        'out_dir': 'runs/flowaug_mitigation',
    }
    return config
