"""Subgroup discrepancy of standard training under spurious backgrounds.

Four shape classes, six background colors. Training backgrounds follow the
class color with probability rho; the test split is balanced over all
(class, color) cells. A classifier with high total accuracy can still fail on
the backgrounds it rarely saw with a class, which shows up as a large worst
subgroup gap and macro std. Compare with rho=0 by passing --level=1.

Level 0 trains on the biased data, level 1 on unbiased data.
"""

from flowaug.synthdata import palettes
from flowaug.trainer import config as train_config_lib


def get_config(level=0):
    """Get experiment config."""

    rho = 0.95 if level == 0 else 0.

    ############################################################################
    # Data
    ############################################################################

    dataset = {
        'num_classes': 4,
        'palette': list(palettes.DEFAULT_PALETTE[:6]),
        'n_train': 4000,
        'n_test': 1200,
        'rho': rho,
        'seed': 0,
        'image_size': 32,
    }

    ############################################################################
    # Classifier
    ############################################################################

    train = {
        'epochs': 15,
        'batch_size': 128,
        'widths': [16, 32, 64, 128],
    }

    ############################################################################
    # Final config
    ############################################################################

    config = {
        'name': 'subgroup_discrepancy_rho{}'.format(rho),
        'dataset': dataset,
        'train': train,
        'methods': [train_config_lib.STANDARD],
        'seeds': [0, 1, 2, 3, 4],
        'out_dir': 'runs/subgroup_discrepancy_rho{}'.format(rho),
    }
    return config
