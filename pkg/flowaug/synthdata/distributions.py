"""Distributions over example factors.

A distribution draws a dict of factors, e.g. {'bg_group': 3}, from a numpy
Generator. The biased training background of a class is a Mixture of a point
mass on the class color and a uniform Discrete over all colors.
"""

import abc

import numpy as np


class AbstractDistribution(abc.ABC):
    """Base class of factor distributions."""

    @abc.abstractmethod
    def sample(self, rng):
        """Dict of factors drawn with the numpy Generator rng."""

    @property
    @abc.abstractmethod
    def keys(self):
        """Set of factor names this distribution draws."""


class Discrete(AbstractDistribution):
    """One factor taking finitely many values."""

    def __init__(self, key, candidates, probs=None):
        """Constructor.

        Args:
            key: String factor name.
            candidates: Sequence of values.
            probs: Optional probabilities of the candidates. Uniform if None.
        """
        self.key = key
        self.candidates = list(candidates)
        self.probs = None if probs is None else np.asarray(probs)

    def sample(self, rng):
        index = rng.choice(len(self.candidates), p=self.probs)
        return {self.key: self.candidates[index]}

    @property
    def keys(self):
        return {self.key}


class Mixture(AbstractDistribution):
    """Picks a component, then samples it.

    Overlapping supports are sampled with the summed weight of the components
    containing them.
    """

    def __init__(self, components, probs=None):
        """Constructor.

        Args:
            components: Sequence of distributions drawing the same keys.
            probs: Optional component weights. Uniform if None.
        """
        self.components = list(components)
        n = len(self.components)
        self.probs = (np.full(n, 1. / n) if probs is None
                      else np.asarray(probs, dtype=np.float64))
        self._keys = self.components[0].keys
        mismatched = [c.keys for c in self.components if c.keys != self._keys]
        if mismatched:
            raise ValueError('mixture components draw different keys: {} '
                             'and {}'.format(self._keys, mismatched[0]))

    def sample(self, rng):
        component = self.components[rng.choice(len(self.components),
                                                p=self.probs)]
        return component.sample(rng)

    @property
    def keys(self):
        return self._keys


def biased_background(class_color, colors, rho):
    """Training background distribution for one class.

    With probability rho the class's assigned color, otherwise uniform over
    colors (which includes the class color), so
    P(bg = class color) = rho + (1 - rho) / len(colors).

    Args:
        class_color: Int. Palette index assigned to the class.
        colors: Sequence of ints. Palette indices of the named colors.
        rho: Float in [0, 1]. Spurious-correlation strength.

    Returns:
        Instance of Mixture over the 'bg_group' key.
    """
    return Mixture(
        [Discrete('bg_group', [class_color]), Discrete('bg_group', colors)],
        probs=[rho, 1. - rho],
    )
