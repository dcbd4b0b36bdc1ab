"""Background color groups.

A palette is an ordered set of named color groups plus the mandatory "others"
category, which is always last. Each named group owns a box in HSV space from
which synthetic backgrounds are drawn. Ingested annotation files only need the
names, so a palette may carry groups without a color region as long as nothing
is rendered from them.
"""

import collections

from matplotlib import colors as mcolors
import numpy as np

from flowaug import errors

OTHERS = 'others'

BackgroundGroup = collections.namedtuple('BackgroundGroup', ['name', 'index'])

# Hue, saturation and value intervals, each (low, high) in [0, 1]. Hue
# intervals may extend below 0 or above 1 and are wrapped after sampling.
ColorRegion = collections.namedtuple(
    'ColorRegion', ['hue', 'saturation', 'value'])

DEFAULT_COLOR_REGIONS = collections.OrderedDict([
    ('blue', ColorRegion((0.58, 0.66), (0.65, 1.0), (0.65, 1.0))),
    ('green', ColorRegion((0.28, 0.38), (0.65, 1.0), (0.5, 0.9))),
    ('red', ColorRegion((-0.02, 0.02), (0.7, 1.0), (0.65, 1.0))),
    ('yellow', ColorRegion((0.13, 0.17), (0.7, 1.0), (0.8, 1.0))),
    ('white', ColorRegion((0.0, 1.0), (0.0, 0.08), (0.9, 1.0))),
    ('black', ColorRegion((0.0, 1.0), (0.0, 0.3), (0.0, 0.15))),
    ('gray', ColorRegion((0.0, 1.0), (0.0, 0.08), (0.4, 0.6))),
    ('brown', ColorRegion((0.05, 0.1), (0.55, 0.8), (0.3, 0.5))),
])

DEFAULT_PALETTE = tuple(DEFAULT_COLOR_REGIONS.keys())

# Magenta lies outside every default region: its hue is far from all chromatic
# groups and its saturation excludes the achromatic ones.
DEFAULT_FOREGROUND_RGB = (230, 25, 230)

# Half-widths of the per-pixel jitter around an image's base color.
_PIXEL_JITTER = np.array([0.01, 0.04, 0.04])


def hsv_to_rgb(hsv):
    """Convert HSV array with trailing axis of size 3 to uint8 RGB."""
    rgb = mcolors.hsv_to_rgb(np.clip(hsv, 0., 1.))
    return np.round(255 * rgb).astype(np.uint8)


def rgb_to_hsv(rgb):
    """Convert uint8 or unit-interval RGB array to HSV in [0, 1]."""
    rgb = np.asarray(rgb)
    if rgb.dtype == np.uint8:
        rgb = rgb.astype(np.float64) / 255.
    return mcolors.rgb_to_hsv(rgb)


class Palette(object):
    """Ordered background color groups, "others" last."""

    def __init__(self, names=DEFAULT_PALETTE, regions=None, aliases=None):
        """Constructor.

        Args:
            names: Iterable of lowercase color names, not including "others".
                Order defines group indices.
            regions: Optional dict from name to ColorRegion. Names missing here
                fall back to DEFAULT_COLOR_REGIONS; names with no region at all
                cannot be rendered.
            aliases: Optional dict mapping alternative spellings (e.g. 'grey')
                to palette names. Used when resolving ingested annotations.
        """
        names = [str(n) for n in names]
        if len(names) < 2:
            raise errors.InvalidArgumentError(
                'palette needs at least 2 named colors, got {}'.format(names))
        if len(set(names)) != len(names):
            raise errors.InvalidArgumentError(
                'palette names must be unique, got {}'.format(names))
        for name in names:
            if name != name.lower() or name == OTHERS:
                raise errors.InvalidArgumentError(
                    'invalid palette color name {!r}'.format(name))

        self._names = tuple(names) + (OTHERS,)
        regions = dict(regions or {})
        self._regions = {
            name: regions.get(name, DEFAULT_COLOR_REGIONS.get(name))
            for name in names
        }
        self._aliases = dict(aliases or {})
        self._index = {name: i for i, name in enumerate(self._names)}

    @property
    def names(self):
        """All group names, "others" included."""
        return self._names

    @property
    def color_names(self):
        """Group names without "others"."""
        return self._names[:-1]

    @property
    def num_colors(self):
        return len(self._names) - 1

    @property
    def others_index(self):
        return len(self._names) - 1

    @property
    def groups(self):
        return tuple(BackgroundGroup(n, i) for i, n in enumerate(self._names))

    def __len__(self):
        return len(self._names)

    def __eq__(self, other):
        return isinstance(other, Palette) and self._names == other._names

    def __repr__(self):
        return 'Palette({})'.format(list(self.color_names))

    def resolve(self, name):
        """Map a (possibly aliased) group name to its index, or None."""
        name = str(name).strip().lower()
        name = self._aliases.get(name, name)
        return self._index.get(name)

    def index(self, name):
        """Index of a group name, raising InvalidArgumentError if unknown."""
        i = self.resolve(name)
        if i is None:
            raise errors.InvalidArgumentError(
                'unknown background group {!r}; palette is {}'.format(
                    name, list(self._names)))
        return i

    def name(self, index):
        self.check_index(index)
        return self._names[index]

    def check_index(self, index, allow_others=True):
        upper = len(self._names) if allow_others else self.num_colors
        if not 0 <= int(index) < upper:
            raise errors.InvalidArgumentError(
                'background group {} out of range [0, {})'.format(
                    index, upper))

    def region(self, index):
        """ColorRegion of a named group."""
        self.check_index(index, allow_others=False)
        region = self._regions[self._names[index]]
        if region is None:
            raise errors.InvalidArgumentError(
                'color group {!r} has no color region and cannot be '
                'rendered'.format(self._names[index]))
        return region

    def sample_background(self, index, rng, size):
        """Sample a jittered background fill for a color group.

        A base color is drawn uniformly from the group's HSV box, then every
        pixel is perturbed around it and clipped back into the box, so all
        background pixels stay inside the group's color region.

        Args:
            index: Int. Group index (not "others").
            rng: numpy Generator.
            size: (height, width) tuple.

        Returns:
            uint8 array of shape size + (3,).
        """
        region = self.region(index)
        low = np.array([region.hue[0], region.saturation[0], region.value[0]])
        high = np.array([region.hue[1], region.saturation[1], region.value[1]])
        base = rng.uniform(low, high)
        jitter = rng.uniform(-1., 1., size=tuple(size) + (3,)) * _PIXEL_JITTER
        hsv = np.clip(base + jitter, low, high)
        hsv[..., 0] = np.mod(hsv[..., 0], 1.)
        return hsv_to_rgb(hsv)

    def to_dict(self):
        return {'names': list(self.color_names), 'aliases': dict(self._aliases)}

    @classmethod
    def from_dict(cls, d):
        return cls(names=d['names'], aliases=d.get('aliases'))
