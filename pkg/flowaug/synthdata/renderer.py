"""Python Image Library (PIL/Pillow) renderer for subgroup-annotated images.

An example is a flat-colored foreground shape (the class signal) over a
jittered background fill drawn from a color group (the spurious signal). The
shape is rasterized without anti-aliasing so that the foreground pixels do not
depend on the background at all.
"""

from dm_env import specs
import numpy as np
from PIL import Image
from PIL import ImageDraw

from flowaug import errors
from . import palettes
from . import shapes


class ExampleRenderer(object):
    """Render (class_label, bg_group, jitter_seed) triples as images."""

    def __init__(self,
                 palette,
                 class_shapes,
                 image_size=(32, 32),
                 foreground_rgb=palettes.DEFAULT_FOREGROUND_RGB,
                 coverage_range=(0.25, 0.45),
                 max_extent=0.95):
        """Construct renderer.

        Args:
            palette: Instance of palettes.Palette.
            class_shapes: Sequence of keys of shapes.SHAPES. Class c renders
                class_shapes[c].
            image_size: Int tuple (height, width).
            foreground_rgb: 3-tuple of ints in [0, 255]. Foreground fill.
            coverage_range: Float tuple. Range from which the target fraction
                of foreground pixels is drawn.
            max_extent: Float. Largest width/height of a shape as a fraction of
                the frame.
        """
        for name in class_shapes:
            if name not in shapes.SHAPES:
                raise errors.InvalidArgumentError(
                    'unknown shape {!r}; available {}'.format(
                        name, sorted(shapes.SHAPES)))
        self._palette = palette
        self._class_shapes = tuple(class_shapes)
        self._image_size = tuple(image_size)
        self._foreground = np.array(foreground_rgb, dtype=np.uint8)
        self._coverage_range = coverage_range
        self._max_extent = max_extent

        self._observation_spec = specs.BoundedArray(
            shape=self._image_size + (3,), dtype=np.float32,
            minimum=0., maximum=1., name='image')

    @property
    def num_classes(self):
        return len(self._class_shapes)

    @property
    def palette(self):
        return self._palette

    def _check_class(self, class_label):
        if not 0 <= int(class_label) < self.num_classes:
            raise errors.InvalidArgumentError(
                'class label {} out of range [0, {})'.format(
                    class_label, self.num_classes))

    def mask(self, class_label, jitter_seed):
        """Foreground mask of an example.

        Depends only on the class label and the jitter seed, never on the
        background group.

        Returns:
            Boolean numpy array of shape image_size.
        """
        self._check_class(class_label)
        rng = np.random.default_rng([int(jitter_seed), 0])
        vertices = shapes.SHAPES[self._class_shapes[int(class_label)]]

        coverage = rng.uniform(*self._coverage_range)
        scale = np.sqrt(coverage / shapes.polygon_area(vertices))
        extent = vertices.max(axis=0) - vertices.min(axis=0)
        scale = min(scale, self._max_extent / extent.max())
        vertices = scale * vertices

        # Place the shape so its bounding box stays inside the frame
        low = -vertices.min(axis=0)
        high = 1. - vertices.max(axis=0)
        center = rng.uniform(low, high)
        vertices = vertices + center

        height, width = self._image_size
        canvas = Image.new('L', (width, height), 0)
        draw = ImageDraw.Draw(canvas)
        pixels = vertices * np.array([width, height])
        draw.polygon([tuple(v) for v in pixels], fill=255)
        return np.array(canvas) > 0

    def render_uint8(self, class_label, bg_group, jitter_seed):
        """Render an example as a uint8 array of shape image_size + (3,)."""
        self._check_class(class_label)
        self._palette.check_index(bg_group, allow_others=False)
        mask = self.mask(class_label, jitter_seed)
        rng = np.random.default_rng([int(jitter_seed), 1])
        background = self._palette.sample_background(
            int(bg_group), rng, self._image_size)
        return np.where(mask[..., None], self._foreground, background)

    def __call__(self, class_label, bg_group, jitter_seed):
        """Render an example.

        Args:
            class_label: Int in [0, num_classes).
            bg_group: Int. Palette index of a named color (not "others").
            jitter_seed: Non-negative int. Seeds shape placement/scale and the
                background jitter.

        Returns:
            Numpy float32 array of shape image_size + (3,) with values k / 255.
        """
        image = self.render_uint8(class_label, bg_group, jitter_seed)
        return image.astype(np.float32) / np.float32(255.)

    def observation_spec(self):
        return self._observation_spec
