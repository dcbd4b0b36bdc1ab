"""Foreground shapes, one per class.

Every shape is an array of polygon vertices of shape [num_vertices, 2] centered
near the origin with circumradius about 1. The renderer rescales them to a
target pixel coverage, so only their proportions matter.
"""

import numpy as np


def polygon(num_sides, theta_0=0.):
    """Regular polygon with unit circumradius.

    Args:
        num_sides: Int. Number of sides.
        theta_0: Float. Angle of the first vertex, in radians.

    Returns:
        Numpy array of shape [num_sides, 2].
    """
    thetas = theta_0 + 2 * np.pi * np.arange(num_sides) / num_sides
    return np.stack([np.cos(thetas), np.sin(thetas)], axis=1)


def star(num_sides, inner_radius=0.5, theta_0=0.):
    """Star polygon alternating between radius 1 and inner_radius.

    Args:
        num_sides: Int. Number of points of the star.
        inner_radius: Float in (0, 1). Radius of the concave vertices.
        theta_0: Float. Angle of the first point, in radians.

    Returns:
        Numpy array of shape [2 * num_sides, 2].
    """
    outer = polygon(num_sides, theta_0=theta_0)
    inner = inner_radius * polygon(
        num_sides, theta_0=theta_0 + np.pi / num_sides)
    vertices = np.empty((2 * num_sides, 2))
    vertices[0::2] = outer
    vertices[1::2] = inner
    return vertices


def cross(arm_width=2. / 3):
    """Plus sign inscribed in [-1, 1] x [-1, 1]."""
    a = 0.5 * arm_width
    return np.array([
        [-a, -1.], [a, -1.], [a, -a], [1., -a], [1., a], [a, a],
        [a, 1.], [-a, 1.], [-a, a], [-1., a], [-1., -a], [-a, -a],
    ])


SHAPES = {
    'circle': polygon(num_sides=30),
    'square': polygon(num_sides=4, theta_0=np.pi / 4),
    'triangle': polygon(num_sides=3, theta_0=np.pi / 2),
    'cross': cross(),
    'star_5': star(num_sides=5, theta_0=np.pi / 2),
    'star_4': star(num_sides=4, theta_0=np.pi / 4, inner_radius=0.45),
    'pentagon': polygon(num_sides=5, theta_0=np.pi / 2),
    'hexagon': polygon(num_sides=6),
}

# Class c renders DEFAULT_CLASS_SHAPES[c]. Ordered so that small class counts
# use the most dissimilar shapes.
DEFAULT_CLASS_SHAPES = (
    'circle', 'square', 'triangle', 'cross',
    'star_5', 'star_4', 'pentagon', 'hexagon',
)


def polygon_area(vertices):
    """Area of a simple polygon by the shoelace formula."""
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * np.abs(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1)))
