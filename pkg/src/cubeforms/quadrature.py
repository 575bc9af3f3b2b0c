"""Tensor-product Gauss-Legendre quadrature on unit cubes."""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np


@lru_cache(maxsize=None)
def gauss_unit_interval(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of the n-point Gauss rule mapped to [0, 1]."""
    if order < 1:
        raise ValueError(f"need at least one quadrature point, got {order}")
    x, w = np.polynomial.legendre.leggauss(order)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@lru_cache(maxsize=None)
def gauss_unit_cube(dimension: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor rule on [0, 1]^d: points (order^d, d) and matching weights.

    A zero-dimensional cube degenerates to a single point with weight 1.
    """
    if dimension == 0:
        pts = np.zeros((1, 0))
        wts = np.ones(1)
    else:
        x, w = gauss_unit_interval(order)
        pts = np.array(list(product(x, repeat=dimension)))
        wts = w
        for _ in range(dimension - 1):
            wts = np.multiply.outer(wts, w)
        wts = wts.ravel()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts
