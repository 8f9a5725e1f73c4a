"""Multilayer multidimensional prediction stencils.

A stencil with ``layers`` n and ``ndim`` d predicts a point from the cube of
preceding neighbours at offsets (k_1..k_d), 0 <= k_j <= n, excluding the point
itself.  The coefficient at an offset is

    -prod_j (-1)^k_j * C(n, k_j)

which makes the predicted value the unique evaluation consistent with a
surface fit through the neighbour cube: the prediction is exact on any
polynomial whose degree in every dimension is below n (in particular on all
polynomials of total degree <= 2n - 1 in two dimensions), and the
coefficients always sum to 1 so constant fields are reproduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import comb

import numpy as np

from .core import MAX_NDIM


@dataclass(frozen=True)
class PredictorStencil:
    """Cube of prediction coefficients: ((k_1..k_d), coefficient) pairs.

    Terms are ordered lexicographically by offset vector, which fixes the
    floating-point summation order used everywhere.
    """

    layers: int
    ndim: int
    terms: tuple[tuple[tuple[int, ...], int], ...]


@lru_cache(maxsize=None)
def build_stencil(layers: int, ndim: int) -> PredictorStencil:
    """Construct the stencil for a layer count and dimensionality."""
    if layers < 1:
        raise ValueError(f"layers must be >= 1, got {layers}")
    if not 1 <= ndim <= MAX_NDIM:
        raise ValueError(f"ndim must be 1..{MAX_NDIM}, got {ndim}")
    terms = []
    for offsets in product(range(layers + 1), repeat=ndim):
        if not any(offsets):
            continue
        c = 1
        for k in offsets:
            c *= (-1) ** k * comb(layers, k)
        terms.append((offsets, -c))
    return PredictorStencil(layers, ndim, tuple(terms))


def predict(stencil: PredictorStencil, values: np.ndarray, coord) -> float:
    """Predict the value at ``coord`` from preceding entries of ``values``.

    ``values`` is indexed highest dimension first (C order, as from
    ``DataGrid.to_array``); ``coord`` lists indices lowest dimension first.
    Near the low boundary the stencil degrades gracefully: dimensions at
    index 0 are dropped, the layer count shrinks to the deepest offset that
    stays in range, and the all-zero corner predicts 0.0.
    """
    coord = tuple(int(c) for c in coord)
    if len(coord) != stencil.ndim:
        raise ValueError(f"coordinate has {len(coord)} axes, stencil {stencil.ndim}")
    if any(c < 0 for c in coord):
        raise ValueError(f"negative coordinate {coord}")
    active = [axis for axis, c in enumerate(coord) if c > 0]
    if not active:
        return 0.0
    eff_layers = min(stencil.layers, min(coord[axis] for axis in active))
    if eff_layers == stencil.layers and len(active) == stencil.ndim:
        reduced = stencil
    else:
        reduced = build_stencil(eff_layers, len(active))
    total = 0.0
    for offsets, coefficient in reduced.terms:
        index = list(coord)
        for pos, axis in enumerate(active):
            index[axis] -= offsets[pos]
        total += coefficient * float(values[tuple(reversed(index))])
    return total
