"""Distance-weighted neighbourhood filter on the element grid.

Weights are ``H_ij = rmin - dist(i, j)`` for element centers within ``rmin``
(boundary elements simply have fewer neighbours). Normalizing each row by its
sum makes the weights a partition of unity, so constant fields pass through
unchanged while element-scale oscillations are averaged out.
"""
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ParameterError

RHO_FLOOR = 1e-3


@dataclass(frozen=True)
class FilterKernel:
    """Immutable CSR neighbour structure; row ``i`` lists ``N(i)`` and ``H_ij``."""

    nelx: int
    nely: int
    rmin: float
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    row_sums: np.ndarray

    @property
    def n_elem(self):
        return self.nelx * self.nely

    def neighbors(self, i):
        sl = slice(self.indptr[i], self.indptr[i + 1])
        return self.indices[sl], self.weights[sl]

    def normalized_weights(self):
        counts = np.diff(self.indptr)
        return self.weights / np.repeat(self.row_sums, counts)

    def _check(self, x, name):
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.n_elem,):
            raise ParameterError(f"{name} must have length {self.n_elem}, got shape {x.shape}")
        return x


def build_kernel(mesh, rmin):
    """Precompute neighbour lists and weights for radius ``rmin`` (element-edge units)."""
    rmin = float(rmin)
    if not rmin > 0:
        raise ParameterError(f"filter radius must be positive, got {rmin}")
    indptr, indices, weights = _backend.neighbor_lists(mesh.nelx, mesh.nely, rmin)
    for arr in (indptr, indices, weights):
        arr.setflags(write=False)
    row_sums = _backend.weighted_sum(indptr, indices, weights, np.ones(mesh.n_elem))
    row_sums.setflags(write=False)
    return FilterKernel(mesh.nelx, mesh.nely, rmin, indptr, indices, weights, row_sums)


def filter_sensitivities(kernel, rho, dc, rho_floor=RHO_FLOOR):
    """Density-weighted sensitivity average.

    ``out[i] = sum_j H_ij rho_j dc_j / (max(rho_i, rho_floor) * sum_j H_ij)``
    """
    rho = kernel._check(rho, "rho")
    dc = kernel._check(dc, "dc")
    num = _backend.weighted_sum(kernel.indptr, kernel.indices, kernel.weights, rho * dc)
    return num / (np.maximum(rho, rho_floor) * kernel.row_sums)


def filter_field(kernel, alpha):
    """Plain weighted average ``sum_j H_ij alpha_j / sum_j H_ij``."""
    alpha = kernel._check(alpha, "alpha")
    return _backend.weighted_sum(kernel.indptr, kernel.indices, kernel.weights, alpha) / kernel.row_sums
