"""Scalar measures of checkerboarding and grayness for a density field."""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class FieldMetrics:
    checkerboard_index: float
    gray_fraction: float
    volume_fraction: float


def checkerboard_index(mesh, rho):
    """Mean squared alternation over all 2x2 element blocks.

    For a block ``a b / c d`` the alternation is ``q = (a + d - b - c) / 2``.
    A straight solid/void interface gives ``q = 0``; a perfect 0/1 checkerboard
    gives ``q^2 = 1`` in every block.
    """
    if mesh.nelx < 2 or mesh.nely < 2:
        raise ParameterError(f"checkerboard index needs at least a 2x2 mesh, got {mesh.nelx}x{mesh.nely}")
    img = mesh.to_image(np.asarray(rho, dtype=float))
    a = img[:-1, :-1]
    b = img[:-1, 1:]
    c = img[1:, :-1]
    d = img[1:, 1:]
    q = 0.5 * (a + d - b - c)
    return float(np.mean(q * q))


def gray_fraction(rho, band=(0.1, 0.9)):
    """Share of elements with density strictly inside ``band``."""
    rho = np.asarray(rho, dtype=float)
    lo, hi = band
    return float(np.count_nonzero((rho > lo) & (rho < hi)) / rho.size)


def field_metrics(mesh, rho, band=(0.1, 0.9)):
    rho = np.asarray(rho, dtype=float)
    return FieldMetrics(
        checkerboard_index=checkerboard_index(mesh, rho),
        gray_fraction=gray_fraction(rho, band),
        volume_fraction=float(rho.sum() / rho.size),
    )


def verify_partition_of_unity(kernel):
    """Largest deviation of a normalized weight row sum from one."""
    h = kernel.normalized_weights()
    sums = np.add.reduceat(h, kernel.indptr[:-1])
    return float(np.max(np.abs(sums - 1.0)))


def downsample(mesh, rho, nelx, nely):
    """Block-average a field onto a coarser ``nelx x nely`` grid (integer ratios only)."""
    fx, rx = divmod(mesh.nelx, nelx)
    fy, ry = divmod(mesh.nely, nely)
    if rx or ry or fx < 1 or fy < 1:
        raise ParameterError(f"cannot block-downsample {mesh.nelx}x{mesh.nely} to {nelx}x{nely}")
    img = mesh.to_image(np.asarray(rho, dtype=float))
    return img.reshape(nely, fy, nelx, fx).mean(axis=(1, 3))
