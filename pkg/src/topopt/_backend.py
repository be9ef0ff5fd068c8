"""Kernel backend selection.

The compiled extension is preferred. Set ``TOPOPT_BACKEND=python`` to force
the NumPy fallback (useful for debugging and for the benchmark comparison).
"""
import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("TOPOPT_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def neighbor_lists(nelx, nely, rmin):
    return kernels.neighbor_lists(int(nelx), int(nely), float(rmin))


def weighted_sum(indptr, indices, weights, x):
    return kernels.weighted_sum(indptr, indices, weights, x)


def element_energy(edof, u, k0):
    return kernels.element_energy(edof, u, k0)
