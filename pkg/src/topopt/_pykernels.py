"""NumPy implementations of the inner-loop kernels.

Used when the compiled ``_ckernels`` extension is unavailable, or when
``TOPOPT_BACKEND=python`` is set. Signatures mirror ``_ckernels.pyx``.
"""
import math

import numpy as np


def neighbor_lists(nelx, nely, rmin):
    """CSR neighbor structure of the element grid within radius ``rmin``.

    Returns ``(indptr, indices, weights)`` with ``weights = rmin - dist``.
    Rows are element indices ``ex * nely + ey``; columns within a row are sorted.
    """
    reach = int(math.floor(rmin))
    ex, ey = np.divmod(np.arange(nelx * nely, dtype=np.int64), nely)
    rows, cols, wts = [], [], []
    for dx in range(-reach, reach + 1):
        for dy in range(-reach, reach + 1):
            d = math.sqrt(dx * dx + dy * dy)
            if d > rmin:
                continue
            jx, jy = ex + dx, ey + dy
            ok = (jx >= 0) & (jx < nelx) & (jy >= 0) & (jy < nely)
            rows.append(np.flatnonzero(ok))
            cols.append(jx[ok] * nely + jy[ok])
            wts.append(np.full(int(ok.sum()), rmin - d))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    wts = np.concatenate(wts)
    order = np.lexsort((cols, rows))
    indptr = np.zeros(nelx * nely + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=nelx * nely), out=indptr[1:])
    return indptr, cols[order].astype(np.int64), wts[order]


def weighted_sum(indptr, indices, weights, x):
    """``y[i] = sum_j weights[ij] * x[j]`` over the CSR row of ``i``."""
    # every row holds at least the diagonal entry, so reduceat never sees an empty segment
    return np.add.reduceat(weights * x[indices], indptr[:-1])


def element_energy(edof, u, k0):
    """``e[i] = u_i^T k0 u_i`` with ``u_i = u[edof[i]]``."""
    ue = u[edof]
    return np.sum((ue @ k0) * ue, axis=1)
