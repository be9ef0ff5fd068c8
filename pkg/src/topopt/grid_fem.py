"""Plane-stress bilinear quadrilaterals on a regular grid of unit squares.

Numbering is column-major with the origin at the top-left corner and the
node row index growing downward::

    node (x, y)      -> x * (nely + 1) + y
    element (ex, ey) -> ex * nely + ey
    dofs of node n   -> 2n (horizontal, +right), 2n + 1 (vertical, +up)

Element DOFs are ordered counter-clockwise starting at the lower-left node
(lower-left, lower-right, upper-right, upper-left), matching the classic
99/88-line element matrix.
"""
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _backend
from .errors import NumericalError, ParameterError, StructuralError

SOLVE_RTOL = 1e-8


@dataclass(frozen=True)
class GridMesh:
    nelx: int
    nely: int

    def __post_init__(self):
        if int(self.nelx) < 1 or int(self.nely) < 1:
            raise ParameterError(f"mesh needs at least one element per side, got {self.nelx}x{self.nely}")
        object.__setattr__(self, "nelx", int(self.nelx))
        object.__setattr__(self, "nely", int(self.nely))

    @property
    def n_elem(self):
        return self.nelx * self.nely

    @property
    def n_nodes(self):
        return (self.nelx + 1) * (self.nely + 1)

    @property
    def n_dofs(self):
        return 2 * self.n_nodes

    def node(self, x, y):
        """Node index at grid position ``(x, y)``, ``y`` counted downward from the top."""
        if not (0 <= x <= self.nelx and 0 <= y <= self.nely):
            raise ParameterError(f"node ({x}, {y}) outside {self.nelx}x{self.nely} grid")
        return x * (self.nely + 1) + y

    def element(self, ex, ey):
        return ex * self.nely + ey

    @cached_property
    def edof(self):
        """(n_elem, 8) int64 array of element DOF indices."""
        ex, ey = np.divmod(np.arange(self.n_elem, dtype=np.int64), self.nely)
        n1 = (self.nely + 1) * ex + ey  # upper-left
        n2 = (self.nely + 1) * (ex + 1) + ey  # upper-right
        edof = np.column_stack([
            2 * n1 + 2, 2 * n1 + 3,
            2 * n2 + 2, 2 * n2 + 3,
            2 * n2, 2 * n2 + 1,
            2 * n1, 2 * n1 + 1,
        ])
        edof.setflags(write=False)
        return np.ascontiguousarray(edof)

    @cached_property
    def centers(self):
        """(n_elem, 2) element centers ``(ex + 0.5, ey + 0.5)``."""
        ex, ey = np.divmod(np.arange(self.n_elem), self.nely)
        return np.column_stack([ex + 0.5, ey + 0.5])

    @cached_property
    def node_coords(self):
        """(n_nodes, 2) node positions ``(x, y)`` with ``y`` downward."""
        x, y = np.divmod(np.arange(self.n_nodes), self.nely + 1)
        return np.column_stack([x, y]).astype(float)

    def to_image(self, values):
        """Reshape a per-element vector into a ``(nely, nelx)`` array, top row first."""
        values = np.asarray(values)
        if values.shape != (self.n_elem,):
            raise ParameterError(f"expected {self.n_elem} element values, got shape {values.shape}")
        return values.reshape(self.nelx, self.nely).T

    def from_image(self, image):
        image = np.asarray(image)
        if image.shape != (self.nely, self.nelx):
            raise ParameterError(f"expected image of shape {(self.nely, self.nelx)}, got {image.shape}")
        return np.ascontiguousarray(image.T).reshape(-1)


@dataclass(frozen=True)
class ElastParams:
    E0: float = 1.0
    Emin: float = None
    nu: float = 0.3
    p: float = 3.0

    def __post_init__(self):
        if self.Emin is None:
            object.__setattr__(self, "Emin", 1e-9 * self.E0)
        if not self.E0 > 0:
            raise ParameterError(f"E0 must be positive, got {self.E0}")
        if not 0 < self.Emin < self.E0:
            raise ParameterError(f"need 0 < Emin < E0, got Emin={self.Emin}, E0={self.E0}")
        if not 0 <= self.nu < 0.5:
            raise ParameterError(f"Poisson ratio must lie in [0, 0.5), got {self.nu}")
        if not self.p >= 1:
            raise ParameterError(f"penalization exponent must be >= 1, got {self.p}")

    def modulus(self, rho):
        """Modified-SIMP interpolation ``Emin + rho^p (E0 - Emin)``."""
        return self.Emin + np.asarray(rho, dtype=float) ** self.p * (self.E0 - self.Emin)


@dataclass
class LoadCase:
    fixed_dofs: np.ndarray
    loads: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fixed_dofs = np.unique(np.asarray(self.fixed_dofs, dtype=np.int64))
        self.loads = {int(k): float(v) for k, v in self.loads.items()}
        clash = set(self.fixed_dofs.tolist()) & {k for k, v in self.loads.items() if v != 0.0}
        if clash:
            raise ParameterError(f"DOFs both fixed and loaded: {sorted(clash)}")

    def scaled(self, factor):
        return LoadCase(self.fixed_dofs.copy(), {k: factor * v for k, v in self.loads.items()})

    def force_vector(self, n_dofs):
        f = np.zeros(n_dofs)
        for dof, value in self.loads.items():
            if not 0 <= dof < n_dofs:
                raise ParameterError(f"loaded DOF {dof} out of range")
            f[dof] += value
        return f

    def free_dofs(self, n_dofs):
        if self.fixed_dofs.size and (self.fixed_dofs[0] < 0 or self.fixed_dofs[-1] >= n_dofs):
            raise ParameterError("fixed DOF index out of range")
        return np.setdiff1d(np.arange(n_dofs, dtype=np.int64), self.fixed_dofs)


def check_restraints(mesh, lc):
    """Raise :class:`StructuralError` unless the fixed DOFs suppress all three rigid-body modes."""
    xy = mesh.node_coords
    modes = np.zeros((mesh.n_dofs, 3))
    modes[0::2, 0] = 1.0
    modes[1::2, 1] = 1.0
    # in-plane rotation about the origin; sign of y is irrelevant for the rank test
    modes[0::2, 2] = -xy[:, 1]
    modes[1::2, 2] = xy[:, 0]
    fixed = lc.fixed_dofs
    if fixed.size < 3 or np.linalg.matrix_rank(modes[fixed]) < 3:
        raise StructuralError("load case leaves rigid-body modes unconstrained")


@lru_cache(maxsize=32)
def _element_stiffness(nu):
    k = np.array([
        1 / 2 - nu / 6, 1 / 8 + nu / 8, -1 / 4 - nu / 12, -1 / 8 + 3 * nu / 8,
        -1 / 4 + nu / 12, -1 / 8 - nu / 8, nu / 6, 1 / 8 - 3 * nu / 8,
    ])
    pattern = np.array([
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ])
    k0 = k[pattern] / (1 - nu ** 2)
    k0.setflags(write=False)
    return k0


def element_stiffness(nu):
    """Unit-modulus plane-stress stiffness of a unit-square bilinear element (8x8)."""
    if not 0 <= nu < 0.5:
        raise ParameterError(f"Poisson ratio must lie in [0, 0.5), got {nu}")
    return _element_stiffness(float(nu))


def _check_rho(mesh, rho):
    rho = np.ascontiguousarray(rho, dtype=float)
    if rho.shape != (mesh.n_elem,):
        raise ParameterError(f"density vector must have length {mesh.n_elem}, got shape {rho.shape}")
    return rho


def _check_u(mesh, u):
    u = np.ascontiguousarray(u, dtype=float)
    if u.shape != (mesh.n_dofs,):
        raise ParameterError(f"displacement vector must have length {mesh.n_dofs}, got shape {u.shape}")
    return u


def assemble(mesh, params, rho, order=None):
    """Global stiffness matrix (CSC). ``order`` permutes the element visit order."""
    rho = _check_rho(mesh, rho)
    k0 = element_stiffness(params.nu)
    edof = mesh.edof if order is None else mesh.edof[np.asarray(order)]
    E = params.modulus(rho if order is None else rho[np.asarray(order)])
    rows = np.repeat(edof, 8, axis=1).ravel()
    cols = np.tile(edof, (1, 8)).ravel()
    vals = (E[:, None] * k0.ravel()[None, :]).ravel()
    return sp.csc_matrix((vals, (rows, cols)), shape=(mesh.n_dofs, mesh.n_dofs))


def assemble_and_solve(mesh, params, rho, lc, solver="direct", order=None):
    """Solve ``K U = F`` with fixed DOFs eliminated; returns the full displacement vector.

    ``solver`` is ``"direct"`` (sparse LU) or ``"cg"`` (Jacobi-preconditioned
    conjugate gradients, capped at 10 iterations per DOF).
    """
    rho = _check_rho(mesh, rho)
    if np.any((rho < 0) | (rho > 1)):
        raise ParameterError("densities must lie in [0, 1]")
    check_restraints(mesh, lc)
    K = assemble(mesh, params, rho, order=order)
    f = lc.force_vector(mesh.n_dofs)
    free = lc.free_dofs(mesh.n_dofs)
    Kff = K[free][:, free]
    ff = f[free]
    u = np.zeros(mesh.n_dofs)
    if not np.any(ff):
        return u
    if solver == "direct":
        try:
            uf = spla.splu(Kff, permc_spec="MMD_AT_PLUS_A").solve(ff)
        except RuntimeError as exc:
            raise StructuralError(f"reduced stiffness matrix is singular: {exc}") from exc
    elif solver == "cg":
        diag = Kff.diagonal()
        precond = spla.LinearOperator(Kff.shape, matvec=lambda x: x / diag)
        uf, info = spla.cg(Kff, ff, rtol=SOLVE_RTOL * 1e-2, maxiter=10 * mesh.n_dofs, M=precond)
        if info != 0:
            res = np.linalg.norm(Kff @ uf - ff) / np.linalg.norm(ff)
            raise NumericalError(f"CG did not converge in {10 * mesh.n_dofs} iterations", residual=res)
    else:
        raise ParameterError(f"unknown solver {solver!r}")
    res = np.linalg.norm(Kff @ uf - ff) / np.linalg.norm(ff)
    if not np.isfinite(res):
        raise StructuralError("solve produced non-finite displacements")
    if res > SOLVE_RTOL:
        raise NumericalError(f"relative residual {res:.3e} exceeds {SOLVE_RTOL:g}", residual=res)
    u[free] = uf
    return u


def element_energies(mesh, params, u):
    """Unit-modulus element energies ``u_i^T k0 u_i``."""
    u = _check_u(mesh, u)
    k0 = np.ascontiguousarray(element_stiffness(params.nu))
    return _backend.element_energy(mesh.edof, u, k0)


def compliance(mesh, params, rho, u):
    """``sum_i E(rho_i) u_i^T k0 u_i``, equal to ``U^T F`` at equilibrium."""
    rho = _check_rho(mesh, rho)
    return float(np.sum(params.modulus(rho) * element_energies(mesh, params, u)))


def element_sensitivities(mesh, params, rho, u):
    """Compliance derivative ``-p rho^(p-1) (E0 - Emin) u_i^T k0 u_i`` per element."""
    rho = _check_rho(mesh, rho)
    ce = element_energies(mesh, params, u)
    return -params.p * rho ** (params.p - 1) * (params.E0 - params.Emin) * ce
