"""SIMP compliance minimization with an optimality-criteria update."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .errors import ConstraintError, NumericalError, ParameterError, RunAborted, TopOptError
from .grid_fem import assemble_and_solve, compliance, element_sensitivities
from .record import OptRecord
from .sens_filter import build_kernel, filter_sensitivities

log = logging.getLogger(__name__)

RHO_MIN = 1e-3
VOLUME_RTOL = 1e-6
LAMBDA_BRACKET = (1e-9, 1e9)
MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class SimpConfig:
    volfrac: float
    rmin: float = 1.5
    move: float = 0.2
    eta: float = 0.5
    max_iters: int = 200
    change_tol: float = 0.01
    rho_min: float = RHO_MIN

    def __post_init__(self):
        if not 0 < self.volfrac <= 1:
            raise ParameterError(f"volume fraction must lie in (0, 1], got {self.volfrac}")
        if not 0 < self.move <= 1:
            raise ParameterError(f"move limit must lie in (0, 1], got {self.move}")
        if not 0 < self.eta <= 1:
            raise ParameterError(f"damping exponent must lie in (0, 1], got {self.eta}")
        if not self.rmin > 0:
            raise ParameterError(f"filter radius must be positive, got {self.rmin}")
        if not 0 < self.rho_min < 1:
            raise ParameterError(f"rho_min must lie in (0, 1), got {self.rho_min}")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")


def oc_candidate(rho, scale, lam, move, eta, rho_min):
    """Clamped update ``rho * (scale / lam)^eta`` for one multiplier value."""
    lo = np.maximum(rho_min, rho - move)
    hi = np.minimum(1.0, rho + move)
    return np.clip(rho * (scale / lam) ** eta, lo, hi)


def oc_update(rho, dc, dv, config):
    """Optimality-criteria step with the multiplier found by geometric bisection.

    Each density becomes ``rho_i * B_i^eta`` clamped to the move window and to
    ``[rho_min, 1]``, with ``B_i = -dc_i / (lam * dv_i)``. The multiplier is
    bisected until the total volume equals ``volfrac * N`` to a relative 1e-6.
    """
    rho = np.asarray(rho, dtype=float)
    dc = np.asarray(dc, dtype=float)
    dv = np.asarray(dv, dtype=float)
    if not rho.shape == dc.shape == dv.shape:
        raise ParameterError("rho, dc and dv must have equal shapes")
    move, eta, rho_min = config.move, config.eta, config.rho_min
    target = config.volfrac * rho.size
    tol = VOLUME_RTOL * target

    lo = np.maximum(rho_min, rho - move)
    hi = np.minimum(1.0, rho + move)
    if lo.sum() > target + tol or hi.sum() < target - tol:
        raise ConstraintError(
            f"volume target {target:g} outside reachable range [{lo.sum():g}, {hi.sum():g}]"
        )
    scale = np.maximum(0.0, -dc) / dv

    def volume(lam):
        return oc_candidate(rho, scale, lam, move, eta, rho_min).sum()

    l1, l2 = LAMBDA_BRACKET
    for _ in range(MAX_DOUBLINGS):
        if volume(l1) >= target - tol:
            break
        l1 /= 2
    else:
        raise NumericalError("could not bracket the multiplier from below")
    for _ in range(MAX_DOUBLINGS):
        if volume(l2) <= target + tol:
            break
        l2 *= 2
    else:
        raise NumericalError("could not bracket the multiplier from above")

    while True:
        lmid = math.sqrt(l1 * l2)
        new = oc_candidate(rho, scale, lmid, move, eta, rho_min)
        err = new.sum() - target
        if abs(err) <= tol and l2 / l1 < 1 + 1e-3:
            return new
        if lmid <= l1 or lmid >= l2:
            # bracket exhausted at floating-point resolution
            if abs(err) <= tol:
                return new
            raise NumericalError(f"bisection stalled with volume error {err:.3e}", residual=abs(err))
        if err > 0:
            l1 = lmid
        else:
            l2 = lmid


def run_simp(mesh, params, lc, config, callback=None, solver="direct"):
    """Run the SIMP loop from a uniform design; returns ``(rho, record)``.

    Per iteration: solve, compliance, sensitivities, filter, OC update. Stops
    when the largest density change drops below ``config.change_tol`` or after
    ``config.max_iters`` iterations. ``callback(it, rho, record)`` is called
    after each iteration.
    """
    kernel = build_kernel(mesh, config.rmin)
    rho = np.full(mesh.n_elem, float(config.volfrac))
    dv = np.ones(mesh.n_elem)
    record = OptRecord(method="simp")
    for it in range(1, config.max_iters + 1):
        try:
            u = assemble_and_solve(mesh, params, rho, lc, solver=solver)
            c = compliance(mesh, params, rho, u)
            dc = element_sensitivities(mesh, params, rho, u)
            dc = filter_sensitivities(kernel, rho, dc)
            new = oc_update(rho, dc, dv, config)
        except TopOptError as exc:
            raise RunAborted(f"SIMP aborted at iteration {it}: {exc}", record, exc) from exc
        change = float(np.max(np.abs(new - rho)))
        rho = new
        record.append(it, c, float(rho.mean()), change, diagnostics.checkerboard_index(mesh, rho)
                      if mesh.nelx > 1 and mesh.nely > 1 else 0.0)
        log.debug("it %3d  c %.6e  vol %.4f  change %.4f", it, c, rho.mean(), change)
        if callback is not None:
            callback(it, rho, record)
        if change < config.change_tol:
            record.converged = True
            break
    return rho, record
