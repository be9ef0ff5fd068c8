"""Soft-kill BESO: discrete densities ranked by filtered, history-averaged strain energy."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import diagnostics
from .errors import ConstraintError, ParameterError, RunAborted, StateError, TopOptError
from .grid_fem import assemble_and_solve, compliance, element_energies
from .record import OptRecord
from .sens_filter import build_kernel, filter_field

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BesoConfig:
    volfrac: float
    rmin: float = 1.5
    er: float = 0.02
    rho_min: float = 1e-3
    max_iters: int = 200
    window: int = 10
    tol: float = 1e-3
    strict_swap: bool = False

    def __post_init__(self):
        if not 0 < self.volfrac <= 1:
            raise ParameterError(f"volume fraction must lie in (0, 1], got {self.volfrac}")
        if not 0 <= self.er < 1:
            raise ParameterError(f"evolution rate must lie in [0, 1), got {self.er}")
        if not 0 < self.rho_min < 1:
            raise ParameterError(f"rho_min must lie in (0, 1), got {self.rho_min}")
        if not self.rmin > 0:
            raise ParameterError(f"filter radius must be positive, got {self.rmin}")
        if self.window < 2:
            raise ParameterError("stability window must span at least 2 iterations")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")


@dataclass(frozen=True)
class SensitivityHistory:
    previous: Optional[np.ndarray] = None


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def _solid_mask(rho, rho_min):
    rho = np.asarray(rho, dtype=float)
    solid = rho == 1.0
    if not np.all(solid | (rho == rho_min)):
        raise StateError(f"BESO densities must be exactly {rho_min:g} or 1")
    return solid


def beso_sensitivity(mesh, params, rho, u, rho_min=1e-3):
    """Sensitivity numbers: half the element strain energy for solid elements, zero for void."""
    solid = _solid_mask(rho, rho_min)
    energy = element_energies(mesh, params, u)
    return np.where(solid, 0.5 * params.modulus(1.0) * energy, 0.0)


def beso_smooth(alpha, kernel, history):
    """Filter ``alpha`` then average with the previous filtered vector.

    Returns ``(smoothed, new_history)``. An empty history makes the average
    the identity, so the first iteration uses the filtered numbers as-is.
    """
    filtered = filter_field(kernel, alpha)
    prev = filtered if history.previous is None else history.previous
    if prev.shape != filtered.shape:
        raise ParameterError("history length does not match the sensitivity vector")
    return 0.5 * (filtered + prev), SensitivityHistory(filtered)


def _ranking(rho, smoothed, rho_min):
    solid = _solid_mask(rho, rho_min)
    smoothed = np.asarray(smoothed, dtype=float)
    if smoothed.shape != solid.shape:
        raise ParameterError("sensitivity and density vectors differ in length")
    # descending score, then currently-solid first, then lower index
    return np.lexsort((np.arange(solid.size), ~solid, -smoothed)), solid


def beso_update(rho, smoothed, config, target):
    """Keep the ``round(target)`` highest-ranked elements solid, void the rest."""
    n_solid = _round_half_up(target)
    if n_solid < 1:
        raise ConstraintError(f"target volume {target:g} is below one element")
    order, solid = _ranking(rho, smoothed, config.rho_min)
    n_solid = min(n_solid, solid.size)
    new = np.full(solid.size, config.rho_min)
    new[order[:n_solid]] = 1.0
    return new


def beso_swap(rho, smoothed, config, target):
    """Literal one-element rule: void the weakest solid, and if the volume is
    already at target fill the strongest void when it outranks it."""
    n_target = _round_half_up(target)
    if n_target < 1:
        raise ConstraintError(f"target volume {target:g} is below one element")
    order, solid = _ranking(rho, smoothed, config.rho_min)
    smoothed = np.asarray(smoothed, dtype=float)
    new = np.where(solid, 1.0, config.rho_min)
    solid_idx = np.flatnonzero(solid)
    void_idx = np.flatnonzero(~solid)
    weakest = solid_idx[np.lexsort((-solid_idx, smoothed[solid_idx]))[0]] if solid_idx.size else None
    if solid_idx.size > n_target:
        new[weakest] = config.rho_min
    elif solid_idx.size < n_target and void_idx.size:
        new[void_idx[np.lexsort((void_idx, -smoothed[void_idx]))[0]]] = 1.0
    elif void_idx.size and weakest is not None:
        strongest = void_idx[np.lexsort((void_idx, -smoothed[void_idx]))[0]]
        if smoothed[strongest] > smoothed[weakest]:
            new[weakest] = config.rho_min
            new[strongest] = 1.0
    return new


def compliance_variation(values):
    """``(max - min) / mean`` of a compliance window."""
    values = np.asarray(values, dtype=float)
    return float((values.max() - values.min()) / values.mean())


def run_beso(mesh, params, lc, config, rho0=None, callback=None, solver="direct"):
    """Run BESO from an all-solid design (or ``rho0``); returns ``(rho, record)``.

    The volume target shrinks geometrically by ``er`` per iteration down to
    ``volfrac * N``. The run stops once the target is reached and the
    compliance of the last ``window`` designs at that volume varies by less
    than ``tol``. Recorded compliance is ``U^T K U``, twice the BESO objective.
    """
    kernel = build_kernel(mesh, config.rmin)
    rho = np.ones(mesh.n_elem) if rho0 is None else np.array(rho0, dtype=float)
    _solid_mask(rho, config.rho_min)
    final_target = config.volfrac * mesh.n_elem
    final_count = _round_half_up(final_target)
    target = float(np.count_nonzero(rho == 1.0))
    history = SensitivityHistory()
    step = beso_swap if config.strict_swap else beso_update
    record = OptRecord(method="beso")
    settled = []  # compliances of analysed designs already at the final volume
    for it in range(1, config.max_iters + 1):
        try:
            u = assemble_and_solve(mesh, params, rho, lc, solver=solver)
            c = compliance(mesh, params, rho, u)
            alpha = beso_sensitivity(mesh, params, rho, u, config.rho_min)
            smoothed, history = beso_smooth(alpha, kernel, history)
            target = max(final_target, target * (1.0 - config.er))
            new = step(rho, smoothed, config, target)
        except TopOptError as exc:
            raise RunAborted(f"BESO aborted at iteration {it}: {exc}", record, exc) from exc
        if np.count_nonzero(rho == 1.0) == final_count:
            settled.append(c)
        else:
            settled.clear()
        change = float(np.max(np.abs(new - rho)))
        rho = new
        record.append(it, c, float(np.count_nonzero(rho == 1.0) / rho.size), change,
                      diagnostics.checkerboard_index(mesh, rho) if mesh.nelx > 1 and mesh.nely > 1 else 0.0)
        log.debug("it %3d  c %.6e  solid %d  change %.3f", it, c, np.count_nonzero(rho == 1.0), change)
        if callback is not None:
            callback(it, rho, record)
        if (len(settled) >= config.window
                and np.count_nonzero(rho == 1.0) == final_count
                and compliance_variation(settled[-config.window:]) < config.tol):
            record.converged = True
            break
    return rho, record
