"""Benchmark geometries: left edge clamped, unit downward point load at mid-height of the right edge."""
from .errors import ParameterError
from .grid_fem import GridMesh, LoadCase

PRESETS = {
    # name: (nelx, nely, volfrac, rmin)
    "cantilever": (80, 40, 0.4, 1.3),
    "short_cantilever": (40, 80, 0.25, 1.5),
}


def clamped_tip_load(mesh, load_x=None, load_y=None, value=-1.0):
    """Clamp every left-edge DOF and apply a vertical point load (default: right edge, mid-height)."""
    x = mesh.nelx if load_x is None else load_x
    y = mesh.nely // 2 if load_y is None else load_y
    left = [mesh.node(0, j) for j in range(mesh.nely + 1)]
    fixed = [2 * n for n in left] + [2 * n + 1 for n in left]
    return LoadCase(fixed, {2 * mesh.node(x, y) + 1: value})


def build_preset(name, nelx=None, nely=None):
    """Mesh and load case of a named benchmark; sizes default to the reference meshes."""
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    dx, dy = PRESETS[name][:2]
    mesh = GridMesh(dx if nelx is None else nelx, dy if nely is None else nely)
    return mesh, clamped_tip_load(mesh)
