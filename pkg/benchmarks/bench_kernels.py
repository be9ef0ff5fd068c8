"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--sizes 80x40 160x80 320x160] [--repeat 20]
    python benchmarks/bench_kernels.py --end-to-end [--iters 20]

Prints the best-of-N wall time per kernel and backend, and the speedup.
``--end-to-end`` times whole SIMP iterations instead, where the sparse
solve is shared by both backends.
"""
import argparse
import timeit

import numpy as np

from topopt import _backend, _pykernels
from topopt.grid_fem import ElastParams, GridMesh, element_stiffness
from topopt.presets import build_preset
from topopt.simp import SimpConfig, run_simp

try:
    from topopt import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(nelx, nely, rmin, repeat):
    mesh = GridMesh(nelx, nely)
    rng = np.random.default_rng(0)
    u = rng.normal(size=mesh.n_dofs)
    x = rng.normal(size=mesh.n_elem)
    k0 = np.ascontiguousarray(element_stiffness(0.3))
    indptr, indices, weights = _pykernels.neighbor_lists(nelx, nely, rmin)
    cases = {
        "neighbor_lists": lambda k: k.neighbor_lists(nelx, nely, rmin),
        "weighted_sum": lambda k: k.weighted_sum(indptr, indices, weights, x),
        "element_energy": lambda k: k.element_energy(mesh.edof, u, k0),
    }
    rows = []
    for name, call in cases.items():
        t_py = best_time(lambda: call(_pykernels), repeat)
        t_c = best_time(lambda: call(_ckernels), repeat) if _ckernels else float("nan")
        rows.append((f"{nelx}x{nely}", name, t_py, t_c))
    return rows


def bench_loop(nelx, nely, rmin, iters):
    mesh, lc = build_preset("cantilever", nelx, nely)
    cfg = SimpConfig(volfrac=0.4, rmin=rmin, max_iters=iters, change_tol=0.0)
    out = {}
    for label, mod in (("numpy", _pykernels), ("cython", _ckernels)):
        if mod is None:
            out[label] = float("nan")
            continue
        _backend.kernels = mod
        out[label] = best_time(lambda: run_simp(mesh, ElastParams(), lc, cfg), 1) / iters
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", nargs="+", default=["80x40", "160x80", "320x160"])
    parser.add_argument("--rmin", type=float, default=1.5)
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--end-to-end", action="store_true")
    parser.add_argument("--iters", type=int, default=20)
    args = parser.parse_args()
    if args.end_to_end:
        print(f"{'mesh':>9} {'numpy [ms/it]':>14} {'cython [ms/it]':>15} {'speedup':>8}")
        for size in args.sizes:
            nelx, nely = map(int, size.split("x"))
            t = bench_loop(nelx, nely, args.rmin, args.iters)
            print(f"{size:>9} {1e3 * t['numpy']:14.2f} {1e3 * t['cython']:15.2f} {t['numpy'] / t['cython']:8.2f}")
        return
    print(f"{'mesh':>9} {'kernel':>15} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for size in args.sizes:
        nelx, nely = map(int, size.split("x"))
        for mesh, name, t_py, t_c in bench(nelx, nely, args.rmin, args.repeat):
            print(f"{mesh:>9} {name:>15} {1e3 * t_py:11.3f} {1e3 * t_c:12.3f} {t_py / t_c:8.1f}")


if __name__ == "__main__":
    main()
