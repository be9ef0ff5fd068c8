"""Command line entry point.

    topopt run CONFIG            run an optimization, write images and logs
    topopt preset NAME --print   dump the full configuration of a preset
    topopt metrics FILE          recompute diagnostics from a .pgm or density .csv

``run`` exits with 0 on convergence, 2 when max_iters is hit first, 1 on error.
"""
import argparse
import logging
import sys
from pathlib import Path

from . import diagnostics, io
from ._backend import BACKEND
from .beso import run_beso
from .config import PRESET_NAMES, METHODS, parse_config, preset_config, serialize_config
from .errors import RunAborted, TopOptError
from .simp import run_simp

log = logging.getLogger("topopt")

EXIT_CONVERGED, EXIT_ERROR, EXIT_MAX_ITERS = 0, 1, 2


def write_outputs(cfg, mesh, rho, record):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.emit_density_image(rho, mesh, out / "density.pgm", binary=cfg.image_format == "p5")
    io.emit_density_csv(rho, mesh, out / "density.csv")
    if len(record):
        io.emit_convergence_log(record, out / "convergence.csv")
    (out / "config.txt").write_text(serialize_config(cfg))


def execute(cfg):
    """Run a parsed configuration and write its outputs; returns ``(rho, record)``."""
    for key, value in cfg.defaults_applied:
        log.info("default %s = %s", key, value)
    mesh, lc = cfg.mesh_and_loads()
    params = cfg.elast_params()
    opt = cfg.optimizer_config()
    log.info("%s on %dx%d (%s kernels)", cfg.method.upper(), mesh.nelx, mesh.nely, BACKEND)

    def progress(it, rho, record):
        if it % cfg.log_every == 0:
            row = record.rows[-1]
            log.info("it %4d  c %.6e  vol %.4f  change %.4f  cb %.5f",
                     row.iter, row.compliance, row.volfrac, row.change, row.checkerboard_index)

    runner = run_simp if cfg.method == "simp" else run_beso
    rho, record = runner(mesh, params, lc, opt, callback=progress, solver=cfg.solver)
    write_outputs(cfg, mesh, rho, record)
    return rho, record


def cmd_run(args):
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if args.output_dir:
            cfg.output_dir = args.output_dir
        _, record = execute(cfg)
    except RunAborted as exc:
        log.error("%s", exc)
        if len(exc.record):
            out = Path(cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            io.emit_convergence_log(exc.record, out / "convergence.csv")
        return EXIT_ERROR
    except (TopOptError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    log.info("%s after %d iterations", "converged" if record.converged else "stopped at max_iters", len(record))
    return EXIT_CONVERGED if record.converged else EXIT_MAX_ITERS


def cmd_preset(args):
    try:
        cfg = preset_config(args.name, args.method)
    except TopOptError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    if args.print:
        sys.stdout.write(serialize_config(cfg))
    return 0


def cmd_metrics(args):
    path = Path(args.file)
    try:
        if path.suffix.lower() == ".pgm":
            mesh, rho = io.density_from_pixels(io.read_pgm(path))
        else:
            mesh, rho = io.read_density_csv(path)
        m = diagnostics.field_metrics(mesh, rho)
    except (TopOptError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    print(f"nelx = {mesh.nelx}")
    print(f"nely = {mesh.nely}")
    print(f"checkerboard_index = {m.checkerboard_index!r}")
    print(f"gray_fraction = {m.gray_fraction!r}")
    print(f"volume_fraction = {m.volume_fraction!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="topopt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an optimization from a config file")
    p.add_argument("config")
    p.add_argument("-o", "--output-dir", help="override output_dir from the config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="show a benchmark preset")
    p.add_argument("name", choices=[n for n in PRESET_NAMES if n != "custom"])
    p.add_argument("--method", choices=METHODS, default="simp")
    p.add_argument("--print", action="store_true", help="print the full config")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("metrics", help="diagnostics of a saved density field")
    p.add_argument("file")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
