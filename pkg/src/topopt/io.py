"""File outputs: density images (PGM), density dumps and convergence logs (CSV)."""
import csv
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .grid_fem import GridMesh
from .record import IterRow, OptRecord

LOG_HEADER = ("iter", "compliance", "volfrac", "change", "checkerboard_index")


def density_pixels(mesh, rho):
    """Gray levels ``round(255 * (1 - rho))`` as a ``(nely, nelx)`` int array; solid is black."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (mesh.n_elem,):
        raise ParameterError(f"density vector must have length {mesh.n_elem}")
    # floor(x + 0.5) rounds halves up; np.round would round them to even
    pix = np.floor(255.0 * (1.0 - np.clip(rho, 0.0, 1.0)) + 0.5).astype(int)
    return mesh.to_image(pix)


def emit_density_image(rho, mesh, path, binary=False):
    """Write the density field as a PGM, ASCII (P2) by default or raw (P5)."""
    pix = density_pixels(mesh, rho)
    path = Path(path)
    header = f"{'P5' if binary else 'P2'}\n{mesh.nelx} {mesh.nely}\n255\n"
    if binary:
        path.write_bytes(header.encode("ascii") + pix.astype(np.uint8).tobytes())
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in pix)
        path.write_text(header + body + "\n", encoding="ascii")
    return path


def read_pgm(path):
    """Read a P2 or P5 graymap with maxval 255; returns a ``(height, width)`` int array."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ParameterError(f"{path}: not a P2/P5 graymap")
    # header tokens may be separated by arbitrary whitespace and comments
    tokens, pos = [], 2
    while len(tokens) < 3:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        tokens.append(int(data[pos:end]))
        pos = end
    width, height, maxval = tokens
    if maxval != 255:
        raise ParameterError(f"{path}: unsupported maxval {maxval}")
    if magic == b"P5":
        pix = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8).astype(int)
    else:
        pix = np.array(data[pos:].split(), dtype=int)
    if pix.size != width * height:
        raise ParameterError(f"{path}: expected {width * height} pixels, found {pix.size}")
    return pix.reshape(height, width)


def density_from_pixels(pix):
    """Approximate inverse of :func:`density_pixels`; returns ``(mesh, rho)``."""
    pix = np.asarray(pix)
    mesh = GridMesh(pix.shape[1], pix.shape[0])
    return mesh, mesh.from_image(1.0 - pix / 255.0)


def emit_density_csv(rho, mesh, path):
    """One CSV row per element row (top first), ``nelx`` values per row, full precision."""
    img = mesh.to_image(np.asarray(rho, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in img:
            writer.writerow(repr(float(v)) for v in row)
    return Path(path)


def read_density_csv(path):
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    img = np.array(rows, dtype=float)
    if img.ndim != 2:
        raise ParameterError(f"{path}: ragged density rows")
    mesh = GridMesh(img.shape[1], img.shape[0])
    return mesh, mesh.from_image(img)


def emit_convergence_log(record, path):
    if not len(record):
        raise ParameterError("cannot write an empty convergence log")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_HEADER)
        for row in record.rows:
            writer.writerow([str(int(row.iter))] + [repr(float(v)) for v in row[1:]])
    return Path(path)


def read_convergence_log(path, method=""):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != LOG_HEADER:
            raise ParameterError(f"{path}: unexpected header {header}")
        rows = [IterRow(int(r[0]), *(float(v) for v in r[1:])) for r in reader if r]
    return OptRecord(method=method, rows=rows)
