"""``key = value`` run configuration files.

Blank lines and ``#`` comments are ignored, unknown keys are rejected, and
every key not given in the file is filled from the preset or global default.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .beso import BesoConfig
from .errors import ConfigError, TopOptError
from .grid_fem import ElastParams, GridMesh
from .presets import PRESETS, build_preset, clamped_tip_load
from .simp import SimpConfig

METHODS = ("simp", "beso")
PRESET_NAMES = tuple(PRESETS) + ("custom",)
IMAGE_FORMATS = ("p2", "p5")
SOLVERS = ("direct", "cg")


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    method: str = "simp"
    preset: str = "cantilever"
    nelx: Optional[int] = None
    nely: Optional[int] = None
    volfrac: Optional[float] = None
    penal: float = 3.0
    rmin: Optional[float] = None
    nu: float = 0.22
    E0: float = 1.0
    Emin: Optional[float] = None
    move: float = 0.2
    eta: float = 0.5
    change_tol: float = 0.01
    er: float = 0.02
    rho_min: float = 1e-3
    window: int = 10
    stability_tol: float = 1e-3
    strict_swap: bool = False
    max_iters: int = 200
    load_x: Optional[int] = None
    load_y: Optional[int] = None
    output_dir: str = "out"
    image_format: str = "p2"
    log_every: int = 10
    solver: str = "direct"
    defaults_applied: list = field(default_factory=list, compare=False, repr=False)

    # -- derived objects -------------------------------------------------

    def mesh_and_loads(self):
        if self.preset == "custom":
            mesh = GridMesh(self.nelx, self.nely)
            return mesh, clamped_tip_load(mesh, self.load_x, self.load_y)
        return build_preset(self.preset, self.nelx, self.nely)

    def elast_params(self):
        return ElastParams(E0=self.E0, Emin=self.Emin, nu=self.nu, p=self.penal)

    def optimizer_config(self):
        if self.method == "simp":
            return SimpConfig(volfrac=self.volfrac, rmin=self.rmin, move=self.move, eta=self.eta,
                              max_iters=self.max_iters, change_tol=self.change_tol, rho_min=self.rho_min)
        return BesoConfig(volfrac=self.volfrac, rmin=self.rmin, er=self.er, rho_min=self.rho_min,
                          max_iters=self.max_iters, window=self.window, tol=self.stability_tol,
                          strict_swap=self.strict_swap)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig) if f.name != "defaults_applied"}
_CONVERTERS = {
    "method": str, "preset": str, "output_dir": str, "image_format": str, "solver": str,
    "nelx": int, "nely": int, "window": int, "max_iters": int, "log_every": int,
    "load_x": int, "load_y": int,
    "strict_swap": _bool,
}


def _convert(key, text):
    return _CONVERTERS.get(key, float)(text.strip())


def _fill_defaults(cfg, given):
    applied = []
    if cfg.preset in PRESETS:
        nelx, nely, volfrac, rmin = PRESETS[cfg.preset]
        preset_defaults = {"nelx": nelx, "nely": nely, "volfrac": volfrac, "rmin": rmin}
    else:
        preset_defaults = {"volfrac": PRESETS["cantilever"][2], "rmin": PRESETS["cantilever"][3]}
    for name, f in _FIELDS.items():
        if name in given:
            continue
        if name in preset_defaults:
            setattr(cfg, name, preset_defaults[name])
        if name == "Emin":
            cfg.Emin = 1e-9 * cfg.E0
        applied.append((name, getattr(cfg, name)))
    cfg.defaults_applied = applied
    return cfg


_RANGES = {
    "nelx": (lambda v: v >= 1, "must be at least 1"),
    "nely": (lambda v: v >= 1, "must be at least 1"),
    "volfrac": (lambda v: 0 < v <= 1, "must lie in (0, 1]"),
    "penal": (lambda v: v >= 1, "must be at least 1"),
    "rmin": (lambda v: v > 0, "must be positive"),
    "nu": (lambda v: 0 <= v < 0.5, "must lie in [0, 0.5)"),
    "E0": (lambda v: v > 0, "must be positive"),
    "move": (lambda v: 0 < v <= 1, "must lie in (0, 1]"),
    "eta": (lambda v: 0 < v <= 1, "must lie in (0, 1]"),
    "change_tol": (lambda v: v >= 0, "must be non-negative"),
    "er": (lambda v: 0 <= v < 1, "must lie in [0, 1)"),
    "rho_min": (lambda v: 0 < v < 1, "must lie in (0, 1)"),
    "window": (lambda v: v >= 2, "must be at least 2"),
    "stability_tol": (lambda v: v >= 0, "must be non-negative"),
    "max_iters": (lambda v: v >= 1, "must be at least 1"),
    "log_every": (lambda v: v >= 1, "must be at least 1"),
}
_CHOICES = {
    "method": METHODS,
    "preset": PRESET_NAMES,
    "image_format": IMAGE_FORMATS,
    "solver": SOLVERS,
}


def validate(cfg, lines=None):
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(msg, key=key, line=lines.get(key))

    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            fail(key, f"must be one of {choices}, got {getattr(cfg, key)!r}")
    for key in ("nelx", "nely"):
        if getattr(cfg, key) is None:
            fail(key, "required for the custom preset")
    for key, (ok, msg) in _RANGES.items():
        if not ok(getattr(cfg, key)):
            fail(key, f"{msg}, got {getattr(cfg, key)!r}")
    if not 0 < cfg.Emin < cfg.E0:
        fail("Emin", "must lie in (0, E0)")
    try:
        cfg.mesh_and_loads()
    except TopOptError as exc:
        fail("load_x" if "load_x" in lines else "preset", str(exc))
    return cfg


def parse_config(text):
    """Parse and validate a configuration text into a :class:`RunConfig`."""
    given = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno)
        if key in given:
            raise ConfigError("duplicate key", key=key, line=lineno)
        try:
            given[key] = _convert(key, value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse value {value!r}: {exc}", key=key, line=lineno) from None
        lines[key] = lineno
    cfg = RunConfig(**given)
    _fill_defaults(cfg, given)
    return validate(cfg, lines)


def serialize_config(cfg):
    """Inverse of :func:`parse_config`; ``None`` values are left out."""
    out = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        out.append(f"{name} = {value}")
    return "\n".join(out) + "\n"


def preset_config(name, method="simp"):
    return parse_config(f"method = {method}\npreset = {name}\n")
