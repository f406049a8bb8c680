"""Run configuration: flat ``key = value`` text.

Blank lines and ``#`` comments are ignored.  Arrays are comma lists,
complex numbers use Python syntax (``0.5-1j``).  Recognised keys::

    r1, r2                  lattice constants (> 0)
    N                       truncation degree (>= 8)
    window.m0, window.m1    inclusive m range (must contain 0)
    window.n0, window.n1    inclusive n range (must contain 0)
    seed.kind               identity | rng | file
    seed.rng                64-bit RNG seed (seed.kind = rng)
    seed.decay, seed.scale  random seed envelope
    seed.file               dcmc-seed JSON file (seed.kind = file)
    build.order             row | column | scratch
    build.workers           threads for independent lattice lines
    tol.template            Lax template threshold
    tol.symmetry            symmetry acceptance threshold
    tol.edge                formula vs difference edge threshold
    out.dir                 output directory
    out.prefix              file name stem
    verify.lattice          lattice file read by ``verify`` and ``export``
    verify.shifts           shift list, e.g. ``1:0, 0:1, 2:3``
    spectral.k, spectral.l  even shift
    spectral.a2.num, spectral.a2.den, spectral.a2.var   (same for b2, c2)
    spectral.f_plus         odd polynomial, ascending coefficients
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ValidationError


class ConfigError(ValidationError):
    """Bad configuration; ``line`` is 1-based or None for missing keys."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = f"{path or '<config>'}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.line = line


_FLOAT = {"r1", "r2", "seed.decay", "seed.scale", "tol.template", "tol.symmetry", "tol.edge"}
_INT = {"N", "window.m0", "window.m1", "window.n0", "window.n1", "seed.rng", "build.workers", "spectral.k", "spectral.l"}
_CHOICE = {
    "seed.kind": ("identity", "rng", "file"),
    "build.order": ("row", "column", "scratch"),
    "spectral.a2.var": ("lambda", "nu"),
    "spectral.b2.var": ("lambda", "nu"),
    "spectral.c2.var": ("lambda", "nu"),
}
_STRING = {"seed.file", "out.dir", "out.prefix", "verify.lattice"}
_COMPLEX_LIST = {f"spectral.{f}.{p}" for f in ("a2", "b2", "c2") for p in ("num", "den")} | {"spectral.f_plus"}
_SHIFTS = {"verify.shifts"}
_UNHASHED = {"out.dir"}
KNOWN = _FLOAT | _INT | set(_CHOICE) | _STRING | _COMPLEX_LIST | _SHIFTS

DEFAULTS = {
    "r1": 0.5,
    "r2": 0.5,
    "N": 128,
    "window.m0": -5,
    "window.m1": 4,
    "window.n0": -5,
    "window.n1": 4,
    "seed.kind": "identity",
    "seed.rng": 0,
    "seed.decay": 0.5,
    "seed.scale": 1.0,
    "build.order": "row",
    "build.workers": 1,
    "tol.template": 1e-6,
    "tol.symmetry": 1e-6,
    "tol.edge": 1e-7,
    "out.dir": ".",
    "out.prefix": "dcmc",
}


def _complex_list(text: str, key: str, line: int, path):
    out = []
    for pos, item in enumerate(text.split(","), 1):
        item = item.strip().replace(" ", "")
        try:
            out.append(complex(item))
        except ValueError:
            raise ConfigError(f"{key}: entry {pos} ({item!r}) is not a number", line, path) from None
    return out


def _shifts(text: str, key: str, line: int, path):
    out = []
    for pos, item in enumerate(text.split(","), 1):
        parts = item.strip().split(":")
        try:
            if len(parts) != 2:
                raise ValueError
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ConfigError(f"{key}: entry {pos} ({item.strip()!r}) is not of the form k:l", line, path) from None
    return out


def _convert(key: str, raw: str, line: int, path):
    try:
        if key in _FLOAT:
            return float(raw)
        if key in _INT:
            return int(raw)
    except ValueError:
        kind = "a number" if key in _FLOAT else "an integer"
        raise ConfigError(f"{key} must be {kind}, got {raw!r}", line, path) from None
    if key in _CHOICE:
        if raw not in _CHOICE[key]:
            raise ConfigError(f"{key} must be one of {', '.join(_CHOICE[key])}; got {raw!r}", line, path)
        return raw
    if key in _COMPLEX_LIST:
        return _complex_list(raw, key, line, path)
    if key in _SHIFTS:
        return _shifts(raw, key, line, path)
    return raw


@dataclass
class RunConfig:
    values: dict
    lines: dict = field(default_factory=dict)  # key -> source line
    path: str | None = None

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        if key in DEFAULTS:
            return DEFAULTS[key]
        raise KeyError(key)

    def get(self, key, default=None):
        try:
            return self[key]
        except KeyError:
            return default

    def __contains__(self, key) -> bool:
        return key in self.values

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, self.lines.get(key), self.path)

    def override(self, key: str, value) -> None:
        self.values[key] = value
        self.lines.pop(key, None)

    def canonical(self) -> str:
        """Sorted key = value lines of every set or defaulted key.

        ``out.dir`` is left out: where files land does not change them.
        """
        keys = sorted((set(DEFAULTS) | set(self.values)) - _UNHASHED)
        return "".join(f"{k} = {_render(self[k])}\n" for k in keys)

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def validate(self) -> "RunConfig":
        for key in ("r1", "r2"):
            if not self[key] > 0:
                raise self.error(key, f"{key} must be positive")
        if self["N"] < 8:
            raise self.error("N", "N must be at least 8")
        m0, m1, n0, n1 = (self[f"window.{k}"] for k in ("m0", "m1", "n0", "n1"))
        if m0 > m1 or n0 > n1:
            raise self.error("window.m1" if m0 > m1 else "window.n1", "window is empty")
        if not (m0 <= 0 <= m1 and n0 <= 0 <= n1):
            raise self.error("window.m0", "window must contain (0, 0)")
        if self["seed.kind"] == "file" and "seed.file" not in self:
            raise self.error("seed.kind", "seed.kind = file needs seed.file")
        if not 0 < self["seed.decay"] < 1:
            raise self.error("seed.decay", "seed.decay must lie in (0, 1)")
        if not 0 <= self["seed.rng"] < 2**64:
            raise self.error("seed.rng", "seed.rng must be an unsigned 64-bit integer")
        if self["build.workers"] < 1:
            raise self.error("build.workers", "build.workers must be at least 1")
        return self


def _render(v) -> str:
    if isinstance(v, list):
        if v and isinstance(v[0], tuple):
            return ", ".join(f"{a}:{b}" for a, b in v)
        return ", ".join(repr(complex(z)) for z in v)
    return repr(v) if isinstance(v, float) else str(v)


def parse_config(text: str, path: str | None = None) -> RunConfig:
    values, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", no, path)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN:
            raise ConfigError(f"unknown key {key!r}", no, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", no, path)
        if not val:
            raise ConfigError(f"empty value for {key!r}", no, path)
        values[key] = _convert(key, val, no, path)
        lines[key] = no
    return RunConfig(values, lines, path).validate()


def load_config(path) -> RunConfig:
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, str(path))
