"""File formats: lattice and seed JSON, sectioned text reports.

Lattice file (``format = "dcmc-lattice"``)::

    {"format": "dcmc-lattice", "version": 1,
     "r1": ..., "r2": ..., "N": ..., "order": ...,
     "window": [m0, m1, n0, n1],
     "sites": [[m, n], ...],                 row-major, m outer
     "re": [...], "im": [...]}               coefficients, shape (sites, 2N+1, 2, 2)

Coefficient index j holds the mode lambda^(j - N).  A seed file
(``format = "dcmc-seed"``) has ``N``, ``description``, ``re`` and ``im``
for one loop of shape (2N+1, 2, 2).

A report is plain text in ``== section ==`` blocks followed by a JSON
trailer between ``-----BEGIN DCMC TRAILER-----`` and
``-----END DCMC TRAILER-----``.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import __version__
from .cylinder import LatticeConstants
from .errors import DcmcError, ValidationError
from .lattice import DressingSeed, LatticeFrame, Window, _frame_curvature
from .loops import TwistedLoop

TRAILER_BEGIN = "-----BEGIN DCMC TRAILER-----"
TRAILER_END = "-----END DCMC TRAILER-----"


class DcmcIOError(DcmcError, OSError):
    """Unreadable or malformed input file."""


def _read_json(path, fmt):
    try:
        with open(os.fspath(path)) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DcmcIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise DcmcIOError(f"{path} is not valid JSON (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(data, dict) or data.get("format") != fmt:
        raise DcmcIOError(f"{path} is not a {fmt} file")
    return data


def _write_text(path, text: str) -> None:
    try:
        with open(os.fspath(path), "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DcmcIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _complex_array(data, shape, path):
    try:
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        return (re + 1j * im).reshape(shape)
    except (KeyError, ValueError, TypeError) as exc:
        raise DcmcIOError(f"{path}: coefficient arrays missing or of wrong shape {shape}") from exc


def lattice_dict(L: LatticeFrame) -> dict:
    w = L.window
    sites = list(w.sites())
    c = np.stack([L.frame(*s).coeffs for s in sites])
    return {
        "format": "dcmc-lattice",
        "version": 1,
        "r1": L.constants.r1,
        "r2": L.constants.r2,
        "N": L.N,
        "order": L.order,
        "window": list(w.as_tuple()),
        "sites": [list(s) for s in sites],
        "re": c.real.ravel().tolist(),
        "im": c.imag.ravel().tolist(),
    }


def save_lattice(L: LatticeFrame, path) -> None:
    _write_text(path, json.dumps(lattice_dict(L), separators=(",", ":")) + "\n")


def load_lattice(path) -> LatticeFrame:
    d = _read_json(path, "dcmc-lattice")
    try:
        w = Window(*(int(x) for x in d["window"]))
        N = int(d["N"])
        c = LatticeConstants(float(d["r1"]), float(d["r2"]))
        sites = [tuple(int(v) for v in s) for s in d["sites"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DcmcIOError(f"{path}: malformed lattice header ({exc})") from exc
    if sorted(sites) != sorted(w.sites()):
        raise DcmcIOError(f"{path}: site list does not match window {w.as_tuple()}")
    coeffs = _complex_array(d, (len(sites), 2 * N + 1, 2, 2), path)
    frames = {s: TwistedLoop(coeffs[i]) for i, s in enumerate(sites)}
    L = LatticeFrame(w, c, frames, {}, N, str(d.get("order", "row")))
    L.max_curvature_residual = _frame_curvature(L)
    return L


def save_seed(seed: DressingSeed, path) -> None:
    h = seed.h_plus
    d = {
        "format": "dcmc-seed",
        "N": h.N,
        "description": seed.description,
        "re": h.coeffs.real.ravel().tolist(),
        "im": h.coeffs.imag.ravel().tolist(),
    }
    _write_text(path, json.dumps(d, separators=(",", ":")) + "\n")


def load_seed(path) -> DressingSeed:
    d = _read_json(path, "dcmc-seed")
    try:
        N = int(d["N"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DcmcIOError(f"{path}: missing truncation N") from exc
    c = _complex_array(d, (2 * N + 1, 2, 2), path)
    try:
        return DressingSeed(TwistedLoop(c), str(d.get("description", f"file {os.path.basename(path)}")))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


# -- reports -----------------------------------------------------------------


def _clean(x):
    """JSON-safe copy: NaN/inf become strings, numpy scalars become Python."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.complexfloating, complex)):
        return [_clean(x.real), _clean(x.imag)]
    return x


class Report:
    """Accumulates text sections and a machine-readable trailer."""

    def __init__(self, command: str, config_sha256: str):
        self.command = command
        self.sections: list[tuple[str, list[str]]] = []
        self.data: dict = {"command": command, "config_sha256": config_sha256, "version": __version__}

    def section(self, title: str, rows) -> None:
        lines = []
        for row in rows:
            if isinstance(row, tuple):
                key, val = row
                lines.append(f"{key}: {_fmt(val)}")
            else:
                lines.append(str(row))
        self.sections.append((title, lines))

    def put(self, key: str, value) -> None:
        self.data[key] = value

    def text(self) -> str:
        head = [f"dcmc {__version__} {self.command}", f"config sha256: {self.data['config_sha256']}", ""]
        body = []
        for title, lines in self.sections:
            body += [f"== {title} ==", *lines, ""]
        trailer = json.dumps(_clean(self.data), sort_keys=True, indent=1)
        return "\n".join(head + body + [TRAILER_BEGIN, trailer, TRAILER_END]) + "\n"

    def write(self, path) -> None:
        _write_text(path, self.text())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "PASS" if v else "FAIL"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6e}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.12g}{v.imag:+.12g}i"
    return str(v)


def read_trailer(path_or_text) -> dict:
    """Parse the JSON trailer of a report (path or text)."""
    text = path_or_text
    if TRAILER_BEGIN not in str(text):
        try:
            with open(os.fspath(path_or_text)) as fh:
                text = fh.read()
        except OSError as exc:
            raise DcmcIOError(f"cannot read {path_or_text}: {exc}") from exc
    try:
        body = text.split(TRAILER_BEGIN, 1)[1].split(TRAILER_END, 1)[0]
        return json.loads(body)
    except (IndexError, json.JSONDecodeError) as exc:
        raise DcmcIOError("report has no valid trailer block") from exc
