"""Sym's formula, edge vectors, the discrete metric and mesh export."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .cylinder import LatticeConstants
from .errors import NumericalError, ValidationError
from .lattice import LatticeFrame, LaxField, Window, extract_lax
from .loops import PAULI, SIGMA3, TwistedLoop

FRAME_TOL = 1e-8
EDGE_TOL = 1e-7


def spinor(r) -> np.ndarray:
    """J(r) = -(i/2) sigma.r for r in R^3 (or a stack of vectors)."""
    r = np.asarray(r, dtype=float)
    return -0.5j * np.einsum("...k,kij->...ij", r.astype(complex), np.array(PAULI))


def unspinor(X: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Inverse of :func:`spinor`.  Optionally checks X lies in su(2)."""
    X = np.asarray(X, dtype=complex)
    if tol is not None:
        bad = max(
            float(np.max(np.abs(np.trace(X, axis1=-2, axis2=-1)))),
            float(np.max(np.abs(X + np.conj(np.swapaxes(X, -1, -2))))),
        )
        if bad > tol:
            raise NumericalError(f"matrix is not in su(2) (defect {bad:.2e})")
    # tr(sigma_k J(r)) = -i r_k
    return np.real(1j * np.einsum("kij,...ji->...k", np.array(PAULI), X))


def ad(g: np.ndarray, X: np.ndarray) -> np.ndarray:
    return g @ X @ np.linalg.inv(g)


def sym_matrix(F: TwistedLoop) -> np.ndarray:
    """J(Psi) = dF/dtheta(0) F(1)^{-1} + (i/2) F(1) sigma_3 F(1)^{-1}."""
    F1 = F.at_one()
    F1inv = np.linalg.inv(F1)
    return F.dtheta_at_one() @ F1inv + 0.5j * F1 @ SIGMA3 @ F1inv


def sym_point(F: TwistedLoop, tol: float = FRAME_TOL) -> np.ndarray:
    """Point of R^3 attached to the frame F by Sym's formula."""
    return unspinor(sym_matrix(F), tol=tol)


@dataclass
class DiscreteSurface:
    window: Window
    points: np.ndarray  # (rows, cols, 3), indexed by window.index
    constants: LatticeConstants

    def point(self, m: int, n: int) -> np.ndarray:
        return self.points[self.window.index(m, n)]


def build_surface(L: LatticeFrame) -> DiscreteSurface:
    pts = np.empty(L.window.shape + (3,))
    for site in L.window.sites():
        pts[L.window.index(*site)] = sym_point(L.frame(*site))
    return DiscreteSurface(L.window, pts, L.constants)


def single_point_surface(c: LatticeConstants, N: int = 8) -> DiscreteSurface:
    pts = sym_point(TwistedLoop.identity(N))[None, None, :]
    return DiscreteSurface(Window(0, 0, 0, 0), pts, c)


@dataclass
class EdgeVectors:
    window: Window
    L: np.ndarray  # (rows, cols, 2, 2), NaN where (m+1, n) is outside
    R: np.ndarray
    residual: float

    def det_L(self) -> np.ndarray:
        return _det(self.L)

    def det_R(self) -> np.ndarray:
        return _det(self.R)


def _det(X):
    # closed form so that NaN placeholders pass through quietly
    return (X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]).real


def edge_formula(F1: np.ndarray, which: str, r: float, p, alpha) -> np.ndarray:
    """Closed-form edge vector in su(2) from the frame value F(1) and the Lax data."""
    if which == "L":
        core = np.array([[r * r * (p - 1 / p), r * alpha], [r * np.conj(alpha), -r * r * (p - 1 / p)]])
        pref = -2j * p
    else:
        core = np.array(
            [[r * r * (p + 1 / p), 1j * r * alpha], [-1j * r * np.conj(alpha), -r * r * (p + 1 / p)]]
        )
        pref = -2j * p / (1 + 4 * r * r)
    return pref * ad(F1, core)


def edge_vectors(
    L: LatticeFrame,
    lax: LaxField | None = None,
    surface: DiscreteSurface | None = None,
    tol: float = EDGE_TOL,
) -> EdgeVectors:
    """Edge vectors from the closed formulas, checked against Sym differences.

    Raises NumericalError if the two disagree by more than ``tol``.
    """
    lax = lax if lax is not None else extract_lax(L)
    S = surface if surface is not None else build_surface(L)
    w, c = L.window, L.constants
    Lm = np.full(w.shape + (2, 2), np.nan, dtype=complex)
    Rm = Lm.copy()
    worst = 0.0
    for m, n in w.sites():
        i = w.index(m, n)
        F1 = L.frame(m, n).at_one()
        if (m + 1, n) in w:
            Lm[i] = edge_formula(F1, "L", c.r1, lax.p[i], lax.alpha[i])
            diff = spinor(S.point(m + 1, n) - S.point(m, n))
            worst = max(worst, float(np.max(np.abs(Lm[i] - diff))))
        if (m, n + 1) in w:
            Rm[i] = edge_formula(F1, "R", c.r2, lax.q[i], lax.beta[i])
            diff = spinor(S.point(m, n + 1) - S.point(m, n))
            worst = max(worst, float(np.max(np.abs(Rm[i] - diff))))
    if worst > tol:
        raise NumericalError(f"edge vectors from the Lax data disagree with Sym differences ({worst:.2e})")
    return EdgeVectors(w, Lm, Rm, worst)


def metric(S: DiscreteSurface) -> tuple[np.ndarray, np.ndarray]:
    """Edge lengths (|Psi_{m+1,n} - Psi_mn|, |Psi_{m,n+1} - Psi_mn|).

    Entries past the last row (column) are NaN.
    """
    w = S.window
    if w.shape[0] < 2 or w.shape[1] < 2:
        raise ValidationError("metric needs a window of at least 2x2 sites")
    P = S.points
    lu = np.full(w.shape, np.nan)
    lv = np.full(w.shape, np.nan)
    lu[:-1, :] = np.linalg.norm(P[1:, :] - P[:-1, :], axis=-1)
    lv[:, :-1] = np.linalg.norm(P[:, 1:] - P[:, :-1], axis=-1)
    return lu, lv


def obj_text(S: DiscreteSurface) -> str:
    w = S.window
    a, b = w.shape
    if a < 2 or b < 2:
        raise ValidationError("OBJ export needs a window of at least 2x2 sites")
    lines = [f"# dcmc surface window m={w.m0}..{w.m1} n={w.n0}..{w.n1}"]
    for i in range(a):
        for j in range(b):
            x, y, z = S.points[i, j]
            lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    idx = lambda i, j: i * b + j + 1  # noqa: E731
    for i in range(a - 1):
        for j in range(b - 1):
            lines.append(f"f {idx(i, j)} {idx(i + 1, j)} {idx(i + 1, j + 1)} {idx(i, j + 1)}")
    return "\n".join(lines) + "\n"


def export_obj(S: DiscreteSurface, path) -> None:
    """Write a quad mesh: vertices row-major (m outer), one face per plaquette."""
    text = obj_text(S)
    with open(os.fspath(path), "w", newline="\n") as fh:
        fh.write(text)


def read_obj(path) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    verts, faces = [], []
    with open(os.fspath(path)) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
            elif parts[0] == "f":
                faces.append(tuple(int(t.split("/")[0]) for t in parts[1:]))
    return np.array(verts), faces


def metric_csv(S: DiscreteSurface) -> str:
    lu, lv = metric(S)
    w = S.window
    rows = ["m,n,len_u,len_v"]
    for m, n in w.sites():
        i = w.index(m, n)
        rows.append(f"{m},{n},{_fmt(lu[i])},{_fmt(lv[i])}")
    return "\n".join(rows) + "\n"


def _fmt(x: float) -> str:
    return "" if not np.isfinite(x) else f"{x:.17g}"


def export_metric_csv(S: DiscreteSurface, path) -> None:
    with open(os.fspath(path), "w", newline="\n") as fh:
        fh.write(metric_csv(S))
