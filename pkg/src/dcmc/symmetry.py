"""Lattice symmetries: shifts (k, l) under which the surface moves rigidly.

A shift is a symmetry exactly when there is a unitary loop chi and a
constant diagonal k = diag(e^{i phi/2}, e^{-i phi/2}) with

    F_{m+k,n+l} = chi F_mn k^{(-1)^{m+n+1}}

for all sites.  Detection runs three stages: invariance of the metric
data p, q; estimation of phi from the phases of alpha; and verification
of the frame relation with chi read off at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndeterminatePhaseError, NumericalError, ValidationError
from .geometry import spinor, unspinor
from .lattice import LatticeFrame, LaxField
from .loops import I2, TwistedLoop, analyticity_radius, multiply, star

SYMMETRY_TOL = 1e-6
MIN_SITES = 8
PHASE_FLOOR = 1e-6


@dataclass(frozen=True)
class SymmetryCertificate:
    shift: tuple[int, int]
    chi: TwistedLoop
    phase: float
    max_residual: float
    holomorphy_estimate: float
    sites_tested: int = 0
    accepted: bool = True

    @property
    def k_matrix(self) -> np.ndarray:
        return phase_matrix(self.phase)


@dataclass(frozen=True)
class SymmetryRejection:
    shift: tuple[int, int]
    stage: str
    reason: str
    residual: float
    accepted: bool = False


def phase_matrix(phi: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])


@dataclass(frozen=True)
class EuclideanMotion:
    """x -> R x + t with R given by its spinor (R(x) = Ad(rotation) x)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=complex)
        if np.max(np.abs(R.conj().T @ R - I2)) > 1e-8 or abs(np.linalg.det(R) - 1) > 1e-8:
            raise NumericalError("rotation spinor is not in SU(2)")

    @classmethod
    def identity(cls) -> "EuclideanMotion":
        return cls(I2.copy(), np.zeros(3))

    def rotation_matrix(self) -> np.ndarray:
        """SO(3) matrix of the rotation."""
        R = self.rotation
        cols = [unspinor(R @ spinor(e) @ R.conj().T) for e in np.eye(3)]
        return np.array(cols).T

    def apply(self, x) -> np.ndarray:
        return self.rotation_matrix() @ np.asarray(x, dtype=float) + self.translation

    def compose(self, other: "EuclideanMotion") -> "EuclideanMotion":
        """self after other."""
        return EuclideanMotion(
            self.rotation @ other.rotation, self.rotation_matrix() @ other.translation + self.translation
        )

    def distance(self, other: "EuclideanMotion") -> float:
        """Max-norm distance of the affine maps (sign of the spinor ignored)."""
        return float(
            max(
                np.max(np.abs(self.rotation_matrix() - other.rotation_matrix())),
                np.max(np.abs(self.translation - other.translation)),
            )
        )


def _test_sites(L: LatticeFrame, k: int, l: int):
    w = L.window
    return [(m, n) for m, n in w.sites() if (m + k, n + l) in w]


def _estimate_phase(lax: LaxField, sites, k, l) -> float:
    w = lax.window
    for field in (lax.alpha, lax.beta):
        acc, count = 0j, 0
        for m, n in sites:
            a0, a1 = field[w.index(m, n)], field[w.index(m + k, n + l)]
            if not (np.isfinite(a0) and np.isfinite(a1)):
                continue
            if abs(a0) < PHASE_FLOOR or abs(a1) < PHASE_FLOOR:
                continue
            ratio = a1 / a0
            acc += ratio if (m + n) % 2 == 0 else 1 / ratio
            count += 1
        if count and abs(acc) > 0:
            phi = float(np.angle(acc)) % (2 * np.pi)
            # phi and phi + 2 pi give k and -k; snap roundoff below 2 pi to 0
            return 0.0 if 2 * np.pi - phi < 1e-12 else phi
    raise IndeterminatePhaseError("alpha and beta vanish at every test site; phase undefined")


def detect_symmetry(
    L: LatticeFrame,
    lax: LaxField,
    shift: tuple[int, int],
    tol: float = SYMMETRY_TOL,
    min_sites: int = MIN_SITES,
):
    """Certify or reject the shift ``(k, l)`` on the lattice ``L``.

    Returns a :class:`SymmetryCertificate` or a :class:`SymmetryRejection`
    naming the failed stage ('metric', 'frame').
    """
    k, l = map(int, shift)
    if (k, l) == (0, 0):
        raise ValidationError("shift (0, 0) is not a candidate symmetry")
    w = L.window
    sites = _test_sites(L, k, l)
    if len(sites) < min_sites or (k, l) not in w or (0, 0) not in w:
        raise ValidationError(
            f"window {w.as_tuple()} too small to test shift {(k, l)} on {min_sites} sites"
        )

    # stage 1: metric data must be shift invariant
    worst = 0.0
    for field in (lax.p, lax.q):
        for m, n in sites:
            a, b = field[w.index(m, n)], field[w.index(m + k, n + l)]
            if np.isfinite(a) and np.isfinite(b):
                worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    if worst > tol:
        return SymmetryRejection((k, l), "metric", "p or q not invariant under the shift", worst)

    # stage 2: phase of k
    phi = _estimate_phase(lax, sites, k, l)
    km = phase_matrix(phi)

    # stage 3: chi from the origin, then the frame relation everywhere
    N = L.N
    chi = multiply(multiply(L.frame(k, l), TwistedLoop.constant(km, N, twisted=True)), star(L.frame(0, 0)))
    kp, km_inv = TwistedLoop.constant(km, N, True), TwistedLoop.constant(km.conj(), N, True)
    worst = 0.0
    for m, n in sites:
        right = km_inv if (m + n) % 2 == 0 else kp  # k^{(-1)^{m+n+1}}
        pred = multiply(multiply(chi, L.frame(m, n)), right)
        worst = max(worst, pred.distance(L.frame(m + k, n + l)))
    if worst > tol:
        return SymmetryRejection((k, l), "frame", "frame relation fails", worst)
    return SymmetryCertificate((k, l), chi, phi, worst, analyticity_radius(chi), len(sites))


def euclidean_motion(cert: SymmetryCertificate, tol: float = 1e-8) -> EuclideanMotion:
    """Rigid motion x -> R x + t relating the surface to its shifted copy.

    R has spinor chi(1) and J(t) = d/dtheta chi(e^{i theta})|_0 chi(1)^{-1}.
    """
    C1 = cert.chi.at_one()
    if np.max(np.abs(C1.conj().T @ C1 - I2)) > tol:
        raise NumericalError("chi(1) is not unitary")
    Jt = cert.chi.dtheta_at_one() @ np.linalg.inv(C1)
    return EuclideanMotion(C1, unspinor(Jt, tol=tol))


def is_period(cert: SymmetryCertificate, tol: float = 1e-8) -> bool:
    C1 = cert.chi.at_one()
    sign_ok = min(np.max(np.abs(C1 - I2)), np.max(np.abs(C1 + I2))) < tol
    return bool(sign_ok and np.max(np.abs(cert.chi.dtheta_at_one())) < tol)


def certificate_dict(cert) -> dict:
    if not cert.accepted:
        return {
            "shift": list(cert.shift),
            "accepted": False,
            "stage": cert.stage,
            "reason": cert.reason,
            "residual": cert.residual,
        }
    mot = euclidean_motion(cert)
    return {
        "shift": list(cert.shift),
        "accepted": True,
        "phase": cert.phase,
        "max_residual": cert.max_residual,
        "holomorphy_estimate": cert.holomorphy_estimate,
        "sites_tested": cert.sites_tested,
        "is_period": is_period(cert),
        "rotation": [[[z.real, z.imag] for z in row] for row in mot.rotation],
        "translation": mot.translation.tolist(),
    }
