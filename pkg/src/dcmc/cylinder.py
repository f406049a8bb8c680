"""The discrete standard cylinder and its vacuum frame."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WindowOverflowError
from .loops import (
    A,
    DEFAULT_N,
    I2,
    LaurentSeries,
    TwistedLoop,
    circle_points,
    sample_count,
)

WINDOW_LIMIT = 512
TAIL_GUARD = 1e-10


@dataclass(frozen=True)
class LatticeConstants:
    r1: float
    r2: float

    def __post_init__(self):
        if not (self.r1 > 0 and self.r2 > 0) or not (math.isfinite(self.r1) and math.isfinite(self.r2)):
            raise ValidationError(f"lattice constants must be positive, got r1={self.r1}, r2={self.r2}")


def lambda_plus(r1: float) -> float:
    """Real zero > 1 of Delta_+^2 = 1 - r1^2 (1/lambda - lambda)^2."""
    return 1.0 / (2.0 * r1) + math.sqrt(1.0 + 1.0 / (4.0 * r1 * r1))


def lambda_minus(r2: float) -> float:
    """Modulus > 1 of the imaginary zeros of Delta_-^2."""
    return 1.0 / (2.0 * r2) + math.sqrt(1.0 + 1.0 / (4.0 * r2 * r2))


def r_min(c: LatticeConstants) -> float:
    return max(1.0 / lambda_plus(c.r1), 1.0 / lambda_minus(c.r2))


def delta_plus_sq(lam, r1):
    return 1.0 - r1 * r1 * (1.0 / lam - lam) ** 2


def delta_minus_sq(lam, r2):
    return 1.0 + r2 * r2 * (1.0 / lam + lam) ** 2


def u0_matrix(lam, r1):
    """Delta_+ U0 = I + r1 (1/lam - lam) A, vectorised over lam."""
    lam = np.asarray(lam, dtype=complex)
    return I2 + (r1 * (1.0 / lam - lam))[..., None, None] * A


def v0_matrix(lam, r2):
    """Delta_- V0 = I + i r2 (1/lam + lam) A."""
    lam = np.asarray(lam, dtype=complex)
    return I2 + (1j * r2 * (1.0 / lam + lam))[..., None, None] * A


@dataclass(frozen=True)
class CylinderData:
    constants: LatticeConstants
    N: int
    lam_plus: float
    lam_minus: float
    r_min: float
    U0: TwistedLoop
    V0: TwistedLoop
    delta_plus: LaurentSeries
    delta_minus: LaurentSeries
    window_limit: int = WINDOW_LIMIT

    def generator(self, which: str) -> TwistedLoop:
        return {"U": self.U0, "V": self.V0}[which]


def make_cylinder(c: LatticeConstants, N: int = DEFAULT_N, window_limit: int = WINDOW_LIMIT) -> CylinderData:
    """Generators U0, V0 of the discrete cylinder with lattice constants ``c``.

    Delta_+ and Delta_- are taken as the positive square roots of their
    (real, >= 1) squares on the unit circle; the FFT then continues them to
    the annulus where they are holomorphic.
    """
    if not isinstance(c, LatticeConstants):
        c = LatticeConstants(*c)
    lam = circle_points(sample_count(N))
    dp = np.sqrt(delta_plus_sq(lam, c.r1).real)
    dm = np.sqrt(delta_minus_sq(lam, c.r2).real)
    U0 = TwistedLoop.from_samples(u0_matrix(lam, c.r1) / dp[:, None, None], N)
    V0 = TwistedLoop.from_samples(v0_matrix(lam, c.r2) / dm[:, None, None], N)
    return CylinderData(
        constants=c,
        N=N,
        lam_plus=lambda_plus(c.r1),
        lam_minus=lambda_minus(c.r2),
        r_min=r_min(c),
        U0=U0,
        V0=V0,
        delta_plus=LaurentSeries.from_samples(dp, N).project_parity("even"),
        delta_minus=LaurentSeries.from_samples(dm, N).project_parity("even"),
        window_limit=window_limit,
    )


def vacuum_frame(cyl: CylinderData, m: int, n: int) -> TwistedLoop:
    """F0_mn = U0^m V0^n, computed pointwise on the circle."""
    if abs(m) > cyl.window_limit or abs(n) > cyl.window_limit:
        raise WindowOverflowError(f"site ({m}, {n}) outside window limit {cyl.window_limit}")
    M = sample_count(cyl.N)
    u = np.linalg.matrix_power(cyl.U0.samples(M), m)
    v = np.linalg.matrix_power(cyl.V0.samples(M), n)
    F = TwistedLoop.from_samples(u @ v, cyl.N)
    if F.tail > TAIL_GUARD:
        raise WindowOverflowError(
            f"F0_({m},{n}) has coefficient mass {F.tail:.2e} beyond degree {cyl.N}; raise N"
        )
    return F
