"""The hyperelliptic curve mu^2 = nu prod (nu - nu_k) attached to a^2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .rational import CLUSTER_TOL, RationalFunction

CIRCLE_TOL = 1e-8


def tau(nu):
    """Reflection in the unit circle."""
    return 1 / np.conj(nu)


@dataclass(frozen=True)
class HyperellipticCurve:
    branch_points: tuple  # nu_1, nu_2, ... with nu_{2n} = tau(nu_{2n-1}), |nu_{2n-1}| < 1
    mu2: RationalFunction  # polynomial in nu

    @property
    def genus(self) -> int:
        return len(self.branch_points) // 2

    @property
    def pairs(self) -> list[tuple[complex, complex]]:
        b = self.branch_points
        return [(b[2 * i], b[2 * i + 1]) for i in range(self.genus)]

    def pairing_residual(self) -> float:
        return max((abs(q - tau(p)) for p, q in self.pairs), default=0.0)

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "branch_pairs": [[[p.real, p.imag], [q.real, q.imag]] for p, q in self.pairs],
            "pairing_residual": self.pairing_residual(),
        }


def _as_nu(a2: RationalFunction) -> RationalFunction:
    if a2.var == "nu":
        return a2
    return a2.in_nu()


def curve_from_a2(a2: RationalFunction, cluster_tol: float = CLUSTER_TOL) -> HyperellipticCurve:
    """Branch the nu-plane at the nonzero points where a^2 has odd order."""
    f = _as_nu(a2)
    if f.is_zero():
        raise ValidationError("a^2 = 0 defines no curve")
    odd = [z for z, o in f.divisor(cluster_tol) if o % 2]
    for z in odd:
        if abs(abs(z) - 1) < CIRCLE_TOL:
            raise ValidationError(f"odd-order point of a^2 on the unit circle at nu = {z:.6g}")
    inner = sorted((z for z in odd if abs(z) < 1), key=lambda z: (abs(z), np.angle(z)))
    outer = [z for z in odd if abs(z) > 1]
    if len(inner) != len(outer):
        raise ValidationError(f"{len(odd)} odd-order points cannot be paired by the circle reflection")
    pts = []
    for z in inner:
        j = int(np.argmin([abs(w - tau(z)) for w in outer]))
        w = outer.pop(j)
        if abs(w - tau(z)) > cluster_tol * max(1.0, abs(w)):
            raise ValidationError(f"branch point {z:.6g} has no partner at tau(nu) = {tau(z):.6g}")
        pts += [z, w]
    num = np.array([0, 1], dtype=complex)
    P = np.polynomial.polynomial
    for z in pts:
        num = P.polymul(num, [-z, 1])
    return HyperellipticCurve(tuple(complex(z) for z in pts), RationalFunction(num, var="nu"))


@dataclass
class CurveCheck:
    f_squared: RationalFunction
    divisor: list  # (point, order of f) including 0 when nonzero
    all_even: bool
    finite_at_zero: bool
    f: RationalFunction | None

    def to_dict(self) -> dict:
        return {
            "all_even": self.all_even,
            "finite_at_zero": self.finite_at_zero,
            "divisor": [[[z.real, z.imag], o] for z, o in self.divisor],
        }


def verify_a_on_curve(a2: RationalFunction, curve: HyperellipticCurve, cluster_tol: float = CLUSTER_TOL) -> CurveCheck:
    """Check a^2 = f^2 mu^2 with f rational on the nu-plane.

    Raises ValidationError when a^2 / mu^2 has a point of odd order, i.e.
    a is not meromorphic on the curve.
    """
    f2 = _as_nu(a2) / curve.mu2
    div = f2.divisor(cluster_tol)
    o0 = f2.order_at_zero()
    bad = [(z, o) for z, o in div if o % 2]
    if o0 % 2:
        bad.append((0j, o0))
    if bad:
        raise ValidationError(
            "a^2 / mu^2 has odd order at " + ", ".join(f"{z:.6g} ({o})" for z, o in bad)
        )
    fdiv = [(z, o // 2) for z, o in div]
    lead = complex(f2.num[-1] / f2.den[-1])
    f = RationalFunction.from_divisor(np.sqrt(lead), fdiv, "nu", o0 // 2)
    table = ([(0j, o0 // 2)] if o0 else []) + fdiv
    return CurveCheck(f2, table, True, o0 >= 0, f)
