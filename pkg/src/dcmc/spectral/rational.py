"""Rational functions with coefficient lists and numerically robust divisors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError

# Relative distance under which computed roots are merged into one point.
# A root of multiplicity m is split by roundoff by about eps**(1/m), so the
# merge radius has to be loose; merged clusters are then confirmed by the
# vanishing of the first m-1 derivatives at the centroid.
CLUSTER_TOL = 1e-3
TIGHT_TOL = 1e-8
DERIV_TOL = 1e-7
ZERO_COEFF = 1e-14


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0:
        return np.zeros(1, dtype=complex)
    nz = np.nonzero(np.abs(c) > ZERO_COEFF * scale)[0]
    return c[: nz[-1] + 1].copy()


def polyval(c: np.ndarray, z):
    """Evaluate an ascending coefficient list."""
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), c)


def _low_order(c: np.ndarray) -> int:
    """Order of vanishing at 0 of an ascending coefficient list."""
    scale = np.max(np.abs(c))
    if scale == 0:
        return 0
    return int(np.nonzero(np.abs(c) > ZERO_COEFF * scale)[0][0])


def root_divisor(c: np.ndarray, cluster_tol=CLUSTER_TOL, tight_tol=TIGHT_TOL) -> list[tuple[complex, int]]:
    """Nonzero roots of a polynomial with multiplicities (roots at 0 excluded)."""
    c = _trim(c)
    c = c[_low_order(c):]
    if c.size <= 1:
        return []
    roots = np.polynomial.polynomial.polyroots(c)
    return _cluster(roots, c, cluster_tol, tight_tol)


def _confirm(z: complex, m: int, c: np.ndarray) -> bool:
    """True if the first m-1 derivatives of the polynomial vanish at z (relatively)."""
    d = c
    for j in range(m):
        if j > 0:
            # relative size of the j-th derivative against its coefficient scale at |z|
            val = abs(polyval(d, z))
            ref = np.sum(np.abs(d) * np.abs(z) ** np.arange(d.size))
            if ref > 0 and val > DERIV_TOL ** (1.0 / (m - j + 1)) * ref:
                return False
        d = np.polynomial.polynomial.polyder(d)
    return True


def _groups(roots, tol):
    groups: list[list[complex]] = []
    for r in sorted(roots, key=lambda z: (round(abs(z), 6), np.angle(z))):
        for g in groups:
            ctr = np.mean(g)
            if abs(r - ctr) <= tol * max(1.0, abs(ctr)):
                g.append(r)
                break
        else:
            groups.append([r])
    return groups


def _cluster(roots, c, cluster_tol, tight_tol):
    out = []
    for g in _groups(roots, cluster_tol):
        z = complex(np.mean(g))
        if len(g) == 1 or _confirm(z, len(g), c):
            out.append((z, len(g)))
        else:
            out.extend((complex(np.mean(h)), len(h)) for h in _groups(g, tight_tol))
    return out


@dataclass(frozen=True)
class RationalFunction:
    """num(z) / den(z) with ascending coefficient lists in the variable ``var``.

    ``var`` is 'lambda' or 'nu' (nu = lambda^2).
    """

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))
    var: str = "lambda"

    def __post_init__(self):
        n, d = _trim(self.num), _trim(self.den)
        if np.all(d == 0):
            raise ValidationError("denominator of a rational function must not vanish identically")
        if self.var not in ("lambda", "nu"):
            raise ValidationError(f"unknown variable tag {self.var!r}")
        object.__setattr__(self, "num", n)
        object.__setattr__(self, "den", d)

    # -- construction ------------------------------------------------------

    @classmethod
    def constant(cls, value, var="lambda"):
        return cls(np.array([value], dtype=complex), var=var)

    @classmethod
    def from_divisor(cls, lead, points, var="lambda", order_at_zero=0):
        """lead * z^order_at_zero * prod (z - p)^{order}."""
        num = np.array([lead], dtype=complex)
        den = np.ones(1, dtype=complex)
        P = np.polynomial.polynomial
        for p, o in points:
            f = np.array([-p, 1], dtype=complex)
            for _ in range(abs(o)):
                if o > 0:
                    num = P.polymul(num, f)
                else:
                    den = P.polymul(den, f)
        z = np.zeros(abs(order_at_zero) + 1, dtype=complex)
        z[-1] = 1
        if order_at_zero > 0:
            num = P.polymul(num, z)
        elif order_at_zero < 0:
            den = P.polymul(den, z)
        return cls(num, den, var)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return polyval(self.num, z) / polyval(self.den, z)

    def in_lambda(self) -> "RationalFunction":
        """Substitute nu = lambda^2."""
        if self.var == "lambda":
            return self
        up = lambda c: np.ravel(np.column_stack([c, np.zeros_like(c)]))[: 2 * c.size - 1]  # noqa: E731
        return RationalFunction(up(self.num), up(self.den), "lambda")

    def in_nu(self, tol: float = 1e-12) -> "RationalFunction":
        """Inverse of :meth:`in_lambda` for even functions."""
        if self.var == "nu":
            return self
        if self.parity_residual("even") > tol:
            raise ValidationError("only even rational functions of lambda are functions of nu")
        n, d = self._even_split()
        return RationalFunction(n, d, "nu")

    def _even_split(self):
        # after cancelling the common power of z an even function has
        # only even powers in numerator and denominator
        n, d = self._strip_common_power()
        return n[0::2], d[0::2]

    def _strip_common_power(self):
        lo = min(_low_order(self.num), _low_order(self.den))
        return self.num[lo:], self.den[lo:]

    def parity_residual(self, parity: str) -> float:
        """Largest relative wrong-parity coefficient ('even' or 'odd' function)."""
        if self.is_zero():
            return 0.0
        n, d = self._strip_common_power()

        def rel(c, keep):
            bad = c[1::2] if keep == "even" else c[0::2]
            return float(np.max(np.abs(bad), initial=0.0) / np.max(np.abs(c)))

        if parity == "even":
            return max(rel(n, "even"), rel(d, "even"))
        # odd: one of num, den is odd; the other even
        return min(max(rel(n, "odd"), rel(d, "even")), max(rel(n, "even"), rel(d, "odd")))

    # -- arithmetic ------------------------------------------------------------

    def _check_var(self, other):
        if isinstance(other, RationalFunction) and other.var != self.var:
            raise ValidationError("rational functions in different variables")

    def __mul__(self, other):
        P = np.polynomial.polynomial
        if isinstance(other, RationalFunction):
            self._check_var(other)
            return RationalFunction(P.polymul(self.num, other.num), P.polymul(self.den, other.den), self.var)
        return RationalFunction(self.num * other, self.den, self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RationalFunction):
            self._check_var(other)
            return self * RationalFunction(other.den, other.num, other.var)
        return RationalFunction(self.num, self.den * other, self.var)

    def __add__(self, other):
        P = np.polynomial.polynomial
        if not isinstance(other, RationalFunction):
            other = RationalFunction.constant(other, self.var)
        self._check_var(other)
        num = P.polyadd(P.polymul(self.num, other.den), P.polymul(other.num, self.den))
        return RationalFunction(num, P.polymul(self.den, other.den), self.var)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __pow__(self, n: int):
        out = RationalFunction.constant(1.0, self.var)
        base = self if n >= 0 else RationalFunction(self.den, self.num, self.var)
        for _ in range(abs(n)):
            out = out * base
        return out

    def star(self) -> "RationalFunction":
        """f*(z) = conj(f(1/conj(z)))."""
        dn, dd = self.num.size - 1, self.den.size - 1
        num = np.conj(self.num[::-1])  # z^dn conj(p(1/conj z))
        den = np.conj(self.den[::-1])
        shift = dd - dn
        P = np.polynomial.polynomial
        zs = np.zeros(abs(shift) + 1, dtype=complex)
        zs[-1] = 1
        if shift > 0:
            num = P.polymul(num, zs)
        elif shift < 0:
            den = P.polymul(den, zs)
        return RationalFunction(num, den, self.var)

    # -- divisor ----------------------------------------------------------------

    def order_at_zero(self) -> int:
        if np.all(self.num == 0):
            return 10**9
        return _low_order(self.num) - _low_order(self.den)

    def order_at_infinity(self) -> int:
        """Order of vanishing at infinity (deg den - deg num)."""
        return (self.den.size - 1) - (self.num.size - 1)

    def is_zero(self) -> bool:
        return bool(np.all(self.num == 0))

    def divisor(self, cluster_tol=CLUSTER_TOL) -> list[tuple[complex, int]]:
        """Zeros (+) and poles (-) in C*, common points cancelled."""
        if self.is_zero():
            return []
        zeros = root_divisor(self.num, cluster_tol)
        poles = root_divisor(self.den, cluster_tol)
        out = []
        used = [False] * len(poles)
        for z, o in zeros:
            for j, (p, q) in enumerate(poles):
                if not used[j] and abs(z - p) <= cluster_tol * max(1.0, abs(p)):
                    used[j] = True
                    o -= q
                    z = 0.5 * (z + p)
                    break
            if o:
                out.append((z, o))
        out.extend((p, -q) for j, (p, q) in enumerate(poles) if not used[j])
        return sorted(out, key=lambda t: (abs(t[0]), np.angle(t[0])))

    def reduced(self, cluster_tol=CLUSTER_TOL) -> "RationalFunction":
        """Rebuild from the divisor, removing numerically common roots."""
        if self.is_zero():
            return self
        div = self.divisor(cluster_tol)
        n_lead = self.num[-1]
        d_lead = self.den[-1]
        return RationalFunction.from_divisor(n_lead / d_lead, div, self.var, self.order_at_zero())

    def to_dict(self) -> dict:
        return {
            "var": self.var,
            "num": [[z.real, z.imag] for z in self.num],
            "den": [[z.real, z.imag] for z in self.den],
        }


def laurent_to_rational(coeffs: np.ndarray, var: str = "lambda", tol: float = 1e-12) -> RationalFunction:
    """Laurent polynomial sum_{n=-N..N} c_n z^n as num / z^N."""
    c = np.asarray(coeffs, dtype=complex)
    N = (c.size - 1) // 2
    c = np.where(np.abs(c) > tol * max(np.max(np.abs(c)), 1e-300), c, 0)
    den = np.zeros(N + 1, dtype=complex)
    den[-1] = 1
    return RationalFunction(c, den, var)
