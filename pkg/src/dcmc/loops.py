"""Twisted 2x2 matrix loops stored as truncated Laurent series.

A loop ``g(lambda)`` is represented by its Laurent coefficients
``c_n`` for ``-N <= n <= N`` on the unit circle.  Pointwise work
(products, inverses, exponentials) is done on ``4N`` equispaced samples
of the circle and transformed back with the FFT; every loop that occurs in
this package is holomorphic on an annulus around the circle, so the
coefficients decay geometrically and hard truncation is harmless.

Twisting means ``g(-lambda) = sigma_3 g(lambda) sigma_3``: diagonal
entries are even and off-diagonal entries odd in ``lambda``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IncompatibleLoopsError, SingularLoopError, TrustAnnulusWarning

DEFAULT_N = 128
DEFAULT_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
A = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA1 = A
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)

# entries that are allowed for even / odd degrees of a twisted loop
_DIAG = np.array([[True, False], [False, True]])
_OFFDIAG = ~_DIAG


def sample_count(N: int) -> int:
    """Number of circle samples used for a series of truncation degree N."""
    return 4 * N


def circle_points(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def _coeffs_to_samples(coeffs: np.ndarray, M: int) -> np.ndarray:
    N = (coeffs.shape[0] - 1) // 2
    buf = np.zeros((M,) + coeffs.shape[1:], dtype=complex)
    degrees = np.arange(-N, N + 1)
    buf[degrees % M] = coeffs
    return np.fft.ifft(buf, axis=0) * M


def _samples_to_coeffs(values: np.ndarray, N: int) -> tuple[np.ndarray, float]:
    """Return (coefficients in [-N, N], max modulus of the discarded band)."""
    M = values.shape[0]
    full = np.fft.fft(values, axis=0) / M
    degrees = np.arange(-N, N + 1)
    coeffs = full[degrees % M]
    keep = np.zeros(M, dtype=bool)
    keep[degrees % M] = True
    tail = float(np.max(np.abs(full[~keep]))) if (~keep).any() else 0.0
    return coeffs, tail


def _readonly(a: np.ndarray) -> np.ndarray:
    if a.flags.writeable:
        a = a.copy()  # never freeze the caller's array
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LaurentSeries:
    """Scalar Laurent series with coefficients indexed by degree -N..N."""

    coeffs: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.shape[0] % 2 != 1:
            raise ValueError("LaurentSeries needs an odd-length 1-d coefficient array")
        object.__setattr__(self, "coeffs", _readonly(c))

    @property
    def N(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @classmethod
    def constant(cls, value: complex, N: int = DEFAULT_N) -> "LaurentSeries":
        c = np.zeros(2 * N + 1, dtype=complex)
        c[N] = value
        return cls(c)

    @classmethod
    def from_samples(cls, values: np.ndarray, N: int) -> "LaurentSeries":
        coeffs, _ = _samples_to_coeffs(np.asarray(values, dtype=complex), N)
        return cls(coeffs)

    @classmethod
    def from_function(cls, f: Callable, N: int = DEFAULT_N) -> "LaurentSeries":
        lam = circle_points(sample_count(N))
        return cls.from_samples(f(lam), N)

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.N:
            return 0j
        return complex(self.coeffs[n + self.N])

    def samples(self, M: int | None = None) -> np.ndarray:
        return _coeffs_to_samples(self.coeffs, M or sample_count(self.N))

    def evaluate(self, lam):
        lam = np.asarray(lam, dtype=complex)
        n = np.arange(-self.N, self.N + 1)
        return np.sum(self.coeffs * lam[..., None] ** n, axis=-1)

    def parity_residual(self, parity: str) -> float:
        """Largest coefficient of the wrong parity ('even' or 'odd')."""
        n = np.arange(-self.N, self.N + 1)
        wrong = (n % 2 == 1) if parity == "even" else (n % 2 == 0)
        return float(np.max(np.abs(self.coeffs[wrong]), initial=0.0))

    def project_parity(self, parity: str) -> "LaurentSeries":
        n = np.arange(-self.N, self.N + 1)
        wrong = (n % 2 == 1) if parity == "even" else (n % 2 == 0)
        c = self.coeffs.copy()
        c[wrong] = 0
        return LaurentSeries(c, self.radius)

    def _binary(self, other, op):
        if isinstance(other, LaurentSeries):
            _check_radius(self.radius, other.radius)
            N = max(self.N, other.N)
            M = sample_count(N)
            vals = op(self.promote(N).samples(M), other.promote(N).samples(M))
            return LaurentSeries(_samples_to_coeffs(vals, N)[0], self.radius)
        return LaurentSeries.from_samples(op(self.samples(), other), self.N)

    def promote(self, N: int) -> "LaurentSeries":
        if N == self.N:
            return self
        return LaurentSeries(_resize(self.coeffs, N), self.radius)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, LaurentSeries):
            N = max(self.N, other.N)
            return LaurentSeries(self.promote(N).coeffs + other.promote(N).coeffs, self.radius)
        c = self.coeffs.copy()
        c[self.N] += other
        return LaurentSeries(c, self.radius)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(-self.coeffs, self.radius)

    def __sub__(self, other):
        return self + (-other)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))


def _resize(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Pad with zeros or truncate a coefficient array to degree N."""
    old = (coeffs.shape[0] - 1) // 2
    out = np.zeros((2 * N + 1,) + coeffs.shape[1:], dtype=complex)
    k = min(old, N)
    out[N - k : N + k + 1] = coeffs[old - k : old + k + 1]
    return out


def _check_radius(r1: float, r2: float):
    if not np.isclose(r1, r2, rtol=0, atol=1e-14):
        raise IncompatibleLoopsError(f"loops live on different circles (r={r1} vs r={r2})")


@dataclass(frozen=True)
class TwistedLoop:
    """2x2 matrix loop; ``coeffs[k]`` is the coefficient of degree ``k - N``.

    ``tail`` records the largest coefficient dropped by the last truncation
    that produced this loop.
    """

    coeffs: np.ndarray
    twisted: bool = True
    radius: float = 1.0
    tail: float = field(default=0.0, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1:] != (2, 2) or c.shape[0] % 2 != 1:
            raise ValueError("TwistedLoop needs coefficients of shape (2N+1, 2, 2)")
        object.__setattr__(self, "coeffs", _readonly(c))

    @property
    def N(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    # -- construction -----------------------------------------------------

    @classmethod
    def identity(cls, N: int = DEFAULT_N) -> "TwistedLoop":
        return cls.constant(I2, N)

    @classmethod
    def constant(cls, mat, N: int = DEFAULT_N, twisted: bool | None = None) -> "TwistedLoop":
        mat = np.asarray(mat, dtype=complex)
        c = np.zeros((2 * N + 1, 2, 2), dtype=complex)
        c[N] = mat
        if twisted is None:
            twisted = bool(np.all(np.abs(mat[_OFFDIAG]) == 0))
        return cls(c, twisted)

    @classmethod
    def from_samples(cls, values, N: int, twisted: bool = True, project: bool = True) -> "TwistedLoop":
        coeffs, tail = _samples_to_coeffs(np.asarray(values, dtype=complex), N)
        loop = cls(coeffs, twisted, tail=tail)
        if twisted and project:
            loop = loop.project_parity()
        return loop

    @classmethod
    def from_function(cls, f: Callable, N: int = DEFAULT_N, twisted: bool = True) -> "TwistedLoop":
        """Build a loop from a vectorised ``f(lam) -> (..., 2, 2)`` on the circle."""
        lam = circle_points(sample_count(N))
        return cls.from_samples(f(lam), N, twisted)

    # -- views --------------------------------------------------------------

    def entry(self, i: int, j: int) -> LaurentSeries:
        return LaurentSeries(self.coeffs[:, i, j], self.radius)

    def coefficient(self, n: int) -> np.ndarray:
        if abs(n) > self.N:
            return np.zeros((2, 2), dtype=complex)
        return np.array(self.coeffs[n + self.N])

    def samples(self, M: int | None = None) -> np.ndarray:
        return _coeffs_to_samples(self.coeffs, M or sample_count(self.N))

    def promote(self, N: int) -> "TwistedLoop":
        if N == self.N:
            return self
        return TwistedLoop(_resize(self.coeffs, N), self.twisted, self.radius, self.tail)

    def at_one(self) -> np.ndarray:
        """Value at lambda = 1."""
        return self.coeffs.sum(axis=0)

    def dtheta_at_one(self) -> np.ndarray:
        """d/dtheta of g(e^{i theta}) at theta = 0, i.e. sum of i n c_n."""
        n = np.arange(-self.N, self.N + 1)
        return np.tensordot(1j * n, self.coeffs, axes=(0, 0))

    def parity_residual(self) -> float:
        """Largest coefficient violating the twisting condition."""
        even = self.coeffs[self.N % 2 :: 2]  # degrees with n even
        odd = self.coeffs[(self.N + 1) % 2 :: 2]
        return float(
            max(np.max(np.abs(even[:, _OFFDIAG]), initial=0.0), np.max(np.abs(odd[:, _DIAG]), initial=0.0))
        )

    def project_parity(self) -> "TwistedLoop":
        c = self.coeffs.copy()
        c[self.N % 2 :: 2][:, _OFFDIAG] = 0
        c[(self.N + 1) % 2 :: 2][:, _DIAG] = 0
        return TwistedLoop(c, True, self.radius, self.tail)

    def det(self) -> LaurentSeries:
        vals = np.linalg.det(self.samples())
        return LaurentSeries.from_samples(vals, self.N)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def negative_part_norm(self) -> float:
        """Largest coefficient of negative degree (zero for plus loops)."""
        return float(np.max(np.abs(self.coeffs[: self.N]), initial=0.0))

    def distance(self, other: "TwistedLoop") -> float:
        """Coefficient max-norm of the difference."""
        N = max(self.N, other.N)
        return float(np.max(np.abs(self.promote(N).coeffs - other.promote(N).coeffs)))

    def scaled(self, s) -> "TwistedLoop":
        """Multiply by a scalar or by a scalar LaurentSeries."""
        if isinstance(s, LaurentSeries):
            M = sample_count(self.N)
            vals = self.samples(M) * s.promote(self.N).samples(M)[:, None, None]
            return TwistedLoop.from_samples(vals, self.N, self.twisted, project=False)
        return TwistedLoop(self.coeffs * s, self.twisted, self.radius)

    def __matmul__(self, other: "TwistedLoop") -> "TwistedLoop":
        return multiply(self, other)

    def __add__(self, other: "TwistedLoop") -> "TwistedLoop":
        N = max(self.N, other.N)
        return TwistedLoop(self.promote(N).coeffs + other.promote(N).coeffs, self.twisted and other.twisted, self.radius)

    def __sub__(self, other: "TwistedLoop") -> "TwistedLoop":
        return self + other.scaled(-1)


def _pointwise(loops, fn, N=None, twisted=None) -> TwistedLoop:
    r = loops[0].radius
    for g in loops[1:]:
        _check_radius(r, g.radius)
    N = N or max(g.N for g in loops)
    M = sample_count(N)
    vals = fn(*[g.promote(N).samples(M) for g in loops])
    if twisted is None:
        twisted = all(g.twisted for g in loops)
    out = TwistedLoop.from_samples(vals, N, twisted, project=False)
    if twisted:
        out = out.project_parity()
    return TwistedLoop(out.coeffs, twisted, r, out.tail)


def multiply(a: TwistedLoop, b: TwistedLoop) -> TwistedLoop:
    """Loop product, truncated back to the larger of the two degrees.

    The dropped band is recorded in ``tail`` of the result.
    """
    return _pointwise((a, b), np.matmul)


def multiply_all(*loops: TwistedLoop) -> TwistedLoop:
    return _pointwise(loops, lambda *vals: _chain(vals))


def _chain(vals):
    out = vals[0]
    for v in vals[1:]:
        out = out @ v
    return out


def inverse(g: TwistedLoop, min_det: float = 1e-10) -> TwistedLoop:
    """Pointwise inverse ``adj(g) / det(g)`` on the circle."""

    def inv(vals):
        det = vals[:, 0, 0] * vals[:, 1, 1] - vals[:, 0, 1] * vals[:, 1, 0]
        worst = float(np.min(np.abs(det)))
        if worst < min_det:
            raise SingularLoopError(f"determinant nearly vanishes on the circle (min |det| = {worst:.3e})")
        adj = np.empty_like(vals)
        adj[:, 0, 0] = vals[:, 1, 1]
        adj[:, 1, 1] = vals[:, 0, 0]
        adj[:, 0, 1] = -vals[:, 0, 1]
        adj[:, 1, 0] = -vals[:, 1, 0]
        return adj / det[:, None, None]

    return _pointwise((g,), inv)


def star(g: TwistedLoop) -> TwistedLoop:
    """Reality involution ``g*(lambda) = conj(g(1/conj(lambda)))^T``.

    On coefficients: degree n of the result is the conjugate transpose of
    degree -n of the input.  Exact, no resampling.
    """
    c = np.conj(np.swapaxes(g.coeffs[::-1], 1, 2))
    return TwistedLoop(c, g.twisted, g.radius, g.tail)


def unitarity_defect(g: TwistedLoop) -> float:
    """max over circle samples of |g^H g - I|."""
    v = g.samples()
    return float(np.max(np.abs(np.conj(np.swapaxes(v, 1, 2)) @ v - I2)))


def analyticity_radius(
    g: TwistedLoop | LaurentSeries, floor: float = 1e-13, cliff: float = 1e3
) -> float:
    """Estimate rho with |c_n| ~ C rho^|n|, i.e. g holomorphic on rho < |lambda| < 1/rho.

    The fit uses the top third of the degrees whose coefficients lie above
    ``floor`` (relative to the largest coefficient).  A drop by more than
    ``cliff`` in one step past the last significant degree means the
    series terminates within the truncation; that side then counts as 0.
    """
    c = np.abs(g.coeffs).reshape(g.coeffs.shape[0], -1).max(axis=1)
    N = (c.shape[0] - 1) // 2
    scale = c.max()
    if scale == 0:
        return 0.0
    thresh = floor * scale
    rhos = []
    for side in (c[N + 1 :], c[:N][::-1]):
        # side[k] is the envelope at degree k+1; merge neighbours to bridge parity gaps
        env = side.copy()
        env[:-1] = np.maximum(side[:-1], side[1:])
        above = np.nonzero(side > thresh)[0]
        if above.size == 0:
            rhos.append(0.0)
            continue
        last = above[-1]
        if last + 1 < side.size and side[last] > cliff * max(side[last + 1 :].max(initial=0.0), thresh):
            rhos.append(0.0)
            continue
        lo = (2 * (last + 1)) // 3
        idx = np.arange(lo, last + 1)
        idx = idx[env[idx] > thresh]
        if idx.size < 2:
            rhos.append(float(min(1.0, (side[last] / scale) ** (1.0 / (last + 1)))))
            continue
        slope = np.polyfit(idx + 1.0, np.log(env[idx]), 1)[0]
        rhos.append(float(min(1.0, np.exp(slope))))
    return max(rhos)


def evaluate(g: TwistedLoop, lam: complex) -> np.ndarray:
    """Evaluate the truncated series at ``lam``.

    Warns with :class:`TrustAnnulusWarning` when ``lam`` lies outside the
    annulus ``rho <= |lam| <= 1/rho`` estimated by :func:`analyticity_radius`.
    """
    lam = complex(lam)
    mod = abs(lam)
    if not np.isclose(mod, 1.0):
        rho = analyticity_radius(g)
        if mod < rho or mod > 1.0 / max(rho, 1e-300):
            warnings.warn(
                f"|lambda| = {mod:.4g} outside trust annulus [{rho:.4g}, {1 / max(rho, 1e-300):.4g}]",
                TrustAnnulusWarning,
                stacklevel=2,
            )
    n = np.arange(-g.N, g.N + 1)
    return np.tensordot(lam**n, g.coeffs, axes=(0, 0))


def expm_traceless(x: np.ndarray) -> np.ndarray:
    """exp of a stack of traceless 2x2 matrices: cosh(s) I + sinh(s)/s x, s^2 = -det x."""
    s2 = -(x[..., 0, 0] * x[..., 1, 1] - x[..., 0, 1] * x[..., 1, 0])
    s = np.sqrt(s2)
    small = np.abs(s) < 1e-8
    safe = np.where(small, 1.0, s)
    sinhc = np.where(small, 1.0 + s2 / 6.0, np.sinh(safe) / safe)
    return np.cosh(s)[..., None, None] * I2 + sinhc[..., None, None] * x


def loop_exp(x: TwistedLoop) -> TwistedLoop:
    """Pointwise exponential of a traceless loop (a Lie-algebra loop)."""
    return _pointwise((x,), expm_traceless)


def matrix_norm(m) -> float:
    return float(np.max(np.abs(m)))
