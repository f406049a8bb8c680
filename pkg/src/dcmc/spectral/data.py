"""Spectral data of a shift symmetry and the conditions it has to satisfy.

For a dressing seed h_+ let S = h_+ A h_+^{-1} = [[a, b], [c, -a]].  A
shift (k, l) of the dressed lattice is a symmetry when

    Delta_+^{|k|} Delta_-^{|l|} chi = alpha_hat I + beta_hat S,

with alpha_hat, beta_hat the even and odd parts of

    p_hat = (1 + e_k r1 (1/lam - lam))^{|k|} (1 + i e_l r2 (1/lam + lam))^{|l|} exp(f_+),

e_k, e_l the signs of k, l and f_+ odd.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cylinder import LatticeConstants, r_min
from ..errors import NumericalError, ValidationError
from ..lattice import DressingSeed
from ..loops import A, DEFAULT_N, I2, LaurentSeries, TwistedLoop, circle_points, inverse, multiply, sample_count
from .rational import CLUSTER_TOL, RationalFunction, laurent_to_rational, root_divisor

NECESSARY_TOL = 1e-9
SUFFICIENT_TOL = 1e-8
DEFAULT_SAMPLES = 1024


def _odd_poly(f_plus) -> np.ndarray:
    f = np.atleast_1d(np.asarray(f_plus if f_plus is not None else [0.0], dtype=complex))
    if np.any(f[0::2] != 0):
        raise ValidationError("f_plus must be odd: even-degree coefficients must vanish")
    return f


def _sign(x: int) -> int:
    return 1 if x >= 0 else -1


@dataclass(frozen=True)
class PHat:
    """Closed forms of p_hat, alpha_hat, beta_hat for a shift and an odd f_+."""

    shift: tuple[int, int]
    constants: LatticeConstants
    f_plus: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    def __post_init__(self):
        object.__setattr__(self, "f_plus", _odd_poly(self.f_plus))
        k, l = self.shift
        if (k, l) == (0, 0):
            raise ValidationError("shift (0, 0) has no spectral data")

    def f(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.f_plus)

    def df(self, lam):
        return np.polynomial.polynomial.polyval(lam, np.polynomial.polynomial.polyder(self.f_plus))

    def p(self, lam):
        lam = np.asarray(lam, dtype=complex)
        k, l = self.shift
        r1, r2 = self.constants.r1, self.constants.r2
        x, y = 1 / lam - lam, 1 / lam + lam
        return (1 + _sign(k) * r1 * x) ** abs(k) * (1 + 1j * _sign(l) * r2 * y) ** abs(l) * np.exp(self.f(lam))

    def alpha(self, lam):
        return 0.5 * (self.p(lam) + self.p(-np.asarray(lam)))

    def beta(self, lam):
        return 0.5 * (self.p(lam) - self.p(-np.asarray(lam)))

    def beta2(self, lam):
        return self.beta(lam) ** 2

    def delta_power(self, lam):
        """Delta_+^{2|k|} Delta_-^{2|l|} as the rational function it is."""
        lam = np.asarray(lam, dtype=complex)
        k, l = self.shift
        r1, r2 = self.constants.r1, self.constants.r2
        return (1 - r1**2 * (1 / lam - lam) ** 2) ** abs(k) * (1 + r2**2 * (1 / lam + lam) ** 2) ** abs(l)

    def delta_scale(self, lam):
        """Delta_+^{|k|} Delta_-^{|l|}; positive on the circle, rational for even k, l."""
        lam = np.asarray(lam, dtype=complex)
        k, l = self.shift
        r1, r2 = self.constants.r1, self.constants.r2
        dp2 = 1 - r1**2 * (1 / lam - lam) ** 2
        dm2 = 1 + r2**2 * (1 / lam + lam) ** 2
        kk, ll = abs(k), abs(l)
        out = dp2 ** (kk // 2) * dm2 ** (ll // 2)
        if kk % 2:
            out = out * np.sqrt(dp2)
        if ll % 2:
            out = out * np.sqrt(dm2)
        return out

    def alpha_plus_beta(self, lam):
        """alpha + beta = p_hat / (Delta_+^{|k|} Delta_-^{|l|})."""
        return self.p(lam) / self.delta_scale(lam)

    def dlog_alpha_plus_beta(self, lam):
        """d/dlam log(alpha + beta), in closed form (even k, l)."""
        lam = np.asarray(lam, dtype=complex)
        k, l = self.shift
        r1, r2 = self.constants.r1, self.constants.r2
        x, y = 1 / lam - lam, 1 / lam + lam
        dx, dy = -1 / lam**2 - 1, -1 / lam**2 + 1
        ek, el = _sign(k), _sign(l)
        out = self.df(lam).astype(complex)
        if k:
            out = out + abs(k) * ek * r1 * dx / (1 + ek * r1 * x)
            out = out - 0.5 * abs(k) * (-2 * r1**2 * x * dx) / (1 - r1**2 * x**2)
        if l:
            out = out + abs(l) * 1j * el * r2 * dy / (1 + 1j * el * r2 * y)
            out = out - 0.5 * abs(l) * (2 * r2**2 * y * dy) / (1 + r2**2 * y**2)
        return out


@dataclass(frozen=True)
class PHatSeries:
    """p_hat, alpha_hat, beta_hat as sampled Laurent series plus identity checks."""

    closed_form: PHat
    p_hat: LaurentSeries
    alpha_hat: LaurentSeries
    beta_hat: LaurentSeries
    identity_residual: float
    parity_residual: float


def make_phat(shift, constants: LatticeConstants, f_plus=None, N: int = DEFAULT_N, tol: float = NECESSARY_TOL) -> PHatSeries:
    """Build p_hat and its symmetrisations as Laurent series on the circle.

    Raises ValidationError for a non-odd f_plus and NumericalError if the
    identity alpha_hat^2 - beta_hat^2 = Delta_+^{2|k|} Delta_-^{2|l|} fails
    (relative to the size of Delta power on the circle).
    """
    ph = PHat(tuple(int(s) for s in shift), constants, _odd_poly(f_plus))
    lam = circle_points(sample_count(N))
    a, b = ph.alpha(lam), ph.beta(lam)
    ident = identity_residual(ph, lam)
    if ident > tol:
        raise NumericalError(f"alpha_hat^2 - beta_hat^2 identity violated ({ident:.2e})")
    pS = LaurentSeries.from_samples(ph.p(lam), N)
    aS = LaurentSeries.from_samples(a, N)
    bS = LaurentSeries.from_samples(b, N)
    par = max(aS.parity_residual("even"), bS.parity_residual("odd"))
    if par > tol * max(1.0, aS.max_norm(), bS.max_norm()):
        raise NumericalError(f"parity of alpha_hat / beta_hat violated ({par:.2e})")
    return PHatSeries(ph, pS, aS.project_parity("even"), bS.project_parity("odd"), ident, par)


def identity_residual(ph: PHat, lam) -> float:
    a, b = ph.alpha(lam), ph.beta(lam)
    d = ph.delta_power(lam)
    return float(np.max(np.abs(a * a - b * b - d)) / max(1.0, float(np.max(np.abs(d)))))


# -- S matrix ---------------------------------------------------------------


@dataclass(frozen=True)
class SMatrix:
    a: LaurentSeries
    b: LaurentSeries
    c: LaurentSeries
    trace_residual: float
    parity_residual: float
    square_residual: float

    def samples(self, M: int | None = None) -> np.ndarray:
        a, b, c = self.a.samples(M), self.b.samples(M), self.c.samples(M)
        return np.stack([np.stack([a, b], -1), np.stack([c, -a], -1)], -2)


def s_matrix(seed: DressingSeed, tol: float = 1e-9) -> SMatrix:
    """S = h_+ A h_+^{-1} with d = -a, a odd, b and c even."""
    h = seed.h_plus
    S = multiply(multiply(h, TwistedLoop.constant(A, h.N, twisted=False)), inverse(h))
    a, b, c, d = S.entry(0, 0), S.entry(0, 1), S.entry(1, 0), S.entry(1, 1)
    trace = (a + d).max_norm()
    par = max(a.parity_residual("odd"), b.parity_residual("even"), c.parity_residual("even"))
    sq = (a * a + b * c - 1.0).max_norm()
    if trace > tol or par > tol:
        raise NumericalError(f"S matrix violates trace / parity (trace {trace:.2e}, parity {par:.2e})")
    return SMatrix(a.project_parity("odd"), b.project_parity("even"), c.project_parity("even"), trace, par, sq)


# -- spectral data ------------------------------------------------------------


def _as_lambda(f) -> RationalFunction:
    if not isinstance(f, RationalFunction):
        f = RationalFunction.constant(f)
    return f.in_lambda()


@dataclass(frozen=True)
class SpectralData:
    a2: RationalFunction
    b2: RationalFunction
    c2: RationalFunction
    shift: tuple[int, int]
    constants: LatticeConstants
    f_plus: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))

    def __post_init__(self):
        k, l = (int(s) for s in self.shift)
        if (k, l) == (0, 0):
            raise ValidationError("shift (0, 0) is not a symmetry candidate")
        if k % 2 or l % 2:
            raise ValidationError(f"shift components must be even, got {(k, l)}")
        object.__setattr__(self, "shift", (k, l))
        for name in ("a2", "b2", "c2"):
            object.__setattr__(self, name, _as_lambda(getattr(self, name)))
        object.__setattr__(self, "f_plus", _odd_poly(self.f_plus))

    @classmethod
    def cylinder(cls, shift, constants, f_plus=None) -> "SpectralData":
        """a^2 = 0, b^2 = c^2 = 1: the data of the undressed cylinder."""
        zero, one = RationalFunction.constant(0.0), RationalFunction.constant(1.0)
        return cls(zero, one, one, shift, constants, _odd_poly(f_plus))

    @property
    def phat(self) -> PHat:
        return PHat(self.shift, self.constants, self.f_plus)


@dataclass
class Condition:
    name: str
    passed: bool
    margin: float
    detail: str = ""
    values: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"name": self.name, "passed": self.passed, "margin": self.margin, "detail": self.detail}
        d.update(self.values)
        return d


@dataclass
class ConditionReport:
    conditions: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def __getitem__(self, key) -> Condition:
        return self.conditions[key]

    def to_dict(self):
        return {"passed": self.passed, "conditions": {k: v.to_dict() for k, v in self.conditions.items()}}


def check_necessary(a2, b2, c2, M: int = DEFAULT_SAMPLES, tol: float = NECESSARY_TOL) -> ConditionReport:
    """Necessary conditions a)-e) on the squares of the entries of S.

    Also reports the order of a^2 at 0, which must be 2 mod 4 unless a = 0,
    and b^2 c^2 = 1 at lambda = 0.
    """
    a2, b2, c2 = _as_lambda(a2), _as_lambda(b2), _as_lambda(c2)
    lam = circle_points(M)
    A2, B2, C2 = a2(lam), b2(lam), c2(lam)
    out = {}
    finite = all(np.all(np.isfinite(v)) for v in (A2, B2, C2))
    out["a"] = Condition("rational", finite, 0.0, "coefficient representation; finite on the circle" if finite else "pole on the circle")
    par = max(f.parity_residual("even") for f in (a2, b2, c2))
    out["b"] = Condition("parity", par <= tol, par, "a^2, b^2, c^2 even in lambda")
    # a^2 + bc = 1 only fixes (bc)^2 = b^2 c^2
    rel = float(np.max(np.abs((1 - A2) ** 2 - B2 * C2)))
    out["c"] = Condition("a^2 + bc = 1", rel <= tol, rel, "checked as (1 - a^2)^2 = b^2 c^2 on the circle")
    im = float(np.max(np.abs(A2.imag)))
    lo, hi = float(np.min(A2.real)), float(np.max(A2.real))
    ok_d = im <= tol and lo >= -tol and hi <= 1 + tol
    out["d"] = Condition(
        "0 <= a^2 <= 1 on S^1",
        ok_d,
        min(lo, 1 - hi),
        f"range [{lo:.12g}, {hi:.12g}], max |Im a^2| = {im:.2e}",
        {"min": lo, "max": hi, "max_imag": im},
    )
    e = float(np.max(np.abs(C2 - b2.star()(lam))))
    out["e"] = Condition("c^2 = (b^2)*", e <= tol * max(1.0, float(np.max(np.abs(C2)))), e)
    if a2.is_zero():
        out["zero_order"] = Condition("order of a^2 at 0", True, 0.0, "a = 0")
    else:
        o = a2.order_at_zero()
        out["zero_order"] = Condition(
            "order of a^2 at 0", o > 0 and o % 4 == 2, float(o), f"order {o}; required 2(2n-1) with n > 0"
        )
    b0 = _value_at_zero(b2) * _value_at_zero(c2)
    out["bc_at_zero"] = Condition("b(0)c(0) = 1", abs(b0 - 1) <= tol, float(abs(b0 - 1)), f"b^2(0) c^2(0) = {b0:.12g}")
    return ConditionReport(out)


def _value_at_zero(f: RationalFunction) -> complex:
    o = f.order_at_zero()
    if o > 0:
        return 0j
    if o < 0:
        return complex("inf")
    n, d = f._strip_common_power()
    return complex(n[0] / d[0])


# -- sufficient conditions -------------------------------------------------------


@dataclass
class RationalFit:
    is_laurent_polynomial: bool
    residual: float
    poles: list
    function: RationalFunction | None
    degree: int


def rational_fit(fn, degree: int, M: int = DEFAULT_SAMPLES, qmax: int = 8, tol: float = SUFFICIENT_TOL) -> RationalFit:
    """Decide whether circle samples of ``fn`` come from a rational function.

    A Laurent polynomial of degree <= ``degree`` is recognised by its FFT
    tail.  Otherwise a linearised Pade fit z^degree fn = P / Q is tried with
    increasing denominator degree; the roots of Q that are not cancelled by
    P are reported as poles.
    """
    lam = circle_points(M)
    y = np.asarray(fn(lam), dtype=complex)
    full = np.fft.fft(y) / M
    n = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    scale = max(float(np.max(np.abs(full))), 1e-300)
    tail = float(np.max(np.abs(full[np.abs(n) > degree]), initial=0.0)) / scale
    if tail <= tol:
        c = np.zeros(2 * degree + 1, dtype=complex)
        keep = np.abs(n) <= degree
        c[n[keep] + degree] = full[keep]
        return RationalFit(True, tail, [], laurent_to_rational(c), degree)
    P = np.polynomial.polynomial
    lam_d = lam**degree
    best = (np.inf, None)
    for q in range(1, qmax + 1):
        Vp = np.vander(lam, 2 * degree + q + 1, increasing=True)
        Vq = np.vander(lam, q + 1, increasing=True)
        mat = np.hstack([Vp, -(y * lam_d)[:, None] * Vq])
        colscale = np.linalg.norm(mat, axis=0)
        colscale[colscale == 0] = 1
        _, s, vh = np.linalg.svd(mat / colscale, full_matrices=False)
        res = float(s[-1] / s[0])
        v = vh[-1].conj() / colscale
        pc, qc = v[: 2 * degree + q + 1], v[2 * degree + q + 1:]
        if res < best[0]:
            best = (res, (pc, qc, q))
        if res <= tol:
            break
    res, (pc, qc, q) = best
    if res > tol:
        return RationalFit(False, res, [], None, degree)
    poles = []
    for z, o in root_divisor(qc):
        pz = abs(P.polyval(z, pc))
        ref = np.sum(np.abs(pc) * abs(z) ** np.arange(pc.size))
        if pz > 1e-6 * ref:
            poles.append((complex(z), o))
    den = P.polymul(qc, np.eye(1, degree + 1, degree)[0])
    return RationalFit(False, res, poles, RationalFunction(pc, den), degree)


def _order_near(f: RationalFunction, z: complex, tol=CLUSTER_TOL) -> int:
    o = 0
    for p, k in f.divisor():
        if abs(p - z) <= tol * max(1.0, abs(z)):
            o += k
    return o


def check_sufficient(
    data: SpectralData,
    phat=None,
    M: int = DEFAULT_SAMPLES,
    tol: float = SUFFICIENT_TOL,
    degree_bound: int | None = None,
) -> ConditionReport:
    """Sufficient conditions a')-d') and f) for the shift to be a symmetry.

    ``phat`` may override the closed-form alpha_hat / beta_hat with any
    object exposing ``alpha(lam)`` and ``beta2(lam)``.
    """
    ph = phat if phat is not None else data.phat
    k, l = data.shift
    D = degree_bound if degree_bound is not None else 2 * (abs(k) + abs(l)) + 4
    lam = circle_points(M)
    out = {}

    fa = rational_fit(ph.alpha, D, M, tol=tol)
    fb = rational_fit(ph.beta2, D, M, tol=tol)
    msgs, ok = [], True
    for name, fit in (("alpha_hat", fa), ("beta_hat^2", fb)):
        if fit.is_laurent_polynomial:
            continue
        ok = False
        if fit.function is None:
            msgs.append(f"{name} is not rational of degree <= {D} (fit residual {fit.residual:.1e})")
        else:
            where = ", ".join(f"{z.real:.6g}{z.imag:+.6g}i (order {o})" for z, o in fit.poles) or "none located"
            msgs.append(f"{name} has poles in C*: {where}")
    out["a'"] = Condition("alpha_hat, beta_hat^2 rational without poles in C*", ok, max(fa.residual, fb.residual), "; ".join(msgs))

    Al, B2 = ph.alpha(lam), ph.beta2(lam)
    scale = max(1.0, float(np.max(np.abs(Al))), float(np.max(np.abs(B2))))
    im = max(float(np.max(np.abs(Al.imag))), float(np.max(np.abs(B2.imag)))) / scale
    out["b'"] = Condition("alpha_hat, beta_hat^2 real on S^1", im <= tol, im)
    top = float(np.max(B2.real)) / scale
    out["c'"] = Condition("beta_hat^2 <= 0 on S^1", top <= tol, -top, f"max beta_hat^2 on S^1 = {top * scale:.3e}")

    if fb.is_laurent_polynomial:
        bad = []
        for name, f2 in (("a", data.a2), ("b", data.b2), ("c", data.c2)):
            if f2.is_zero():
                continue
            for z, o in f2.divisor():
                if o < 0 and _order_near(fb.function, z) + o < 0:
                    bad.append(f"beta_hat {name} has a pole at {z.real:.6g}{z.imag:+.6g}i")
        out["d'"] = Condition("beta_hat a, b, c without poles in C*", not bad, float(len(bad)), "; ".join(bad))
    else:
        out["d'"] = Condition("beta_hat a, b, c without poles in C*", False, np.inf, "needs a rational beta_hat^2 (a')")

    rm = r_min(data.constants)
    bad = []
    if data.b2.order_at_zero() != 0:
        bad.append(f"b^2 has order {data.b2.order_at_zero()} at 0")
    for z, o in data.b2.divisor():
        if abs(z) <= rm * (1 + 1e-9):
            if o < 0:
                bad.append(f"b^2 has a pole at {z:.6g}")
            elif o % 4:
                bad.append(f"zero of b^2 at {z:.6g} has order {o}, not a multiple of 4")
    out["f"] = Condition(
        "b is a square on the closed disk of radius r_min",
        not bad,
        float(len(bad)),
        "; ".join(bad) or f"even-order zero scan on |lambda| <= {rm:.6g} (approximate certificate)",
    )
    return ConditionReport(out)


def build_chi_spectral(
    data: SpectralData,
    seed: DressingSeed,
    N: int | None = None,
    sufficient: bool | None = None,
    tol: float = SUFFICIENT_TOL,
) -> TwistedLoop:
    """chi = (alpha_hat I + beta_hat S) / (Delta_+^{|k|} Delta_-^{|l|}).

    The squares of the entries of S = h_+ A h_+^{-1} must equal a^2, b^2,
    c^2 of ``data`` (ValidationError otherwise).  chi always has
    determinant 1.  When the sufficient conditions hold it
    must also be unitary on the circle; a violation then raises
    NumericalError.
    """
    N = N or seed.h_plus.N
    ph = data.phat
    Sm = s_matrix(seed)
    Mn = sample_count(N)
    lam = circle_points(Mn)
    mismatch = max(
        float(np.max(np.abs(f.samples(Mn) ** 2 - g(lam))) / max(1.0, float(np.max(np.abs(g(lam))))))
        for f, g in ((Sm.a, data.a2), (Sm.b, data.b2), (Sm.c, data.c2))
    )
    if mismatch > max(tol, 1e-6):
        raise ValidationError(f"spectral data do not match the S matrix of the seed (mismatch {mismatch:.2e})")
    ds = ph.delta_scale(lam).real
    vals = (ph.alpha(lam)[:, None, None] * I2 + ph.beta(lam)[:, None, None] * Sm.samples(Mn)) / ds[:, None, None]
    chi = TwistedLoop.from_samples(vals, N)
    det_err = float(np.max(np.abs(np.linalg.det(vals) - 1)))
    if det_err > max(tol, 1e-6):
        raise NumericalError(f"spectral chi has det != 1 (error {det_err:.2e})")
    if sufficient is None:
        sufficient = check_sufficient(data).passed
    if sufficient:
        u = float(np.max(np.abs(np.conj(np.swapaxes(vals, 1, 2)) @ vals - I2)))
        if u > tol:
            raise NumericalError(f"sufficient conditions hold but chi is not unitary (defect {u:.2e})")
    return chi
