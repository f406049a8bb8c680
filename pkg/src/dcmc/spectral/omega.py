"""The logarithmic differential omega = d log(alpha + beta): residues and a-cycles.

For even k, l,

    alpha + beta = S_{r1}^{k/2} T_{r2}^{l/2} exp(f_+),
    S_{r1} = (1 + r1 (1/lam - lam)) / (1 - r1 (1/lam - lam)),
    T_{r2} = (1 + i r2 (1/lam + lam)) / (1 - i r2 (1/lam + lam)),

so omega has simple poles at the zeros and poles of S and T, i.e. at
+-lam_+^{+-1} and +-i lam_-^{+-1}, with residues +-k/2 and +-l/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cylinder import lambda_minus, lambda_plus
from ..errors import ContourError
from .curve import HyperellipticCurve
from .data import SpectralData

MIN_NODES = 512
MAX_NODES = 8192
QUAD_TOL = 1e-12


@dataclass(frozen=True)
class Residue:
    label: str
    point: complex
    expected: float
    value: complex
    radius: float
    nodes: int

    @property
    def error(self) -> float:
        return abs(self.value - self.expected)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "point": [self.point.real, self.point.imag],
            "expected": self.expected,
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "radius": self.radius,
            "nodes": self.nodes,
        }


def singular_points(data: SpectralData) -> list[tuple[str, complex, float]]:
    """(label, point, expected residue) for the eight poles of omega."""
    k, l = data.shift
    lp, lm = lambda_plus(data.constants.r1), lambda_minus(data.constants.r2)
    return [
        ("lambda_+", lp + 0j, k / 2),
        ("-lambda_+", -lp + 0j, -k / 2),
        ("-1/lambda_+", -1 / lp + 0j, k / 2),
        ("1/lambda_+", 1 / lp + 0j, -k / 2),
        ("i lambda_-", 1j * lm, l / 2),
        ("-i lambda_-", -1j * lm, -l / 2),
        ("-i/lambda_-", -1j / lm, l / 2),
        ("i/lambda_-", 1j / lm, -l / 2),
    ]


def circle_integral(fn, center: complex, radius: float, min_nodes=MIN_NODES, max_nodes=MAX_NODES, tol=QUAD_TOL):
    """(1/2 pi i) * contour integral of fn over a circle, adaptive trapezoid rule.

    Returns (value, nodes).  Raises ContourError when the rule does not
    settle below ``tol`` by ``max_nodes``.
    """
    n = min_nodes
    prev = None
    while n <= max_nodes:
        z = center + radius * np.exp(2j * np.pi * np.arange(n) / n)
        vals = fn(z)
        if not np.all(np.isfinite(vals)):
            raise ContourError("integrand not finite on the contour")
        # dz = i (z - c) dtheta
        val = complex(np.mean(vals * (z - center)))
        if prev is not None and abs(val - prev) < tol:
            return val, n
        prev = val
        n *= 2
    raise ContourError(f"trapezoid rule did not converge on circle |z - {center:.4g}| = {radius:.3g}")


def omega_residues(data: SpectralData, adapt: int = 4) -> list[Residue]:
    """Residues of omega at its eight poles by contour integration.

    Each circle has radius half the distance to the nearest other singular
    point of omega (0 included).  If alpha + beta comes close to vanishing
    on a contour the radius is halved, at most ``adapt`` times.
    """
    ph = data.phat
    pts = singular_points(data)
    sing = [p for _, p, _ in pts] + [0j]
    out = []
    for label, z0, expected in pts:
        rad = 0.5 * min(abs(z0 - s) for s in sing if s != z0)
        for _ in range(adapt + 1):
            ring = z0 + rad * np.exp(2j * np.pi * np.arange(MIN_NODES) / MIN_NODES)
            g = np.abs(ph.alpha_plus_beta(ring))
            if np.min(g) > 1e-10 * np.max(g):
                break
            rad *= 0.5
        else:
            raise ContourError(f"alpha + beta vanishes on every contour around {label}")
        val, n = circle_integral(ph.dlog_alpha_plus_beta, z0, rad)
        out.append(Residue(label, z0, expected, val, rad, n))
    return out


def residue_sum(res: list[Residue]) -> complex:
    return complex(sum(r.value for r in res))


def contour_selftest(center=2.0 + 0.5j, radius=1.0) -> complex:
    """Integral of d nu / nu over a circle not enclosing 0 (should be 0)."""
    val, _ = circle_integral(lambda z: 1 / z, center, radius)
    return val * 2j * np.pi


def _track_sqrt(w: np.ndarray, start: complex) -> tuple[np.ndarray, float]:
    """Continuous square root of the samples w, starting at the root nearest ``start``.

    Returns the roots and the largest angle between consecutive roots.
    """
    s = np.sqrt(w.astype(complex))
    out = np.empty_like(s)
    cur = s[0] if abs(s[0] - start) <= abs(s[0] + start) else -s[0]
    out[0] = cur
    worst = 0.0
    for i in range(1, s.size):
        c = s[i] if abs(s[i] - cur) <= abs(s[i] + cur) else -s[i]
        worst = max(worst, abs(np.angle(c / cur)) if cur != 0 else np.pi)
        out[i] = cur = c
    return out, worst


@dataclass(frozen=True)
class CycleIntegral:
    pair: tuple[complex, complex]
    center: complex
    radius: float
    value: complex
    nodes: int
    mu_closed: bool

    def to_dict(self) -> dict:
        p, q = self.pair
        return {
            "pair": [[p.real, p.imag], [q.real, q.imag]],
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "value": [self.value.real, self.value.imag],
            "nodes": self.nodes,
            "mu_closed": self.mu_closed,
        }


def _cycle_contour(pair, forbidden):
    p, q = pair
    c = 0.5 * (p + q)
    inner = 0.5 * abs(p - q)
    outer = min(abs(c - z) for z in forbidden)
    if outer <= inner * (1 + 1e-9):
        raise ContourError(
            f"no circle around the branch pair ({p:.4g}, {q:.4g}) avoids 0 and the poles of omega"
        )
    return c, 0.5 * (inner + outer)


def a_cycle_integrals(data: SpectralData, curve: HyperellipticCurve, max_nodes: int = 1 << 16) -> list[CycleIntegral]:
    """Integrals of omega over cycles around each branch pair.

    The contour is a circle in the nu-plane enclosing one branch pair and
    no other singular point.  Along it lambda = sqrt(nu) and mu are
    continued continuously (rejecting steps of more than pi/2); the
    integral is the total change of log(alpha + beta).
    """
    lp, lm = lambda_plus(data.constants.r1), lambda_minus(data.constants.r2)
    forbidden = [0j, lp**2, lp**-2, -(lm**2), -(lm**-2)]
    forbidden += [b for b in curve.branch_points]
    ph = data.phat
    out = []
    for pair in curve.pairs:
        others = [z for z in forbidden if all(abs(z - b) > 1e-12 for b in pair)]
        c, rad = _cycle_contour(pair, others)
        n = 1024
        while True:
            theta = 2 * np.pi * np.arange(n + 1) / n
            nu = c + rad * np.exp(1j * theta)
            lam, jump_l = _track_sqrt(nu, np.sqrt(nu[0]))
            mu, jump_m = _track_sqrt(curve.mu2(nu), np.sqrt(curve.mu2(nu[0])))
            if max(jump_l, jump_m) <= np.pi / 2:
                g = ph.alpha_plus_beta(lam)
                steps = np.log(g[1:] / g[:-1])
                if np.max(np.abs(steps.imag)) < np.pi / 2:
                    break
            n *= 2
            if n > max_nodes:
                raise ContourError(f"sheet tracking failed on the contour around {pair} (centre {c:.4g}, radius {rad:.4g})")
        val = complex(np.sum(steps))
        mu_closed = bool(abs(mu[-1] - mu[0]) <= 1e-8 * max(1.0, abs(mu[0])))
        out.append(CycleIntegral(pair, c, rad, val, n, mu_closed))
    return out


def b_cycle_conditions(*_args, **_kwargs) -> dict:
    """Closing conditions on the b-cycles need the normalised differentials
    of the third kind and a period matrix; not provided."""
    return {"status": "unsupported", "reason": "normalised third-kind differentials are not implemented"}
