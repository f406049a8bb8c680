"""Iwasawa splitting g = F g_+ of twisted loops.

F is unitary on the unit circle and g_+ extends holomorphically to the
unit disk with g_+(0) upper triangular with positive diagonal.

With X = g_+^{-1} the unitarity of F = g X reads X* M X = I for the
Hermitian positive loop M = g* g.  Requiring the non-negative Fourier
modes of M X~ to be (I, 0, 0, ...) gives a block Toeplitz system
T(M) x = e_0, Hermitian positive definite, solved by Cholesky.  Then
X~* M X~ = X~_0 is a constant, and a constant right factor turns X~ into
X with X* M X = I and X(0)^{-1} in B.  Finitely many modes are kept; the
neglected modes decay like the coefficients of g_+^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, SingularLoopError, ValidationError
from .loops import I2, TwistedLoop, sample_count, star

MIN_SINGULAR = 1e-6
RESIDUAL_TOL = 1e-11
MAX_NEWTON = 50


@dataclass(frozen=True)
class IwasawaResult:
    unitary_part: TwistedLoop
    plus_part: TwistedLoop
    residual: float

    def __iter__(self):
        return iter((self.unitary_part, self.plus_part))


def _ctrans(v):
    return np.conj(np.swapaxes(v, -1, -2))


def qr_b(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Constant splitting c = u b, u unitary, b upper triangular with positive diagonal."""
    c = np.asarray(c, dtype=complex)
    if abs(np.linalg.det(c)) < 1e-14 * max(1.0, np.max(np.abs(c)) ** 2):
        raise SingularLoopError("constant term is singular")
    q, r = np.linalg.qr(c)
    ph = np.diag(r) / np.abs(np.diag(r))
    d = np.diag(ph)
    return q @ d, np.conj(d) @ r


def normalize_to_B(w: TwistedLoop) -> TwistedLoop:
    """Return u^{-1} w where w(0) = u b with u unitary and b in B."""
    c0 = w.coefficient(0)
    u, _ = qr_b(c0)
    uinv = _ctrans(u)
    coeffs = np.einsum("ij,njk->nik", uinv, w.coeffs)
    twisted = w.twisted and bool(np.all(np.abs(uinv[[0, 1], [1, 0]]) < 1e-15))
    return TwistedLoop(coeffs, twisted, w.radius, w.tail)


def _block_toeplitz(Mc: np.ndarray, K: int) -> np.ndarray:
    """Hermitian block Toeplitz matrix with blocks T[i, j] = M_{i-j}, 0 <= i, j <= K."""
    N = (Mc.shape[0] - 1) // 2
    i = np.arange(K + 1)
    d = i[:, None] - i[None, :]
    blocks = Mc[d + N]  # (K+1, K+1, 2, 2)
    return blocks.transpose(0, 2, 1, 3).reshape(2 * (K + 1), 2 * (K + 1))


def iwasawa(
    g: TwistedLoop,
    K: int | None = None,
    tol: float = RESIDUAL_TOL,
    max_steps: int = MAX_NEWTON,
    min_singular: float = MIN_SINGULAR,
) -> IwasawaResult:
    """Split ``g = F g_+`` (unitary times plus loop, g_+(0) in B).

    ``K`` is the number of non-negative modes kept for g_+^{-1}
    (default: the truncation degree of g).  If the splitting residual of
    M = g* g is above ``tol`` the Toeplitz solve is repeated on the
    remaining factor (iterative refinement), at most ``max_steps`` times.
    """
    N = g.N
    K = N if K is None else K
    Mn = sample_count(N)
    gv = g.samples(Mn)
    sv = np.linalg.svd(gv, compute_uv=False)
    smin = float(sv[:, -1].min())
    if smin < min_singular:
        raise SingularLoopError(f"loop near the boundary of invertibility (min singular value {smin:.2e})")

    # X accumulates g_+^{-1} on the circle; refinement works on g X
    X = np.broadcast_to(I2, gv.shape).copy()
    cur = gv
    residual = np.inf
    for step in range(max_steps):
        H = _ctrans(cur) @ cur
        Hc = np.fft.fft(H, axis=0) / Mn
        deg = np.arange(-K, K + 1)
        Hk = Hc[deg % Mn]
        Hk = 0.5 * (Hk + _ctrans(Hk[::-1]))
        T = _block_toeplitz(Hk, K)
        rhs = np.zeros((2 * (K + 1), 2), dtype=complex)
        rhs[:2] = I2
        try:
            cf = sla.cho_factor(T, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SingularLoopError("Toeplitz matrix of g* g is not positive definite") from exc
        xt = sla.cho_solve(cf, rhs).reshape(K + 1, 2, 2)
        x0 = 0.5 * (xt[0] + _ctrans(xt[0]))
        # R^H R = x0^{-1}: R is the upper Cholesky factor, g_+(0) = R
        R = np.linalg.cholesky(np.linalg.inv(x0)).conj().T
        C = np.linalg.inv(x0) @ np.linalg.inv(R)
        buf = np.zeros((Mn, 2, 2), dtype=complex)
        buf[: K + 1] = xt
        Xs = (np.fft.ifft(buf, axis=0) * Mn) @ C
        X = X @ Xs
        cur = gv @ X
        defect = _ctrans(cur) @ cur - I2
        residual = float(np.max(np.abs(defect)))
        if residual < tol:
            break
    else:
        raise ConvergenceError(
            f"Iwasawa splitting did not reach {tol:.1e} in {max_steps} steps", residual
        )

    F = TwistedLoop.from_samples(cur, N, g.twisted)
    gp = TwistedLoop.from_samples(_ctrans(cur) @ gv, N, g.twisted)
    # pin the constant of g_+ into B exactly (removes roundoff in the phases)
    gp = normalize_to_B(gp)
    recon = F.samples(Mn) @ gp.samples(Mn)
    rec_res = float(np.max(np.abs(np.fft.fft(recon - gv, axis=0) / Mn)))
    return IwasawaResult(F, gp, max(residual, rec_res))


def check_iwasawa(res: IwasawaResult, g: TwistedLoop) -> dict:
    """Invariant diagnostics of a splitting."""
    F, gp = res.unitary_part, res.plus_part
    Mn = sample_count(g.N)
    Fv = F.samples(Mn)
    b = gp.coefficient(0)
    return {
        "reconstruction": F.__matmul__(gp).distance(g),
        "plus_negative_modes": gp.negative_part_norm(),
        "b_lower": float(abs(b[1, 0])),
        "b_diag_imag": float(np.max(np.abs(np.diag(b).imag))),
        "b_diag_min": float(np.min(np.diag(b).real)),
        "unitarity": float(np.max(np.abs(_ctrans(Fv) @ Fv - I2))),
        "star_inverse": float(np.max(np.abs(star(F).samples(Mn) - _ctrans(Fv)))),
    }


def validate_plus(g: TwistedLoop, tol: float = 1e-9):
    if g.negative_part_norm() > tol:
        raise ValidationError(f"not a plus loop: negative modes up to {g.negative_part_norm():.2e}")
