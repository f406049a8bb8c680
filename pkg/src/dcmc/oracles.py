"""Random loops with known factorizations, for testing the splitting."""

from __future__ import annotations

import math

import numpy as np

from .iwasawa import normalize_to_B
from .loops import DEFAULT_N, TwistedLoop, loop_exp


def _twisted_coefficient(rng, degree: int, size: float) -> np.ndarray:
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) * size / math.sqrt(2.0)
    if degree % 2 == 0:
        return np.diag([z[0, 0], -z[0, 0]])
    return np.array([[0, z[0, 1]], [z[1, 0], 0]])


def random_unitary_loop(
    rng: np.random.Generator, N: int = DEFAULT_N, degree: int = 6, decay: float = 0.5, scale: float = 0.8
) -> TwistedLoop:
    """exp(x) for a random twisted trace-free loop with x* = -x; unitary on the circle."""
    c = np.zeros((2 * N + 1, 2, 2), dtype=complex)
    c[N] = np.diag([1j, -1j]) * scale * rng.standard_normal()
    for d in range(1, degree + 1):
        cd = _twisted_coefficient(rng, d, scale * decay**d)
        c[N + d] = cd
        c[N - d] = -cd.conj().T
    return loop_exp(TwistedLoop(c))


def random_plus_loop(
    rng: np.random.Generator, N: int = DEFAULT_N, degree: int = 6, decay: float = 0.5, scale: float = 0.8
) -> TwistedLoop:
    """exp(y) for a random twisted trace-free plus loop y, normalised to B at 0."""
    c = np.zeros((2 * N + 1, 2, 2), dtype=complex)
    for d in range(degree + 1):
        c[N + d] = _twisted_coefficient(rng, d, scale * decay**d)
    return normalize_to_B(loop_exp(TwistedLoop(c)))


def factorization_pair(rng: np.random.Generator, N: int = DEFAULT_N, **kw) -> tuple[TwistedLoop, TwistedLoop]:
    """(F_true, p_true) with F_true unitary and p_true a plus loop with p_true(0) in B."""
    return random_unitary_loop(rng, N, **kw), random_plus_loop(rng, N, **kw)
