from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcmc.errors import IncompatibleLoopsError, SingularLoopError, TrustAnnulusWarning
from dcmc.loops import (
    A,
    I2,
    LaurentSeries,
    TwistedLoop,
    analyticity_radius,
    evaluate,
    inverse,
    loop_exp,
    multiply,
    star,
    unitarity_defect,
)
from dcmc.oracles import random_plus_loop, random_unitary_loop

N = 32


def twisted_loop(seed, N=N, degree=5):
    rng = np.random.default_rng(seed)
    return random_unitary_loop(rng, N, degree) @ random_plus_loop(rng, N, degree)


seeds = st.integers(0, 2**32 - 1)


def test_identity_and_inverse(cyl):
    g = twisted_loop(1)
    assert multiply(TwistedLoop.identity(N), g).distance(g) < 1e-15
    assert multiply(g, inverse(g)).distance(TwistedLoop.identity(N)) < 1e-12
    assert inverse(TwistedLoop.identity(N)).distance(TwistedLoop.identity(N)) == 0


def test_inverse_constant():
    g = TwistedLoop.constant(np.diag([2.0, 0.5]), 8)
    assert np.allclose(inverse(g).coefficient(0), np.diag([0.5, 2.0]), atol=1e-15)


def test_inverse_of_singular_loop_raises():
    with pytest.raises(SingularLoopError):
        inverse(TwistedLoop.constant(np.diag([1.0, 0.0]), 8))


def test_generators_commute(cyl):
    assert multiply(cyl.U0, cyl.V0).distance(multiply(cyl.V0, cyl.U0)) < 1e-12


def test_delta_times_inverse_generator_is_laurent_polynomial(cyl):
    w = inverse(cyl.U0).scaled(cyl.delta_plus)
    assert analyticity_radius(w) == 0.0
    assert analyticity_radius(cyl.U0) > 0.3


def test_star_cases(cyl):
    g = twisted_loop(2)
    assert star(star(g)).distance(g) == 0
    assert star(TwistedLoop.identity(N)).distance(TwistedLoop.identity(N)) == 0
    assert star(cyl.U0).distance(inverse(cyl.U0)) < 1e-10


def test_evaluate_cases(cyl):
    assert np.allclose(evaluate(TwistedLoop.identity(8), 0.3 + 0.2j), I2)
    assert np.max(np.abs(evaluate(cyl.U0, 1.0) - I2)) < 1e-12
    assert np.max(np.abs(evaluate(cyl.U0, 1j) - (I2 - 1j * A) / np.sqrt(2))) < 1e-12


def test_evaluate_warns_outside_trust_annulus(cyl):
    with pytest.warns(TrustAnnulusWarning):
        evaluate(cyl.U0, 0.1)


def test_analyticity_radius(cyl):
    assert analyticity_radius(TwistedLoop.identity(8)) == 0.0
    assert abs(analyticity_radius(cyl.U0) - (np.sqrt(2) - 1)) < 0.02


def test_radius_mismatch_rejected():
    a = TwistedLoop.identity(8)
    b = TwistedLoop(a.coeffs, True, radius=0.5)
    with pytest.raises(IncompatibleLoopsError):
        multiply(a, b)


@given(a=st.integers(-3, 3), b=st.integers(-3, 3))
def test_product_radius_bounded(a, b, cyl):
    from dcmc.cylinder import vacuum_frame

    g, h = vacuum_frame(cyl, a, 0), vacuum_frame(cyl, 0, b)
    gh = multiply(g, h)
    assert analyticity_radius(gh) <= max(analyticity_radius(g), analyticity_radius(h)) + 0.05


@given(seeds, seeds)
def test_star_is_antimultiplicative(s1, s2):
    g, h = twisted_loop(s1), twisted_loop(s2)
    assert star(multiply(g, h)).distance(multiply(star(h), star(g))) < 1e-10


@given(seeds)
def test_product_preserves_twisting(s):
    g = twisted_loop(s)
    assert multiply(g, g).parity_residual() == 0.0
    assert inverse(g).parity_residual() == 0.0


@given(seeds)
def test_exp_of_antihermitian_is_unitary(s):
    rng = np.random.default_rng(s)
    F = random_unitary_loop(rng, 64)
    assert unitarity_defect(F) < 1e-12
    assert star(F).distance(inverse(F)) < 1e-12


def test_laurent_series_roundtrip():
    s = LaurentSeries.from_function(lambda z: z**3 + 2 / z, 8)
    assert abs(s.coefficient(3) - 1) < 1e-15 and abs(s.coefficient(-1) - 2) < 1e-15
    assert s.parity_residual("odd") < 1e-15
    assert abs(s.evaluate(0.5) - (0.125 + 4)) < 1e-13


def test_loop_exp_of_zero_is_identity():
    z = TwistedLoop(np.zeros((17, 2, 2)))
    assert loop_exp(z).distance(TwistedLoop.identity(8)) == 0


def test_bad_shape_rejected():
    with pytest.raises(ValueError):
        TwistedLoop(np.zeros((4, 2, 2)))
