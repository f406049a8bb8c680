from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcmc.cylinder import LatticeConstants, lambda_minus, make_cylinder
from dcmc.errors import ValidationError
from dcmc.lattice import DressingSeed, random_seed
from dcmc.loops import A, TwistedLoop, circle_points, loop_exp, multiply, star
from dcmc.spectral import (
    PHat,
    RationalFunction,
    SpectralData,
    build_chi_spectral,
    check_necessary,
    check_sufficient,
    make_phat,
    rational_fit,
    s_matrix,
)

C = LatticeConstants(0.5, 0.5)
GENUS1 = RationalFunction([-0.2, 0.5, -0.2], [0, 1], "nu")
lam = circle_points(256)


def test_s_matrix_identity_seed():
    S = s_matrix(DressingSeed.identity(32))
    assert S.a.max_norm() < 1e-15
    assert abs(S.b.coefficient(0) - 1) < 1e-15 and abs(S.c.coefficient(0) - 1) < 1e-15


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_s_matrix_relations(seed):
    S = s_matrix(random_seed(64, seed))
    assert S.square_residual < 1e-9
    assert abs(S.b.coefficient(0) * S.c.coefficient(0) - 1) < 1e-9


def test_necessary_cylinder_data():
    one, zero = RationalFunction.constant(1.0), RationalFunction.constant(0.0)
    assert check_necessary(zero, one, one).passed


def test_necessary_genus1_range():
    one = RationalFunction.constant(1.0)
    rep = check_necessary(GENUS1, one, one)
    d = rep["d"]
    assert d.passed
    assert abs(d.values["min"] - 0.1) < 1e-9 and abs(d.values["max"] - 0.9) < 1e-9
    assert abs(d.margin - 0.1) < 1e-9
    assert not rep["zero_order"].passed  # pole of order 2 at lambda = 0


def test_necessary_e_fails_with_margin():
    b2 = RationalFunction([1, 0, 0.1])
    rep = check_necessary(RationalFunction.constant(0.0), b2, RationalFunction.constant(1.0))
    assert not rep["e"].passed and rep["e"].margin > 0.05


def test_phat_closed_form_20():
    ph = PHat((2, 0), C)
    x = 1 / lam - lam
    assert np.max(np.abs(ph.p(lam) - (1 + 0.5 * x) ** 2)) < 1e-14
    assert np.max(np.abs(ph.alpha(lam) - (1 + 0.25 * x**2))) < 1e-14
    assert np.max(np.abs(ph.beta(lam) - x)) < 1e-14


def test_phat_02_beta_from_t_factor():
    ph = PHat((0, 2), C)
    y = 1 / lam + lam
    assert np.max(np.abs(ph.beta(lam) - 2j * 0.5 * y)) < 1e-14
    assert abs(ph.beta(1.0 + 0j) - 2j) < 1e-14


@given(
    k=st.sampled_from([-4, -2, 0, 2, 4]),
    l=st.sampled_from([-2, 0, 2]),
    f=st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=4),
)
def test_identity_holds(k, l, f):
    if (k, l) == (0, 0):
        return
    fp = np.zeros(2 * len(f))
    fp[1::2] = f
    ph = make_phat((k, l), C, fp, N=64)
    assert ph.identity_residual < 1e-9
    assert ph.alpha_hat.parity_residual("even") == 0 and ph.beta_hat.parity_residual("odd") == 0


def test_even_f_plus_rejected():
    with pytest.raises(ValidationError):
        make_phat((2, 0), C, [0.1, 0.2])


def test_spectral_data_gates():
    with pytest.raises(ValidationError):
        SpectralData.cylinder((1, 0), C)
    with pytest.raises(ValidationError):
        SpectralData.cylinder((0, 0), C)


def test_sufficient_cylinder_data():
    data = SpectralData.cylinder((2, 0), C)
    rep = check_sufficient(data)
    assert rep.passed
    b2 = data.phat.beta2(lam)
    assert np.max(b2.real) <= 1e-12 and np.max(np.abs(b2 + np.abs(data.phat.beta(lam)) ** 2)) < 1e-12


class _PolePHat:
    """alpha_hat with a pole at +-1/2 (beta_hat^2 as well)."""

    def alpha(self, z):
        return 1 / (z * z - 0.25)

    def beta2(self, z):
        return -1 / (z * z - 0.25)


def test_sufficient_names_pole():
    rep = check_sufficient(SpectralData.cylinder((2, 0), C), phat=_PolePHat())
    assert not rep["a'"].passed
    assert "0.5" in rep["a'"].detail


def test_rational_fit_laurent_polynomial():
    fit = rational_fit(lambda z: z**-2 + 3 + z, 4)
    assert fit.is_laurent_polynomial and fit.poles == []


def test_spectral_chi_identity_seed():
    cyl = make_cylinder(C)
    chi = build_chi_spectral(SpectralData.cylinder((2, 0), C), DressingSeed.identity(cyl.N))
    assert chi.distance(multiply(cyl.U0, cyl.U0)) < 1e-12


def _commuting_seed(N, g1, g3):
    c = np.zeros((2 * N + 1, 2, 2), dtype=complex)
    c[N + 1], c[N + 3] = g1 * A, g3 * A
    return DressingSeed(loop_exp(TwistedLoop(c)), "exp(g A)")


@pytest.mark.parametrize("shift", [(2, 0), (0, 2), (-2, 2), (4, -2)])
def test_spectral_chi_unitary(shift):
    cyl = make_cylinder(C)
    seed = _commuting_seed(cyl.N, 0.3, 0.1j)
    data = SpectralData.cylinder(shift, C)
    assert check_sufficient(data).passed
    chi = build_chi_spectral(data, seed)
    I = multiply(chi, star(chi))
    assert np.max(np.abs(I.samples() - np.eye(2))) < 1e-8


def test_nonzero_f_plus_is_not_rational():
    # exp(f_+) is transcendental, so alpha_hat is not a Laurent polynomial
    rep = check_sufficient(SpectralData.cylinder((2, 0), C, [0, 0.2]))
    assert not rep["a'"].passed


def test_spectral_chi_rejects_foreign_seed():
    with pytest.raises(ValidationError):
        build_chi_spectral(SpectralData.cylinder((2, 0), C), random_seed(64, 9))


def test_lambda_minus_value():
    assert abs(lambda_minus(0.5) - (1 + np.sqrt(2))) < 1e-15
