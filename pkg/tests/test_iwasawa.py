from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcmc.cylinder import vacuum_frame
from dcmc.errors import SingularLoopError
from dcmc.iwasawa import check_iwasawa, iwasawa, normalize_to_B, qr_b
from dcmc.loops import TwistedLoop, multiply
from dcmc.oracles import factorization_pair, random_plus_loop


def test_unitary_input_has_trivial_plus_part(cyl):
    F = vacuum_frame(cyl, 2, 1)
    res = iwasawa(F)
    assert res.unitary_part.distance(F) < 1e-12
    assert res.plus_part.distance(TwistedLoop.identity(cyl.N)) < 1e-12


def test_constant_in_B_is_plus_part():
    g = TwistedLoop.constant(np.diag([2.0, 0.5]), 16)
    F, p = iwasawa(g)
    assert F.distance(TwistedLoop.identity(16)) < 1e-13
    assert p.distance(g) < 1e-13


@given(st.integers(0, 2**32 - 1))
def test_oracle_recovery(seed):
    rng = np.random.default_rng(seed)
    F, p = factorization_pair(rng, 64)
    res = iwasawa(multiply(F, p))
    assert res.unitary_part.distance(F) < 1e-10
    assert res.plus_part.distance(p) < 1e-10
    diag = check_iwasawa(res, multiply(F, p))
    assert diag["b_lower"] < 1e-12 and diag["b_diag_min"] > 0
    assert diag["unitarity"] < 1e-12 and diag["plus_negative_modes"] < 1e-12


def test_singular_loop_detected():
    g = TwistedLoop.constant(np.diag([1.0, 0.0]), 8)
    with pytest.raises(SingularLoopError):
        iwasawa(g)


def test_qr_b():
    c = np.array([[1 + 1j, 2], [0.5j, -1]])
    u, b = qr_b(c)
    assert np.allclose(u @ b, c)
    assert abs(b[1, 0]) < 1e-15 and np.all(np.diag(b).real > 0) and np.allclose(np.diag(b).imag, 0)


def test_normalize_to_B_cases(rng):
    w = random_plus_loop(rng, 16)
    assert normalize_to_B(w).distance(w) < 1e-14
    rot = TwistedLoop.constant(np.array([[0, 1], [-1, 0]]), 16)
    out = normalize_to_B(rot)
    assert np.allclose(out.coefficient(0), np.eye(2))
    phase = TwistedLoop.constant(np.diag([1j, -1j]), 16)
    assert np.allclose(normalize_to_B(multiply(phase, w)).coefficient(0), w.coefficient(0))
