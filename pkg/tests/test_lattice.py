from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcmc.cylinder import LatticeConstants, make_cylinder, vacuum_frame
from dcmc.errors import StructureViolationError, ValidationError
from dcmc.lattice import (
    DressingSeed,
    LatticeFrame,
    Window,
    build_lattice,
    dress_step,
    extract_lax,
    random_seed,
    reconstruct_omega,
    vacuum_lattice,
    verify_integrability,
)
from dcmc.loops import TwistedLoop, multiply


def test_window_basics():
    w = Window.centred(4)
    assert w.as_tuple() == (-2, 1, -2, 1) and w.shape == (4, 4)
    assert (0, 0) in w and (2, 0) not in w
    assert list(w.sites())[:2] == [(-2, -2), (-2, -1)]
    assert w.index(-2, -2) == (0, 0)
    with pytest.raises(ValidationError):
        Window(1, 0, 0, 0)


def test_seed_validation():
    N = 16
    c = np.zeros((2 * N + 1, 2, 2), dtype=complex)
    c[N] = np.eye(2)
    c[N - 1] = [[0, 1], [0, 0]]
    with pytest.raises(ValidationError):
        DressingSeed(TwistedLoop(c))
    c[N - 1] = 0
    c[N] = np.diag([2.0, 2.0])
    with pytest.raises(ValidationError):
        DressingSeed(TwistedLoop(c))


def test_random_seed_is_reproducible():
    a, b = random_seed(32, 5), random_seed(32, 5)
    assert a.h_plus.distance(b.h_plus) == 0
    assert "seed=5" in a.description
    assert random_seed(32, 6).h_plus.distance(a.h_plus) > 1e-3


def test_identity_seed_step_is_vacuum(cyl):
    I = TwistedLoop.identity(cyl.N)
    F, p = dress_step(I, I, "U", cyl)
    assert F.distance(cyl.U0) < 1e-12 and p.distance(I) < 1e-12


def test_step_and_inverse_step(cyl_mixed):
    h = random_seed(cyl_mixed.N, 3).h_plus
    from dcmc.iwasawa import normalize_to_B

    h = normalize_to_B(h)
    I = TwistedLoop.identity(cyl_mixed.N)
    F1, p1 = dress_step(I, h, "V", cyl_mixed, +1)
    F0, p0 = dress_step(F1, p1, "V", cyl_mixed, -1)
    assert F0.distance(I) < 1e-8 and p0.distance(h) < 1e-8


def test_steps_commute(cyl_mixed):
    from dcmc.iwasawa import normalize_to_B

    h = normalize_to_B(random_seed(cyl_mixed.N, 4).h_plus)
    I = TwistedLoop.identity(cyl_mixed.N)
    a = dress_step(*dress_step(I, h, "U", cyl_mixed), "V", cyl_mixed)[0]
    b = dress_step(*dress_step(I, h, "V", cyl_mixed), "U", cyl_mixed)[0]
    assert a.distance(b) < 1e-8


def test_identity_seed_reproduces_vacuum(cyl):
    w = Window.centred(6)
    L = build_lattice(DressingSeed.identity(cyl.N), cyl, w)
    assert max(L.frame(*s).distance(vacuum_frame(cyl, *s)) for s in w.sites()) < 1e-10


def test_origin_frame_is_identity(dressed):
    assert dressed.frame(0, 0).distance(TwistedLoop.identity(dressed.N)) < 1e-12


def test_build_orders_agree(cyl_mixed):
    seed = random_seed(cyl_mixed.N, 11)
    w = Window(-2, 2, -2, 2)
    row = build_lattice(seed, cyl_mixed, w, "row")
    col = build_lattice(seed, cyl_mixed, w, "column")
    scr = build_lattice(seed, cyl_mixed, w, "scratch", workers=2)
    for s in w.sites():
        assert row.frame(*s).distance(col.frame(*s)) < 1e-10
        assert row.frame(*s).distance(scr.frame(*s)) < 1e-10


def test_parallel_build_is_identical(cyl_mixed):
    seed = random_seed(cyl_mixed.N, 12)
    w = Window(-2, 2, -1, 1)
    a = build_lattice(seed, cyl_mixed, w, workers=1)
    b = build_lattice(seed, cyl_mixed, w, workers=3)
    assert all(np.array_equal(a.frame(*s).coeffs, b.frame(*s).coeffs) for s in w.sites())


def test_window_must_contain_origin(cyl):
    with pytest.raises(ValidationError):
        build_lattice(DressingSeed.identity(cyl.N), cyl, Window(1, 2, 0, 1))
    with pytest.raises(ValidationError):
        build_lattice(DressingSeed.identity(cyl.N), cyl, Window(-1, 1, -1, 1), order="diagonal")


def test_vacuum_lax_field(vacuum):
    lax = extract_lax(vacuum)
    for f in (lax.p, lax.q):
        assert np.nanmax(np.abs(f - 1)) < 1e-12
    for f in (lax.alpha, lax.beta):
        assert np.nanmax(np.abs(f - 1)) < 1e-12
    assert np.isnan(lax.p[-1, 0]) and np.isnan(lax.q[0, -1])


def test_vacuum_residuals(vacuum):
    assert verify_integrability(vacuum).max_residual < 1e-10


def test_dressed_lax_invariants(dressed, dressed_lax):
    rep = verify_integrability(dressed, dressed_lax)
    assert rep.max_residual < 1e-7
    assert np.nanmin(dressed_lax.p) > 0 and np.nanmin(dressed_lax.q) > 0
    c = dressed.constants
    mod = np.abs(dressed_lax.alpha) ** 2 + c.r1**2 * (dressed_lax.p - 1 / dressed_lax.p) ** 2
    assert np.nanmax(np.abs(mod - 1)) < 1e-8


def test_dressed_lattice_is_not_vacuum(dressed_lax):
    assert np.nanmax(np.abs(dressed_lax.p - 1)) > 1e-2


def test_corrupted_frame_is_detected(dressed):
    frames = dict(dressed.frames)
    c = frames[(1, 1)].coeffs.copy()
    c[dressed.N, 0, 0] += 1e-3
    frames[(1, 1)] = TwistedLoop(c)
    bad = LatticeFrame(dressed.window, dressed.constants, frames, {}, dressed.N)
    with pytest.raises(StructureViolationError):
        extract_lax(bad)
    rep = verify_integrability(bad)
    w = bad.window
    near = max(np.nanmax(getattr(rep, k)[w.index(1, 1)]) for k in ("alpha_modulus", "zero_curvature")) + rep.template
    assert near > 1e-4


def test_omega_vacuum(vacuum):
    lax = extract_lax(vacuum)
    om, res = reconstruct_omega(lax)
    assert np.max(np.abs(om)) < 1e-12
    om, _ = reconstruct_omega(lax, omega00=0.3)
    w = vacuum.window
    for m, n in w.sites():
        assert abs(om[w.index(m, n)] - 0.3 * (-1) ** (m + n)) < 1e-12


def test_omega_dressed(dressed_lax):
    _, res = reconstruct_omega(dressed_lax)
    assert res < 1e-7


@given(r1=st.sampled_from([0.3, 0.5, 1.0]), r2=st.sampled_from([0.3, 0.5, 1.0]), seed=st.integers(0, 2**63))
def test_small_dressed_windows(r1, r2, seed):
    cyl = make_cylinder(LatticeConstants(r1, r2))
    L = build_lattice(random_seed(cyl.N, seed), cyl, Window(-1, 1, -1, 1))
    assert verify_integrability(L, extract_lax(L)).max_residual < 1e-7
