import warnings

import numpy as np
import pytest

from dirac_moutard import scenarios
from dirac_moutard.algebra import (GAMMA, SingularMatrixError, embed_field, extract_field,
                                   is_in_h, matmul, quat_field, su2_embed)
from dirac_moutard.grid import Grid2D, GridError
from dirac_moutard.grid.paths import closedness_defect
from dirac_moutard.moebius import inverted_potential, inverted_potential_matrix
from dirac_moutard.moutard import (NotFloquetError, fix_floquet_representative,
                                   floquet_defect, floquet_multipliers, k_matrix,
                                   leibniz_defect, matrix_solution, moutard_data,
                                   moutard_potential, moutard_transform,
                                   moutard_transform_gauged, moutard_weight, omega_form,
                                   omega_twist, s_matrix, shape_defect, surface_gauge)
from dirac_moutard.weierstrass import dirac_apply, dirac_residual, DiracData

from .conftest import frame_of


def lattice_kwargs(sc):
    mu = floquet_multipliers(sc.psi, sc.grid, strict=False).multipliers
    return {"quadrature": "spectral", "twist": tuple(omega_twist(m, m) for m in mu)}


@pytest.fixture(scope="module")
def sphere_md(sphere):
    return moutard_data(sphere.psi, sphere.U, sphere.grid, sphere.base, sphere.x0)


@pytest.fixture(scope="module")
def plane_md(plane):
    return moutard_data(plane.psi, plane.U, plane.grid, plane.base, plane.x0)


def test_matrix_solution_examples():
    assert np.array_equal(matrix_solution(np.array([1.0, 0.0])), np.eye(2))
    want = np.array([[0, -1], [1, 0]])
    assert np.array_equal(matrix_solution(np.array([0.0, 1.0])), want)
    assert np.array_equal(want, -GAMMA)


def test_second_column_solves(sphere):
    P = matrix_solution(sphere.psi)
    assert is_in_h(P).all()
    col2 = P[..., 1]
    r1 = np.abs(dirac_residual(DiracData(sphere.grid, sphere.psi, sphere.U))).max()
    r2 = np.abs(dirac_residual(DiracData(sphere.grid, col2, sphere.U))).max()
    assert r2 < 10 * sphere.grid.h**2 * np.abs(sphere.psi).max()
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_omega_constant_example():
    g = Grid2D.box(-1, 1, -1, 1, 9)
    eye = np.broadcast_to(np.eye(2, dtype=complex), g.shape + (2, 2))
    w = omega_form(eye, eye, g)
    # sigma0 dy - i sigma3 dx
    assert np.array_equal(w.along_x(), np.broadcast_to(-1j * np.diag([1.0, -1.0]), w.along_x().shape))
    assert np.array_equal(w.along_y(), np.broadcast_to(np.eye(2), w.along_y().shape))


def test_omega_bilinear(sphere, rng):
    P = matrix_solution(sphere.psi)
    Q = matmul(P, quat_field(*(rng.normal(size=2) + 1j * rng.normal(size=2))))
    a = omega_form(2 * P, Q, sphere.grid)
    b = omega_form(P, Q, sphere.grid)
    assert np.array_equal(a.along_x(), 2 * b.along_x())
    assert np.array_equal(a.along_y(), 2 * b.along_y())


def test_omega_closed_for_solutions():
    # per-cell defect falls at least like h^3 under refinement
    d = []
    for n in (64, 128):
        sc = scenarios.sphere_offset(n)
        P = matrix_solution(sc.psi)
        d.append(closedness_defect(omega_form(P, P, sc.grid)).max())
    assert d[0] / d[1] > 2**3 * 0.8


def test_s00_is_surface(sphere, sphere_frame, sphere_md):
    got = extract_field(sphere_md.S00)
    assert np.abs(got - sphere_frame.r).max() < 1e-10
    assert np.abs(got - sphere.r_exact).max() < 5 * sphere.grid.h**2


def test_s00_plane_by_hand(plane, plane_md):
    X, Y = plane.grid.xy
    want = embed_field(np.stack([-Y, -X, np.ones_like(X)], -1))
    assert np.abs(plane_md.S00 - want).max() < 1e-13


def test_s_constant_shifts(sphere):
    P = matrix_solution(sphere.psi)
    C = su2_embed((0.3, -1.0, 2.0)).matrix
    a = s_matrix(P, P, sphere.grid, sphere.base)
    b = s_matrix(P, P, sphere.grid, sphere.base, C)
    assert np.array_equal(b, a + C)


def test_s_warns_when_not_closed(sphere):
    # (zbar^2, 0) is not a solution for U = 0
    z = sphere.grid.z
    P = matrix_solution(np.stack([np.conj(z) ** 2, 0 * z], -1))
    with pytest.warns(RuntimeWarning):
        s_matrix(P, P, sphere.grid, sphere.base)


def test_k_example():
    psi0 = np.eye(2, dtype=complex)[None, None]
    S = su2_embed((0, 0, 1)).matrix[None, None]
    K = k_matrix(psi0, S)
    assert np.allclose(K[0, 0], [[-1j, 0], [0, 1j]], atol=1e-15)
    assert moutard_weight(K)[0, 0] == pytest.approx(-1.0)


def test_k_shape(sphere_md, plane_md):
    for md in (sphere_md, plane_md):
        assert shape_defect(md.K) < 1e-10
        assert np.isrealobj(md.W)


def test_singular_s(plane):
    psi0 = matrix_solution(plane.psi)
    S = embed_field(np.zeros(plane.grid.shape + (3,)))
    with pytest.raises(SingularMatrixError):
        k_matrix(psi0, S)


def test_plane_weight(plane, plane_md):
    X, Y = plane.grid.xy
    want = -1.0 / (X**2 + Y**2 + 1.0)
    assert np.abs(plane_md.W - want).max() < 1e-13
    assert np.abs(moutard_potential(plane.U, plane_md.psi0, plane_md.S00) - want).max() < 1e-13


def test_weight_vanishes_for_tangent_position(plane):
    # plane through the origin: <r, n> = 0 everywhere, so W = 0
    sc = scenarios.plane(33, height=0.0)
    md = moutard_data(sc.psi, sc.U, sc.grid, sc.base, (0.4, 0.25, 0.0))
    assert np.abs(md.W).max() < 1e-14


@pytest.mark.parametrize("make,n", [(scenarios.sphere_offset, 128), (scenarios.enneper, 128)])
def test_theorem2(make, n):
    sc = make(n)
    md = moutard_data(sc.psi, sc.U, sc.grid, sc.base, sc.x0)
    fr = frame_of(sc)
    exact = fr.__class__(**{**fr.__dict__, "r": sc.r_exact})
    Uinv = inverted_potential(exact)
    scale = max(np.abs(sc.U).max(), np.abs(Uinv).max())
    assert np.abs(md.U_tilde - Uinv).max() < 10 * sc.grid.h**2 * scale


def test_self_transform_vanishes(sphere, sphere_md):
    out = moutard_transform(sphere_md.psi0, sphere_md.psi0, sphere_md.S00, sphere.grid,
                            sphere.base, S0psi=sphere_md.S00)
    assert np.abs(out).max() < 1e-12


def test_theorem1_residual(sphere, sphere_md):
    p0t = sphere_md.psi0_tilde
    U19 = inverted_potential_matrix(sphere_md.psi0, sphere_md.S00, sphere.U)
    assert np.abs(U19 - sphere_md.U_tilde).max() < 1e-12
    res = np.abs(dirac_apply(p0t, U19, sphere.grid)).max() / np.abs(p0t).max()
    assert res < 10 * sphere.grid.h**2 * 3


def test_rotated_companion(sphere, sphere_md, rng):
    g = sphere.grid
    q = scenarios.rotation_quaternion([1.0, 1.0, 0.0], 0.7)
    Psi = matmul(sphere_md.psi0, q)
    S0p = s_matrix(sphere_md.psi0, Psi, g, sphere.base)
    Pt = moutard_transform(Psi, sphere_md.psi0, sphere_md.S00, g, sphere.base, S0psi=S0p)
    Pt21 = moutard_transform_gauged(Psi, sphere_md.psi0_tilde, S0p)
    assert np.abs(Pt - Pt21).max() < 1e-10 * max(1.0, np.abs(Pt).max())
    bound = 10 * g.h**2 * 3
    scale = max(np.abs(Pt).max(), np.abs(Psi).max())
    assert np.abs(dirac_apply(Pt, sphere_md.U_tilde, g)).max() / scale < bound
    for _ in range(10):
        A = quat_field(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
        PA = Pt + matmul(sphere_md.psi0_tilde, A)
        r = np.abs(dirac_apply(PA, sphere_md.U_tilde, g)).max()
        assert r / max(scale, np.abs(PA).max()) < bound


def test_sphere_degree_companion(sphere, sphere_md):
    g = sphere.grid
    Psi = matrix_solution(scenarios.sphere_companion(g.z, 2))
    Pt = moutard_transform(Psi, sphere_md.psi0, sphere_md.S00, g, sphere.base)
    scale = max(np.abs(Pt).max(), np.abs(Psi).max())
    assert np.abs(dirac_apply(Pt, sphere_md.U_tilde, g)).max() / scale < 10 * g.h**2 * 3


def test_leibniz_rule(rng):
    errs = []
    for n in (32, 64):
        g = Grid2D.box(-1, 1, -1, 1, n)
        X, Y = g.xy
        A = quat_field(np.exp(0.5 * X) + 1j * np.sin(Y), np.cos(X * Y) + 0.2j * X)
        B = quat_field(np.sin(X + Y) + 1j, X * Y - 0.3j * np.cos(Y))
        errs.append(np.abs(leibniz_defect(A, B, g)).max())
    assert errs[1] < 10 * (2 / 63) ** 2
    assert errs[0] / errs[1] > 3.0


# --- Floquet ---------------------------------------------------------------

def test_periodic_has_unit_multipliers():
    g = Grid2D.lattice_cell(2 * np.pi, 2 * np.pi, 32)
    X, Y = g.xy
    psi = np.stack([np.exp(1j * X) + 2, np.cos(Y) + 0j], -1)
    fl = floquet_multipliers(psi, g)
    assert np.allclose(fl.multipliers, (1, 1), atol=1e-14)
    assert fl.defect < 1e-14


def test_non_floquet_rejected():
    g = Grid2D.lattice_cell(2 * np.pi, 2 * np.pi, 32)
    X, Y = g.xy
    psi = np.stack([1 + X, 1 + Y + 0j], -1)
    with pytest.raises(NotFloquetError):
        floquet_multipliers(psi, g)
    with pytest.raises(GridError):
        floquet_multipliers(psi, Grid2D.box(-1, 1, -1, 1, 8))


def test_torus_multipliers(torus):
    fl = floquet_multipliers(torus.psi, torus.grid)
    assert np.allclose(fl.multipliers, (-1, -1), atol=1e-6)
    assert fl.defect < 1e-6


def test_floquet_corollary(torus, rng):
    g = torus.grid
    md = moutard_data(torus.psi, torus.U, g, torus.base, torus.x0, **lattice_kwargs(torus))
    X, Y = g.xy
    Psi = matrix_solution(scenarios.torus_floquet_companion(X, Y, torus.params["a"]))
    mu0 = floquet_multipliers(torus.psi, g).multipliers
    flc = floquet_multipliers(Psi, g)
    tw = tuple(omega_twist(a, b) for a, b in zip(mu0, flc.multipliers))
    Pt = moutard_transform(Psi, md.psi0, md.S00, g, torus.base, quadrature="spectral", twist=tw)
    fixed, A, d = fix_floquet_representative(Pt, md.psi0_tilde, flc, g)
    assert d <= 1e-6
    got = floquet_multipliers(fixed, g).multipliers
    assert np.allclose(got, flc.multipliers, atol=1e-6)
    # the fixed representative is already Floquet: a second solve returns A = 0
    _, A2, _ = fix_floquet_representative(fixed, md.psi0_tilde, flc, g)
    assert np.abs(A2).max() < 1e-6
    # local uniqueness: nudging A increases the defect
    for _ in range(5):
        dA = quat_field(*(1e-3 * (rng.normal(size=2) + 1j * rng.normal(size=2))))
        assert floquet_defect(fixed + matmul(md.psi0_tilde, dA), g, flc.multipliers) > 10 * d


def test_surface_gauge_is_embedding():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert np.array_equal(surface_gauge([1, 2, 3]), su2_embed((1, 2, 3)).matrix)
