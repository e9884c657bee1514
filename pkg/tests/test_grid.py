import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirac_moutard import scenarios
from dirac_moutard.grid import (FormField, Grid2D, GridError, GridPath, IncompatibleSourceError,
                                canonical_path, closedness_defect, dump_field, fd,
                                integrate_canonical, load_field, loop_integrals, path_integrate,
                                rectangle_loop, solve_dbar, spectral)
from dirac_moutard.weierstrass import weierstrass_form


def box(n=17, half=1.0):
    return Grid2D.box(-half, half, -half, half, n)


# --- grids -----------------------------------------------------------------

def test_grid_construction():
    g = Grid2D.lattice_cell(2 * np.pi, 3.0, 16, 8)
    assert g.shape == (9, 17) and g.is_closed_cell
    assert g.lattice == (2 * np.pi + 0j, 3j)
    p = Grid2D.periodic(1.0, 2.0, 8)
    assert p.periodic_x and p.periodic_y and not p.is_closed_cell
    assert box(17).center_node() == (8, 8)
    with pytest.raises(GridError):
        Grid2D.box(0, 1, 0, 1, 4)
    with pytest.raises(GridError):
        box().check_field(np.zeros((3, 3)))


def test_grid_dict_round_trip():
    g = Grid2D.lattice_cell(2.0, 3.0, 10)
    assert Grid2D.from_dict(g.to_dict()) == g


# --- finite differences --------------------------------------------------------

def test_stencil_weights_textbook():
    assert np.allclose(fd.stencil_weights((-1, 0, 1), 1), [-0.5, 0, 0.5], atol=1e-15)
    assert np.allclose(fd.stencil_weights((-1, 0, 1), 2), [1, -2, 1], atol=1e-14)
    assert np.allclose(fd.stencil_weights((0, 1, 2), 1), [-1.5, 2, -0.5], atol=1e-14)
    assert np.allclose(fd.stencil_weights((0, 1, 2, 3), 1), [-11 / 6, 3, -1.5, 1 / 3], atol=1e-13)
    assert np.allclose(fd.stencil_weights((-2, -1, 0, 1, 2), 1),
                       [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], atol=1e-14)


def test_wirtinger_examples_exact():
    g = box()
    z = g.z
    assert np.allclose(fd.d_z(z, g), 1.0, atol=1e-12)
    assert np.allclose(fd.d_zbar(z, g), 0.0, atol=1e-12)
    assert np.allclose(fd.d_zbar(np.conj(z), g), 1.0, atol=1e-12)
    assert np.allclose(fd.d_z(z * np.conj(z), g), np.conj(z), atol=1e-12)


def test_sin_periodic_error_bound():
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, 32)
    X, _ = g.xy
    h = g.hx
    err = np.abs(fd.d_z(np.sin(X), g) - 0.5 * np.cos(X)).max()
    assert err <= h**2 / 6
    err = np.abs(fd.d_zbar(np.sin(X), g) - 0.5 * np.cos(X)).max()
    assert err <= h**2 / 6


@pytest.mark.parametrize("accuracy,order", [(2, 2.0), (4, 4.0)])
def test_fd_convergence_including_edges(accuracy, order):
    errs = []
    for n in (33, 65):
        g = box(n)
        X, Y = g.xy
        f = np.exp(X) * np.sin(2 * Y)
        exact = 0.5 * (np.exp(X) * np.sin(2 * Y) - 2j * np.exp(X) * np.cos(2 * Y))
        errs.append(np.abs(fd.d_z(f, g, accuracy) - exact).max())
    assert abs(np.log2(errs[0] / errs[1]) - order) < 0.3


def test_second_derivative_edges_second_order():
    errs = []
    for n in (33, 65):
        g = box(n)
        X, Y = g.xy
        f = np.sin(X + 0.3) * np.cosh(Y)
        exact = 0.25 * (-np.sin(X + 0.3) * np.cosh(Y) + np.sin(X + 0.3) * np.cosh(Y))
        errs.append(np.abs(fd.d_zzbar(f, g) - exact).max())
    assert errs[1] < errs[0] / 3.2


@given(st.integers(0, 2**31 - 1))
def test_stencil_identities(seed):
    r = np.random.default_rng(seed)
    g = box(9)
    f = r.normal(size=g.shape)
    dz, dzb = fd.d_z(f, g), fd.d_zbar(f, g)
    assert np.allclose(dz + dzb, fd.d_dx(f, g), rtol=0, atol=1e-12 * np.abs(f).max() / g.hx)
    assert np.array_equal(np.conj(dz), dzb)


# --- spectral ----------------------------------------------------------------

def test_spectral_derivatives_exact():
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, 16)
    X, Y = g.xy
    f = np.exp(1j * (2 * X + 3 * Y))
    assert np.allclose(spectral.d_z(f, g), 0.5 * (2j + 3) * f, atol=1e-12)
    assert np.allclose(spectral.d_zbar(f, g), 0.5 * (2j - 3) * f, atol=1e-12)
    assert np.allclose(spectral.d_z(f, g, order=3), (0.5 * (2j + 3)) ** 3 * f, atol=1e-10)
    assert np.allclose(spectral.d_zzbar(f, g), -0.25 * 13 * f, atol=1e-12)


def test_spectral_bloch_twist():
    # f(x + 2 pi) = -f(x): half-integer wavenumber
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, 16)
    X, Y = g.xy
    f = np.exp(0.5j * X + 1j * Y)
    got = spectral.d_dx(f, g, twist=(-1.0, 1.0))
    assert np.allclose(got, 0.5j * f, atol=1e-12)


def test_spectral_on_lattice_cell():
    g = Grid2D.lattice_cell(2 * np.pi, 4.0, 32, 16)
    X, Y = g.xy
    f = np.cos(X) * np.sin(np.pi * Y / 2)
    dy = spectral.d_dy(f, g)
    assert np.allclose(dy, np.cos(X) * np.pi / 2 * np.cos(np.pi * Y / 2), atol=1e-11)


def test_solve_dbar_examples():
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, 32)
    X, _ = g.xy
    assert np.array_equal(solve_dbar(np.zeros(g.shape), g), np.zeros(g.shape))
    assert np.allclose(solve_dbar(0.5j * np.exp(1j * X), g), np.exp(1j * X), atol=1e-10)
    assert np.allclose(solve_dbar(-0.5 * np.sin(2 * X), g), 0.5 * np.cos(2 * X), atol=1e-10)
    with pytest.raises(IncompatibleSourceError):
        solve_dbar(np.ones(g.shape), g)


@given(st.integers(0, 2**31 - 1))
def test_solve_dbar_inverts_dbar(seed):
    r = np.random.default_rng(seed)
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, 16)
    X, Y = g.xy
    f = sum(complex(*r.normal(size=2)) * np.exp(1j * (kx * X + ky * Y))
            for kx, ky in r.integers(-4, 5, size=(5, 2)) if (kx, ky) != (0, 0))
    if np.isscalar(f):
        return
    src = spectral.d_zbar(f, g)
    back = spectral.d_zbar(solve_dbar(src, g), g)
    assert np.allclose(back, src, atol=1e-10 * max(1.0, np.abs(src).max()))


def test_solve_dbar_lattice_cell():
    g = Grid2D.lattice_cell(2 * np.pi, 2 * np.pi, 32)
    X, _ = g.xy
    F = solve_dbar(-0.5 * np.sin(2 * X), g)
    assert F.shape == g.shape
    assert np.allclose(F, 0.5 * np.cos(2 * X), atol=1e-10)


# --- paths -------------------------------------------------------------------

def const_form(g, P, Q=0.0):
    return FormField(g, np.full(g.shape, P, complex), np.full(g.shape, Q, complex))


def test_path_integral_examples():
    g = box(11)
    z = g.z
    path = canonical_path(g, (2, 1), (7, 9))
    got = path_integrate(const_form(g, 1.0), path)
    assert got == pytest.approx(z[7, 9] - z[2, 1], abs=1e-14)
    # P = z along the x axis from 0 to 1: antiderivative z^2 / 2
    line = GridPath([(5, ix) for ix in range(5, 11)])
    got = path_integrate(FormField(g, z, np.zeros_like(z)), line)
    assert got == pytest.approx(0.5, abs=10 * g.hx**2)


def test_green_loop_of_zbar():
    # loop integral of zbar dz = 2 i Area, exact for the trapezoid rule (linear integrand)
    g = box(11)
    z = g.z
    form = FormField(g, np.conj(z), np.zeros_like(z))
    loop = rectangle_loop(g, (1, 2), (8, 6))
    area = (6 - 2) * g.hx * (8 - 1) * g.hy
    assert path_integrate(form, loop) == pytest.approx(2j * area, abs=1e-13)
    cell = loop_integrals(form)
    assert np.allclose(cell, 2j * g.hx * g.hy, atol=1e-14)
    assert np.allclose(closedness_defect(form), 2 * g.hx * g.hy, atol=1e-14)


def test_exact_form_is_closed():
    g = box(21)
    z = g.z
    form = FormField(g, 2 * z, np.zeros_like(z))
    assert closedness_defect(form).max() <= 1e-12


def nodes(n):
    return st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))


@given(nodes(12), nodes(12), nodes(12))
def test_reversal_and_concatenation(a, b, c):
    g = box(12)
    X, Y = g.xy
    form = FormField(g, np.exp(X) * np.cos(Y) + 1j * Y**2, np.sin(X * Y) + 0j)
    ab, bc = canonical_path(g, a, b), canonical_path(g, b, c)
    I_ab = path_integrate(form, ab)
    assert abs(I_ab + path_integrate(form, ab.reversed())) <= 1e-14
    joined = path_integrate(form, ab + bc)
    assert abs(joined - (I_ab + path_integrate(form, bc))) <= 1e-13


def test_paths_must_meet():
    g = box(9)
    with pytest.raises(GridError):
        canonical_path(g, (0, 0), (1, 1)) + canonical_path(g, (2, 2), (3, 3))
    with pytest.raises(GridError):
        path_integrate(const_form(g, 1.0), GridPath([(0, 0), (2, 0)]))


@given(nodes(10), nodes(10))
def test_integrate_canonical_matches_paths(base, target):
    g = box(10)
    X, Y = g.xy
    form = FormField(g, X * Y + 1j, np.exp(Y) + 0j)
    field = integrate_canonical(form, base)
    want = path_integrate(form, canonical_path(g, base, target))
    assert abs(field[target] - want) <= 1e-13


def test_spectral_quadrature_periodic():
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, 32)
    X, Y = g.xy
    # d(sin x cos y) = cos x cos y dx - sin x sin y dy, written as P dz + Q dzbar
    fx = np.cos(X) * np.cos(Y)
    fy = -np.sin(X) * np.sin(Y)
    P, Q = 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
    base = (3, 5)
    got = integrate_canonical(FormField(g, P, Q), base, "spectral")
    want = np.sin(X) * np.cos(Y) - np.sin(X[base]) * np.cos(Y[base])
    assert np.allclose(got, want, atol=1e-12)


def test_weierstrass_form_closed_iff_solution():
    # closed form: per-cell defect at least third order; the trapezoid loop
    # error cancels on opposite edges, so the observed rate is ~h^4
    d, dp = [], []
    for n in (32, 64):
        sc = scenarios.sphere_offset(n)
        d.append(closedness_defect(weierstrass_form(sc.psi, sc.grid)).max())
        bump = 0.1 * np.exp(-np.abs(sc.grid.z) ** 2)
        psi = sc.psi * (1.0 + bump)[..., None]
        dp.append(closedness_defect(weierstrass_form(psi, sc.grid)).max())
    assert d[0] / d[1] > 7.0
    # a non-solution has a nonzero curl: defect ~ curl * cell area
    assert 3.0 < dp[0] / dp[1] < 5.0
    assert dp[1] > 100 * d[1]


# --- io ----------------------------------------------------------------------

def test_field_dump_round_trip(tmp_path, rng):
    g = Grid2D.lattice_cell(2.0, 3.0, 8)
    vals = rng.normal(size=g.shape + (2,)) + 1j * rng.normal(size=g.shape + (2,))
    dump_field(tmp_path, "psi", g, vals, {"note": "x"})
    g2, v2 = load_field(tmp_path / "psi.json")
    assert g2 == g
    assert np.array_equal(v2, vals)
