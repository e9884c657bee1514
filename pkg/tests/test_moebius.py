from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirac_moutard import scenarios
from dirac_moutard.algebra import SingularMatrixError, embed_field
from dirac_moutard.moebius import (SingularityError, inversion_report, inversion_weight,
                                   invert_point, invert_surface, invert_tangent,
                                   inverted_potential, inverted_potential_matrix,
                                   inverted_spinor, real_part_checked)
from dirac_moutard.moutard import matrix_solution, moutard_data
from dirac_moutard.weierstrass import conformal_factor, integrate_surface

from .conftest import frame_of

coord = st.floats(-50, 50, allow_nan=False)
vec3 = st.tuples(coord, coord, coord).map(np.array)
away = vec3.filter(lambda v: np.linalg.norm(v) > 1e-2)


def test_invert_point_examples():
    assert np.array_equal(invert_point([1, 0, 0]), [-1, 0, 0])
    assert np.array_equal(invert_point([0, 2, 0]), [0, -0.5, 0])
    with pytest.raises(SingularityError):
        invert_point([0, 0, 0])


@given(away)
def test_inversion_is_involution(v):
    assert np.allclose(invert_point(invert_point(v)), v, rtol=0, atol=1e-10 * np.linalg.norm(v))


def test_invert_tangent_examples():
    assert np.array_equal(invert_tangent([0, 0, 1], [1, 0, 0]), [-1, 0, 0])
    assert np.array_equal(invert_tangent([0, 0, 1], [0, 0, 1]), [0, 0, 1])


@given(away, vec3, vec3)
def test_tangent_map_is_conformal(x, u, v):
    tu, tv = invert_tangent(x, u), invert_tangent(x, v)
    r4 = np.dot(x, x) ** 2
    scale = max(1.0, np.linalg.norm(u) * np.linalg.norm(v))
    assert abs(np.dot(tu, tv) * r4 - np.dot(u, v)) <= 1e-9 * scale


def test_tangent_map_matches_derivative(rng):
    # T_* u is the directional derivative of T (central difference oracle)
    x = rng.normal(size=3) + [0, 0, 3]
    u = rng.normal(size=3)
    eps = 1e-5
    fd = (invert_point(x + eps * u) - invert_point(x - eps * u)) / (2 * eps)
    assert np.allclose(invert_tangent(x, u), fd, atol=1e-8)


def sphere_fit_residual(p, center, radius):
    return np.abs(np.linalg.norm(p - center, axis=-1) - radius).max()


def test_image_of_offset_sphere_is_sphere(sphere, sphere_frame):
    c, R = np.array(sphere.params["center"]), sphere.params["radius"]
    # image sphere from two antipodal points on the axis
    a, b = invert_point(c + [0, 0, R]), invert_point(c - [0, 0, R])
    center, radius = 0.5 * (a + b), 0.5 * np.linalg.norm(a - b)
    assert np.allclose(center, -c / (c.dot(c) - R * R))
    out = invert_surface(sphere_frame)
    assert sphere_fit_residual(out.r, center, radius) < 5 * sphere.grid.h**2
    exact = invert_point(sphere.r_exact)
    assert sphere_fit_residual(exact, center, radius) < 1e-14


def test_plane_inverts_to_sphere_through_origin(plane_frame):
    out = invert_surface(plane_frame)
    assert sphere_fit_residual(out.r, np.array([0, 0, -0.5]), 0.5) < 1e-14


def test_invert_surface_involution(sphere_frame):
    twice = invert_surface(invert_surface(sphere_frame))
    assert np.allclose(twice.r, sphere_frame.r, rtol=1e-10, atol=0)
    assert np.allclose(twice.e_alpha, sphere_frame.e_alpha, rtol=1e-10)
    assert np.allclose(twice.n, sphere_frame.n, atol=1e-10)


def test_inverted_frame_is_consistent(sphere, sphere_frame):
    out = invert_surface(sphere_frame)
    assert np.allclose(np.linalg.norm(out.n, axis=-1), 1.0, atol=1e-12)
    r2 = np.sum(sphere_frame.r**2, axis=-1)
    assert np.allclose(out.e_alpha, sphere_frame.e_alpha / r2)


def test_plane_inverted_potential(plane, plane_frame):
    X, Y = plane.grid.xy
    want = -1.0 / (X**2 + Y**2 + 1.0)
    assert np.allclose(inverted_potential(plane_frame), want, atol=1e-14)
    assert np.allclose(inversion_weight(plane_frame), want, atol=1e-14)


def test_tangent_normal_gives_no_weight(plane_frame):
    g = plane_frame.grid
    r = plane_frame.r.copy()
    r[..., 2] = 0.0
    r[..., :2] += g.h / 3  # keep nodes off the origin
    fr = replace(plane_frame, r=r)
    assert np.array_equal(inverted_potential(fr), fr.U)


def test_unit_sphere_at_origin():
    sc = scenarios.sphere_offset(128, center=(0.0, 0.0, 0.0))
    fr = frame_of(sc)
    # <r, n> = -1 with the inward spinor normal, so U~ = U - e_alpha
    assert np.abs(inverted_potential(fr) - (sc.U - fr.e_alpha)).max() < 5 * sc.grid.h**2
    rep = inversion_report(fr)
    scale = max(np.abs(sc.U).max(), np.abs(rep.U_formula).max())
    assert rep.max_discrepancy < 10 * sc.grid.h**2 * scale


def test_inverted_spinor_conformal_factor(sphere, sphere_frame):
    md = moutard_data(sphere.psi, sphere.U, sphere.grid, sphere.base, sphere.x0)
    p0t = inverted_spinor(md.psi0, md.S00)
    r2 = np.sum(sphere.r_exact**2, axis=-1)
    got = conformal_factor(p0t[..., 0])
    assert np.abs(got - sphere_frame.e_alpha / r2).max() < 5 * sphere.grid.h**2


def test_spinor_sign_gauge_is_invisible(sphere):
    md = moutard_data(sphere.psi, sphere.U, sphere.grid, sphere.base, sphere.x0)
    p0t = md.psi0_tilde[..., 0]
    a = integrate_surface(p0t, sphere.grid, sphere.base).r
    b = integrate_surface(-p0t, sphere.grid, sphere.base).r
    assert np.array_equal(a, b)


def test_potential_matrix_plane(plane):
    md = moutard_data(plane.psi, plane.U, plane.grid, plane.base, plane.x0)
    X, Y = plane.grid.xy
    got = inverted_potential_matrix(md.psi0, md.S00, plane.U)
    assert np.allclose(got, -1.0 / (X**2 + Y**2 + 1.0), atol=1e-14)


def test_singular_s_is_reported(plane):
    psi0 = matrix_solution(plane.psi)
    S = embed_field(plane.r_exact)
    S[3, 4] = 0.0
    with pytest.raises(SingularMatrixError):
        inverted_spinor(psi0, S)


def test_reality_check():
    assert np.array_equal(real_part_checked(np.array([1 + 1e-12j]), 1.0), [1.0])
    with pytest.raises(ValueError):
        real_part_checked(np.array([1 + 1e-3j]), 1.0)


def test_origin_nodes_excluded(plane_frame):
    r = plane_frame.r - plane_frame.r[plane_frame.base]
    fr = replace(plane_frame, r=r)
    rep = inversion_report(fr)
    assert tuple(fr.base) in [tuple(p) for p in rep.excluded_nodes]
    assert np.isnan(invert_surface(fr).r[fr.base]).all()
