import json

import numpy as np
import pytest

from dirac_moutard import config, scenarios
from dirac_moutard.export import read_obj_vertices, write_obj
from dirac_moutard.grid import dump_field
from dirac_moutard.moebius import SingularityError


def test_schema_ships_and_validates():
    s = config.schema()
    assert s["type"] == "object"
    config.validate_config({"family": "plane"})
    with pytest.raises(config.ConfigValidationError, match="grid"):
        config.validate_config({"family": "plane", "grid": {"n": "many"}})
    with pytest.raises(config.ConfigValidationError):
        config.validate_config({"grid": {"n": 32}})


def test_parse_error_names_position():
    with pytest.raises(config.ConfigParseError, match="line 1"):
        config.parse_config("{,}")


def test_tolerance_defaults_and_scale():
    tol = config.tolerances({"tolerances": {"fd": 7.0}}, 2.0)
    assert tol["fd"] == 14.0
    assert tol["spectral"] == 2e-8
    assert (tol["order_min"], tol["order_max"]) == (1.7, 2.3)


def test_build_scenario_refines():
    cfg = {"family": "sphere_offset", "grid": {"n": 32}}
    assert config.build_scenario(cfg).grid.nx == 32
    assert config.build_scenario(cfg, 2).grid.nx == 64
    t = config.build_scenario({"family": "torus_of_revolution", "grid": {"n": 16}}, 2)
    assert t.grid.nx == 33 and t.grid.is_closed_cell


def test_x0_moves_the_oracle():
    sc = config.build_scenario({"family": "plane", "grid": {"n": 17}, "x0": [1.0, 2.0, 3.0]})
    assert np.allclose(sc.r_exact[sc.base], [1, 2, 3])
    assert np.allclose(sc.x0, [1, 2, 3])


def test_base_outside_grid():
    with pytest.raises(config.ConfigValidationError):
        config.build_scenario({"family": "plane", "grid": {"n": 17}, "base": [40, 2]})


def test_inversion_safety():
    sc = config.build_scenario({"family": "plane", "grid": {"n": 17}})
    assert config.check_inversion_safe(sc) == pytest.approx(1.0)
    near = config.build_scenario({"family": "plane", "grid": {"n": 17}, "x0": [0, 0, 0.01]})
    with pytest.raises(config.ConfigValidationError):
        config.check_inversion_safe(near)
    hit = config.build_scenario({"family": "plane", "grid": {"n": 17}, "x0": [0, 0, 0]})
    with pytest.raises(SingularityError):
        config.check_inversion_safe(hit)


def test_custom_spinor_file(tmp_path):
    sc = scenarios.sphere_offset(32)
    dump_field(tmp_path, "spinor", sc.grid, sc.psi)
    dump_field(tmp_path, "U", sc.grid, sc.U)
    cfg = {"family": "custom_spinor_file", "custom": {"spinor": "spinor.json",
                                                      "potential": "U.json"}}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    got = config.build_scenario(config.load_config(tmp_path / "c.json"))
    assert np.array_equal(got.psi, sc.psi)
    assert np.array_equal(got.U, sc.U)
    # without a potential it is recomputed from the geometry
    cfg["custom"].pop("potential")
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    got = config.build_scenario(config.load_config(tmp_path / "c.json"))
    inner = (slice(4, -4), slice(4, -4))
    assert np.abs(got.U - sc.U)[inner].max() < 20 * sc.grid.h**2
    with pytest.raises(config.ConfigValidationError):
        config.build_scenario(config.load_config(tmp_path / "c.json"), 2)


def test_custom_missing_block():
    with pytest.raises(config.ConfigValidationError):
        config.validate_config({"family": "custom_spinor_file"})


def test_obj_round_trip(tmp_path):
    sc = scenarios.sphere_offset(16)
    write_obj(tmp_path / "m.obj", sc.r_exact)
    v = read_obj_vertices(tmp_path / "m.obj")
    assert np.allclose(v, sc.r_exact.reshape(-1, 3), rtol=1e-12)
    faces = [ln for ln in (tmp_path / "m.obj").read_text().splitlines() if ln.startswith("f ")]
    assert len(faces) == 2 * 15 * 15


def test_obj_skips_bad_cells(tmp_path):
    r = scenarios.plane(9).r_exact.copy()
    r[4, 4] = np.nan
    write_obj(tmp_path / "m.obj", r, np.broadcast_to([0, 0, 1.0], r.shape))
    text = (tmp_path / "m.obj").read_text()
    faces = [ln for ln in text.splitlines() if ln.startswith("f ")]
    assert len(faces) == 2 * (64 - 4)
    assert "//" in faces[0]
