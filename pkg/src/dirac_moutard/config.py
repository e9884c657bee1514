"""Scenario configuration: JSON files validated against the shipped schema."""
from __future__ import annotations

import inspect
import json
from dataclasses import replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import scenarios
from .grid import load_field
from .weierstrass import frame_from_immersion, integrate_surface
from .moebius import ORIGIN_EPS, SingularityError

MIN_RADIUS = 0.05

# FD thresholds are multiples of h^2 (times a field scale); the rest are absolute
DEFAULT_TOLERANCES = {
    "fd": 5.0,
    "fd_inversion": 10.0,
    "residual": 100.0,
    "spectral": 1e-8,
    "algebraic": 1e-10,
    "floquet": 1e-6,
    "constraint": 1e-4,
    "manakov": 1e-6,
    "exact": 1e-12,
    "order_min": 1.7,
    "order_max": 2.3,
}


class ConfigParseError(ValueError):
    """The scenario file is missing or is not valid JSON."""


class ConfigValidationError(ValueError):
    """The scenario parses but violates the schema or a semantic constraint."""


def schema() -> dict:
    text = resources.files("dirac_moutard").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def parse_config(text: str) -> dict:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc.strerror}")
    cfg = parse_config(text)
    validate_config(cfg)
    cfg.setdefault("_source_dir", str(path.resolve().parent))
    return cfg


def validate_config(cfg) -> None:
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigValidationError(f"{where}: {e.message}")
    if cfg["family"] == "custom_spinor_file" and "custom" not in cfg:
        raise ConfigValidationError("custom_spinor_file needs a 'custom' block")
    a = cfg.get("params", {}).get("a")
    if a is not None and not a > 1.0:
        raise ConfigValidationError(f"params/a: torus needs a > 1, got {a}")


def tolerances(cfg: dict, scale: float = 1.0) -> dict:
    """Configured tolerances with defaults; ``scale`` multiplies every threshold."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    for k in tol:
        if k not in ("order_min", "order_max"):
            tol[k] *= scale
    return tol


def _family_kwargs(cfg: dict) -> dict:
    fam = cfg["family"]
    g = cfg.get("grid", {})
    p = cfg.get("params", {})
    kw = {}
    if "n" in g:
        kw["cells" if fam == "torus_of_revolution" else "n"] = g["n"]
    if "half_width" in g and fam != "torus_of_revolution":
        kw["half"] = g["half_width"]
    allowed = {"plane": ("height",), "sphere_offset": ("radius", "center"),
               "enneper": ("offset",), "cylinder": ("rho",), "torus_of_revolution": ("a",)}
    for key, val in p.items():
        if key not in allowed.get(fam, ()):
            raise ConfigValidationError(f"params/{key}: not a parameter of {fam}")
        kw[key] = tuple(val) if isinstance(val, list) else val
    return kw


def _resolve(cfg, name):
    path = Path(name)
    if not path.is_absolute():
        path = Path(cfg.get("_source_dir", ".")) / path
    return path


def _custom_scenario(cfg: dict, refine: int) -> scenarios.SurfaceScenario:
    c = cfg["custom"]
    try:
        grid, psi = load_field(_resolve(cfg, c["spinor"]))
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigValidationError(f"custom/spinor: cannot load field ({exc})")
    if refine != 1:
        raise ConfigValidationError("custom spinor files cannot be refined")
    if psi.shape != grid.shape + (2,):
        raise ConfigValidationError("custom/spinor: expected a two-component field")
    if "potential" in c:
        try:
            _, U = load_field(_resolve(cfg, c["potential"]))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigValidationError(f"custom/potential: cannot load field ({exc})")
        if np.abs(U.imag).max() > 1e-12:
            raise ConfigValidationError("custom/potential: must be real")
        U = U.real
    else:
        base = grid.center_node()
        U = frame_from_immersion(integrate_surface(psi, grid, base).r, grid).U
    return scenarios.SurfaceScenario("custom_spinor_file", grid, psi, U, None,
                                     grid.center_node(), "user supplied")


def build_scenario(cfg: dict, refine: int = 1) -> scenarios.SurfaceScenario:
    """Sample the configured family; ``refine`` multiplies the resolution."""
    fam = cfg["family"]
    if fam == "custom_spinor_file":
        sc = _custom_scenario(cfg, refine)
    else:
        kw = _family_kwargs(cfg)
        make = scenarios.BUILTIN[fam]
        key = "cells" if fam == "torus_of_revolution" else "n"
        if refine != 1:
            default = inspect.signature(make).parameters[key].default
            kw[key] = kw.get(key, default) * refine
        try:
            sc = make(**kw)
        except ValueError as exc:
            raise ConfigValidationError(str(exc))
    if "base" in cfg:
        iy, ix = cfg["base"]
        if refine != 1:
            iy, ix = iy * refine, ix * refine
        if not (iy < sc.grid.ny and ix < sc.grid.nx):
            raise ConfigValidationError(f"base: node {cfg['base']} is outside the grid")
        sc = replace(sc, base=(iy, ix))
    if "x0" in cfg:
        x0 = np.asarray(cfg["x0"], dtype=float)
        r = None if sc.r_exact is None else sc.r_exact + (x0 - sc.r_exact[sc.base])
        sc = replace(sc, r_exact=r, x0_value=x0)
    return sc


def check_inversion_safe(sc: scenarios.SurfaceScenario, min_radius: float = MIN_RADIUS):
    """Inversion and Moutard pipelines need the surface to stay away from the origin.

    A node at the origin is a singularity; a near miss is a configuration error.
    """
    if sc.r_exact is None:
        r = integrate_surface(sc.psi, sc.grid, sc.base, sc.x0).r
        m = float(np.linalg.norm(r, axis=-1).min())
    else:
        m = sc.min_radius
    if m < ORIGIN_EPS:
        raise SingularityError(f"a surface node sits at the origin (|r| = {m:.1e})")
    if not m >= min_radius:
        raise ConfigValidationError(
            f"surface comes within {m:.3g} of the origin (minimum {min_radius}); move x0")
    return m
