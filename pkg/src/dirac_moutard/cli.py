"""Command-line front end: ``dirac-moutard <command> --scenario cfg.json``.

Exit codes: 0 all checks pass, 1 a check failed, 2 the config or the command
line could not be parsed, 3 the config failed validation, 4 a singular
matrix or a point at the origin aborted the run.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import mnv, moebius, moutard, scenarios
from .algebra import SingularMatrixError, extract_field, matmul, quat_field
from .export import write_obj
from .grid import Grid2D, GridError, dump_field
from .report import Report
from .weierstrass import (ConformalityError, conformality_defect, dirac_apply, integrate_surface,
                          spinor_from_surface)

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_VALIDATION, EXIT_SINGULAR = 0, 1, 2, 3, 4
COMMANDS = ("surface", "invert", "moutard", "mnv-check", "mnv-evolve", "floquet",
            "list-scenarios")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_PARSE, f"error: {message}\n")


def _order(e_coarse, e_fine, ratio=2.0):
    if e_fine <= 0 or e_coarse <= 0:
        return float("nan")
    return float(np.log(e_coarse / e_fine) / np.log(ratio))


def _levels(cfg, refine):
    return [cfgmod.build_scenario(cfg, 2**k) for k in range(max(refine, 1))]


def _suffix(sc, refine):
    return f"[n={sc.grid.nx}]" if refine > 1 else ""


def _add_orders(rep, name, errs, tol, refine):
    """One order check per successive pair of resolutions."""
    for k in range(1, len(errs)):
        o = _order(errs[k - 1], errs[k])
        if np.isfinite(o):
            rep.check_range(f"{name}_order[{k - 1}->{k}]", o, tol["order_min"], tol["order_max"])
        else:
            rep.results.setdefault("notes", []).append(
                f"{name}: error at machine precision, order not measured")


def _companion(sc, cfg, md):
    """A second Dirac solution with the same potential, chosen per family."""
    c = cfg.get("companion", {})
    kind = c.get("kind", "auto")
    g = sc.grid
    if kind == "auto":
        kind = {"sphere_offset": "sphere_degree", "plane": "holomorphic",
                "enneper": "holomorphic", "torus_of_revolution": "torus_floquet"}.get(sc.name,
                                                                                     "rotation")
    if kind == "sphere_degree":
        if sc.name != "sphere_offset":
            raise cfgmod.ConfigValidationError("companion sphere_degree needs sphere_offset")
        psi = scenarios.sphere_companion(g.z, c.get("degree", 2), sc.params.get("radius", 1.0))
        return kind, moutard.matrix_solution(psi)
    if kind == "holomorphic":
        if np.abs(sc.U).max() > 0:
            raise cfgmod.ConfigValidationError("holomorphic companions need U = 0")
        d = c.get("degree", 2)
        z = g.z
        psi = np.stack([z**d, np.conj(z) ** (d - 1)], axis=-1)
        return kind, moutard.matrix_solution(psi)
    if kind == "torus_floquet":
        if sc.name != "torus_of_revolution":
            raise cfgmod.ConfigValidationError("companion torus_floquet needs the torus")
        X, Y = g.xy
        return kind, moutard.matrix_solution(
            scenarios.torus_floquet_companion(X, Y, sc.params["a"]))
    return "rotation", _rotated(cfg, md)


def _companions(sc, cfg, md):
    """The rotated companion, plus the configured/family one when it differs."""
    out = [("rotation", _rotated(cfg, md))]
    kind, Psi = _companion(sc, cfg, md)
    if kind != "rotation":
        out.append((kind, Psi))
    return out


def _rotated(cfg, md):
    c = cfg.get("companion", {})
    q = scenarios.rotation_quaternion(c.get("axis", [1.0, 1.0, 0.0]), c.get("angle", 0.7))
    return matmul(md.psi0, q)


def _companion_checks(rep, tag, sc, md, Psi, rng, samples, tol, scale):
    """Transform the companion two ways, then check the new Dirac residual and gauge shifts."""
    g, h = sc.grid, sc.grid.h
    p0t = md.psi0_tilde
    ckw = {}
    if g.is_closed_cell:
        mu0 = moutard.floquet_multipliers(sc.psi, g, strict=False).multipliers
        mu = moutard.floquet_multipliers(Psi, g, strict=False).multipliers
        ckw = {"quadrature": "spectral",
               "twist": tuple(moutard.omega_twist(a, b) for a, b in zip(mu0, mu))}
    S0p = moutard.s_matrix(md.psi0, Psi, g, sc.base, **ckw)
    Pt = moutard.moutard_transform(Psi, md.psi0, md.S00, g, sc.base, S0psi=S0p)
    Pt21 = moutard.moutard_transform_gauged(Psi, p0t, S0p)
    rep.check_max(f"eq14_vs_eq21{tag}", float(np.abs(Pt - Pt21).max()),
                  tol["algebraic"] * max(1.0, float(np.abs(Pt).max())))
    bound = tol["residual"] * h**2 * max(scale, 1.0)
    cscale = max(float(np.abs(Pt).max()), float(np.abs(Psi).max()))
    cres = float(np.abs(dirac_apply(Pt, md.U_tilde, g)).max())
    rep.check_max(f"prop5_residual{tag}", cres / cscale, bound)
    if samples:
        worst = 0.0
        for _ in range(samples):
            A = quat_field(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
            PA = Pt + matmul(p0t, A)
            worst = max(worst, float(np.abs(dirac_apply(PA, md.U_tilde, g)).max())
                        / max(cscale, float(np.abs(PA).max())))
        rep.check_max(f"prop5_gauge_shifts{tag}", worst, bound)
    return Pt


def _lattice_kwargs(sc):
    """Quadrature options for ``S(Psi0, Psi0)``: spectral with Bloch twists on lattice cells."""
    if not sc.grid.is_closed_cell:
        return {}
    mu = moutard.floquet_multipliers(sc.psi, sc.grid, strict=False).multipliers
    return {"quadrature": "spectral", "twist": tuple(moutard.omega_twist(m, m) for m in mu)}


def _write_fields(out, sc, fields, cfg):
    if not cfg.get("output", {}).get("fields", True):
        return []
    names = []
    for name, val in fields.items():
        dump_field(Path(out) / "fields", name, sc.grid, val)
        names.append(f"fields/{name}.csv")
    return names


def _write_mesh(out, name, r, cfg, normals=None):
    if not cfg.get("output", {}).get("meshes", True):
        return None
    write_obj(Path(out) / f"mesh_{name}.obj", r, normals, name)
    return f"mesh_{name}.obj"


# --- pipelines -------------------------------------------------------------

def run_surface(cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    tol = cfgmod.tolerances(cfg, tolerance_scale)
    rep = Report("surface", cfg)
    errs, rows = [], []
    first = None
    for sc in _levels(cfg, refine):
        g, h, sfx = sc.grid, sc.grid.h, _suffix(sc, refine)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fr = integrate_surface(sc.psi, g, sc.base, sc.x0, U=sc.U)
        first = first or (sc, fr)
        pmax = float(np.abs(sc.psi).max())
        res = float(np.abs(dirac_apply(sc.psi, sc.U, g)).max())
        rep.check_max(f"dirac_residual{sfx}", res, tol["residual"] * h**2 * pmax)
        cd = float(np.nanmax(conformality_defect(fr.r, g)))
        rep.check_max(f"conformality_defect{sfx}", cd, tol["spectral"] + tol["fd"] * h**2)
        try:
            psi_rt, _ = spinor_from_surface(fr, conformal_tol=tol["spectral"] + tol["fd"] * h**2)
        except ConformalityError as exc:
            rep.check_max(f"spinor_round_trip{sfx}", float("inf"), tol["fd"] * h**2, str(exc))
        else:
            rt = min(np.abs(psi_rt - sc.psi).max(), np.abs(psi_rt + sc.psi).max()) / pmax
            rep.check_max(f"spinor_round_trip{sfx}", rt, tol["fd"] * h**2)
        row = {"n": g.nx, "h": h, "dirac_residual": res}
        if sc.r_exact is not None:
            e = float(np.abs(fr.r - sc.r_exact).max())
            rep.check_max(f"r_error{sfx}", e, tol["fd"] * h**2)
            errs.append(e)
            row["r_error"] = e
        rows.append(row)
    _add_orders(rep, "r_error", errs, tol, refine)
    for k in range(1, len(rows)):
        rows[k]["order"] = _order(errs[k - 1], errs[k]) if errs else None
    sc, fr = first
    rep.results["convergence"] = rows
    rep.results["oracle"] = sc.oracle
    rep.results["artifacts"] = _write_fields(out, sc, {"psi": sc.psi, "U": fr.U, "r": fr.r}, cfg)
    mesh = _write_mesh(out, "surface", fr.r, cfg, fr.n)
    if mesh:
        rep.results["artifacts"].append(mesh)
    return rep


def run_invert(cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    tol = cfgmod.tolerances(cfg, tolerance_scale)
    rep = Report("invert", cfg)
    prop1, thm2, first = [], [], None
    for sc in _levels(cfg, refine):
        cfgmod.check_inversion_safe(sc)
        g, h, sfx = sc.grid, sc.grid.h, _suffix(sc, refine)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fr = integrate_surface(sc.psi, g, sc.base, sc.x0, U=sc.U)
        ir = moebius.inversion_report(fr)
        scale = max(float(np.abs(sc.U).max()), float(np.nanmax(np.abs(ir.U_formula))))
        rep.check_max(f"prop1_dual_path{sfx}", ir.max_discrepancy,
                      tol["fd_inversion"] * h**2 * scale)
        prop1.append(ir.max_discrepancy)
        md = moutard.moutard_data(sc.psi, sc.U, g, sc.base, sc.x0, **_lattice_kwargs(sc))
        ref = ir.U_formula if sc.r_exact is None else moebius.inverted_potential(
            replace(fr, r=sc.r_exact))
        d = float(np.nanmax(np.abs(md.U_tilde - ref)))
        rep.check_max(f"thm2_discrepancy{sfx}", d, tol["fd_inversion"] * h**2 * scale)
        thm2.append(d)
        if sc.name == "plane" and "x0" not in cfg:
            X, Y = g.xy
            c = sc.params.get("height", 1.0)
            closed = -c / (X**2 + Y**2 + c**2)
            rep.check_max(f"plane_closed_form{sfx}", float(np.abs(md.U_tilde - closed).max()),
                          tol["fd_inversion"] * h**2 * scale)
        first = first or (sc, fr, ir, md)
    _add_orders(rep, "prop1_dual_path", prop1, tol, refine)
    sc, fr, ir, md = first
    rep.results["excluded_nodes"] = ir.summary()["excluded_nodes"]
    rep.results["U_tilde_range"] = [float(np.nanmin(ir.U_formula)), float(np.nanmax(ir.U_formula))]
    rep.results["prop1_discrepancies"] = prop1
    rep.results["thm2_discrepancies"] = thm2
    rep.results["artifacts"] = _write_fields(out, sc, {
        "U_formula": ir.U_formula, "U_geometric": ir.U_geometric,
        "discrepancy": ir.U_formula - ir.U_geometric, "thm2_discrepancy": md.U_tilde - ir.U_formula,
    }, cfg)
    for name, frame in (("surface", fr), ("inverted", ir.surface_out)):
        mesh = _write_mesh(out, name, frame.r, cfg, frame.n)
        if mesh:
            rep.results["artifacts"].append(mesh)
    return rep


def run_moutard(cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    tol = cfgmod.tolerances(cfg, tolerance_scale)
    rep = Report("moutard", cfg)
    comp = cfg.get("companion", {})
    rng = np.random.default_rng(comp.get("seed", 0))
    samples = comp.get("gauge_samples", 10)
    thm2, thm1, first = [], [], None
    for sc in _levels(cfg, refine):
        cfgmod.check_inversion_safe(sc)
        g, h, sfx = sc.grid, sc.grid.h, _suffix(sc, refine)
        lk = _lattice_kwargs(sc)
        md = moutard.moutard_data(sc.psi, sc.U, g, sc.base, sc.x0, **lk)
        rep.check_max(f"k_shape{sfx}", moutard.shape_defect(md.K), tol["algebraic"])
        rexact = sc.r_exact if sc.r_exact is not None else extract_field(md.S00)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fr = integrate_surface(sc.psi, g, sc.base, sc.x0, U=sc.U)
        Uinv = moebius.inverted_potential(replace(fr, r=rexact))
        scale = max(float(np.abs(sc.U).max()), float(np.abs(Uinv).max()))
        d = float(np.abs(md.U_tilde - Uinv).max())
        rep.check_max(f"thm2_discrepancy{sfx}", d, tol["fd_inversion"] * h**2 * scale)
        thm2.append(d)
        p0t = md.psi0_tilde
        U19 = moebius.inverted_potential_matrix(md.psi0, md.S00, sc.U)
        r1 = float(np.abs(dirac_apply(p0t, U19, g)).max()) / float(np.abs(p0t).max())
        rep.check_max(f"thm1_residual{sfx}", r1, tol["residual"] * h**2 * max(scale, 1.0))
        thm1.append(r1)
        rep.check_max(f"eq19_vs_eq9{sfx}", float(np.abs(U19 - moebius.inverted_potential(fr)).max()),
                      tol["fd_inversion"] * h**2 * scale)
        kinds = []
        for kind, Psi in _companions(sc, cfg, md):
            tag = "" if kind == "rotation" else f"_{kind}"
            _companion_checks(rep, tag + sfx, sc, md, Psi, rng, samples, tol, scale)
            kinds.append(kind)
        first = first or (sc, md, fr, kinds)
    _add_orders(rep, "thm2_discrepancy", thm2, tol, refine)
    _add_orders(rep, "thm1_residual", thm1, tol, refine)
    sc, md, fr, kinds = first
    rep.results["companions"] = kinds
    rep.results["W_stats"] = {"min": float(md.W.min()), "max": float(md.W.max()),
                              "mean": float(md.W.mean())}
    if not sc.grid.is_closed_cell:
        x0 = sc.x0
        rmin = float(np.linalg.norm(extract_field(md.S00), axis=-1).min())
        span = max(rmin - cfgmod.MIN_RADIUS, 0.0)
        rep.results["blowup_probe"] = mnv.blowup_probe(
            sc.psi, sc.U, sc.grid, sc.base, x0, -x0 if np.linalg.norm(x0) > 0 else [0, 0, -1.0],
            [f * span for f in (0.0, 0.5, 0.9, 0.99)])
    rep.results["artifacts"] = _write_fields(out, sc, {"W": md.W, "U_tilde": md.U_tilde,
                                                       "psi0_tilde": md.psi0_tilde[..., 0]}, cfg)
    inv = moebius.invert_surface(fr)
    for name, r in (("surface", extract_field(md.S00)), ("moutard", inv.r)):
        mesh = _write_mesh(out, name, r, cfg)
        if mesh:
            rep.results["artifacts"].append(mesh)
    return rep


def run_floquet(cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    tol = cfgmod.tolerances(cfg, tolerance_scale)
    rep = Report("floquet", cfg)
    sc = cfgmod.build_scenario(cfg, max(refine, 1))
    g = sc.grid
    if not g.is_closed_cell:
        raise cfgmod.ConfigValidationError("floquet needs a doubly periodic (lattice) scenario")
    fl0 = moutard.floquet_multipliers(sc.psi, g, strict=False)
    rep.check_max("input_defect", fl0.defect, tol["floquet"])
    if sc.multipliers is not None:
        dev = max(abs(a - b) for a, b in zip(fl0.multipliers, sc.multipliers))
        rep.check_max("input_multipliers_vs_declared", dev, tol["floquet"])
    lk = _lattice_kwargs(sc)
    md = moutard.moutard_data(sc.psi, sc.U, g, sc.base, sc.x0, **lk)
    p0t = md.psi0_tilde
    fl0t = moutard.floquet_multipliers(p0t, g, strict=False)
    rep.check_max("psi0_tilde_defect", fl0t.defect, tol["floquet"])
    rep.check_max("psi0_tilde_multipliers",
                  max(abs(a - b) for a, b in zip(fl0t.multipliers, fl0.multipliers)), tol["floquet"])
    kind, Psi = _companion(sc, cfg, md)
    flc = moutard.floquet_multipliers(Psi, g, strict=False)
    rep.check_max("companion_defect", flc.defect, tol["floquet"])
    tw = tuple(moutard.omega_twist(a, b) for a, b in zip(fl0.multipliers, flc.multipliers))
    Pt = moutard.moutard_transform(Psi, md.psi0, md.S00, g, sc.base, quadrature="spectral",
                                   twist=tw)
    before = moutard.floquet_defect(Pt, g, flc.multipliers)
    fixed, A, defect = moutard.fix_floquet_representative(Pt, p0t, flc, g)
    rep.check_max("fixed_defect", defect, tol["floquet"])
    flf = moutard.floquet_multipliers(fixed, g, strict=False)
    rep.check_max("fixed_multipliers",
                  max(abs(a - b) for a, b in zip(flf.multipliers, flc.multipliers)), tol["floquet"])
    rng = np.random.default_rng(cfg.get("companion", {}).get("seed", 0))
    growth = min(moutard.floquet_defect(
        fixed + matmul(p0t, quat_field(*(1e-3 * (rng.normal(size=2) + 1j * rng.normal(size=2))))),
        g, flc.multipliers) for _ in range(5))
    rep.check_min("uniqueness_probe_defect", growth, 10.0 * max(defect, tol["floquet"] * 1e-3))
    rep.results.update({
        "companion": kind, "input": fl0.to_dict(), "psi0_tilde": fl0t.to_dict(),
        "companion_multipliers": flc.to_dict(), "fixed": flf.to_dict(),
        "defect_before_fix": before, "A": A,
    })
    rep.results["artifacts"] = _write_fields(out, sc, {"psi_fixed": fixed[..., 0],
                                                       "psi0_tilde": p0t[..., 0]}, cfg)
    return rep


def _mnv_setup(cfg, refine):
    m = cfg.get("mnv", {})
    potential = m.get("potential")
    sc = None
    if potential is None:
        potential = "scenario" if cfg["family"] == "torus_of_revolution" else "cos_x"
    if potential == "scenario":
        sc = cfgmod.build_scenario(cfg, max(refine, 1))
        if not sc.grid.is_closed_cell:
            raise cfgmod.ConfigValidationError(
                "mnv on a scenario needs a doubly periodic (lattice) scenario; use potential cos_x")
        return potential, sc, sc.grid, sc.U
    n = m.get("n", 128) * max(refine, 1)
    g = Grid2D.periodic(2 * np.pi, 2 * np.pi, n)
    X, _ = g.xy
    return potential, None, g, np.cos(X)


def run_mnv_check(cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    tol = cfgmod.tolerances(cfg, tolerance_scale)
    rep = Report("mnv-check", cfg)
    potential, sc, g, U = _mnv_setup(cfg, refine)
    st = mnv.mnv_state(U, g)
    X, Y = g.xy
    rep.check_max("v_constraint", st.constraint_residual(), tol["spectral"])
    if potential == "cos_x":
        rep.check_max("v_oracle", float(np.abs(st.V - 0.5 * np.cos(2 * X)).max()), tol["spectral"])
    else:
        Vsep = np.mean((U * U)[:-1, :-1]) - U * U
        rep.check_max("v_oracle", float(np.abs(st.V - Vsep).max()), tol["spectral"])
    first, second = mnv._rhs_groups(st)
    rep.check_max("rhs_reality", float(np.abs((first + second).imag).max()), tol["spectral"])
    Ut = mnv.mnv_rhs(st, check=False)
    if potential == "cos_x":
        rep.check_max("rhs_oracle",
                      float(np.abs(Ut - (0.25 * np.sin(X) - 1.5 * np.sin(3 * X))).max()),
                      tol["spectral"])
        psi = np.stack([np.exp(1j * (X + 2 * Y)) + 0.3 * np.cos(Y),
                        np.exp(-1j * (2 * X - Y)) + 0.2 * np.sin(X + Y)], axis=-1)
        twist = (1.0, 1.0)
    else:
        mu = moutard.floquet_multipliers(sc.psi, g, strict=False).multipliers
        psi = moutard.matrix_solution(sc.psi)
        twist = tuple(mnv.matrix_twist(m) for m in mu)
    pert = cfg.get("mnv", {}).get("perturbation", 0.1)
    res = mnv.manakov_residual(st, psi, Ut, twist)
    res_p = mnv.manakov_residual(st, psi, Ut + pert, twist)
    rep.check_max("manakov_residual", res, tol["manakov"])
    rep.check_min("manakov_sensitivity_ratio", res_p / max(res, 1e-300), 10.0)
    lg = float(np.abs(mnv.dirac_spectral(psi, U, g, twist)
                      - mnv.dirac_via_l_gamma(psi, U, g, twist)).max())
    rep.check_max("dirac_equals_l_gamma", lg, tol["exact"])
    Pm = psi if psi.ndim == 4 else moutard.matrix_solution(psi)
    tw_m = twist if psi.ndim == 4 else (1.0, 1.0)
    wy = mnv.omega_hat_dt(Pm, Pm, st, tw_m, tw_m, "y")
    wz = mnv.omega_hat_dt(Pm, Pm, st, tw_m, tw_m, "z")
    rep.check_max("omega_hat_displays_agree",
                  float(np.abs(wy - wz).max()) / max(1.0, float(np.abs(wy).max())), tol["spectral"])
    if sc is not None:
        md = moutard.moutard_data(sc.psi, sc.U, g, sc.base, sc.x0, **_lattice_kwargs(sc))
        ex = mnv.extended_moutard(st, md.psi0, md.S00, twist)
        rep.check_max("k_shape", moutard.shape_defect(ex.K), tol["algebraic"])
        rep.check_max("m_shape", mnv.m_shape_defect(ex.M), 100 * tol["algebraic"])
        rep.check_max("v_tilde_constraint", ex.constraint_residual(g), tol["constraint"])
        rep.results["V_tilde_max"] = float(np.abs(ex.V_tilde).max())
    rep.results["potential"] = potential
    rep.results["grid"] = g.to_dict()
    rep.results["artifacts"] = []
    if cfg.get("output", {}).get("fields", True):
        for name, val in (("U", U), ("V", st.V), ("U_t", Ut)):
            dump_field(Path(out) / "fields", name, g, val)
            rep.results["artifacts"].append(f"fields/{name}.csv")
    return rep


def run_mnv_evolve(cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    tol = cfgmod.tolerances(cfg, tolerance_scale)
    rep = Report("mnv-evolve", cfg)
    m = cfg.get("mnv", {})
    potential, sc, g, U = _mnv_setup(cfg, refine)
    st = mnv.mnv_state(U, g)
    dt = m.get("dt_factor", 1.0) * mnv.max_stable_dt(g)
    steps, every = m.get("steps", 10), m.get("every", 5)
    fields_on = cfg.get("output", {}).get("fields", True)
    constraint, snaps = [], []

    def snap(k, s):
        constraint.append(s.constraint_residual())
        if fields_on and every and k % every == 0:
            dump_field(Path(out) / "fields", f"U_step{k:06d}", g, s.U, {"t": s.t})
            snaps.append(f"fields/U_step{k:06d}.csv")

    s = st
    try:
        for k in range(1, steps + 1):
            s = mnv.mnv_step(s, dt)
            snap(k, s)
    except mnv.InstabilityError as exc:
        rep.results["abort"] = str(exc)
        rep.check_max("stable", 1.0, 0.0, note=str(exc))
    rep.check_max("constraint_each_step", max(constraint, default=0.0), tol["spectral"])
    back = mnv.mnv_step(mnv.mnv_step(st, dt), -dt)
    rep.check_max("time_reversal", float(np.abs(back.U - st.U).max()), tol["spectral"])
    rep.results.update({"potential": potential, "dt": dt, "steps": steps, "t_final": s.t,
                        "c_stab": mnv.C_STAB, "sup_U_final": float(np.abs(s.U).max()),
                        "artifacts": snaps})
    return rep


PIPELINES = {"surface": run_surface, "invert": run_invert, "moutard": run_moutard,
             "floquet": run_floquet, "mnv-check": run_mnv_check, "mnv-evolve": run_mnv_evolve}


def run_scenario(command, cfg, out, refine=1, tolerance_scale=1.0) -> Report:
    """Run one pipeline on a validated config and write its report."""
    rep = PIPELINES[command](cfg, out, refine, tolerance_scale)
    rep.write(out)
    return rep


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dirac-moutard", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        need = name != "list-scenarios"
        sp.add_argument("--scenario", required=need, help="scenario config (JSON)")
        sp.add_argument("--refine", type=int, default=1,
                        help="number of resolutions (each doubling the grid)")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply every threshold")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        listing = scenarios.builtin_scenarios()
        print(json.dumps(listing, indent=2, sort_keys=True))
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "scenarios.json").write_text(json.dumps(listing, indent=2,
                                                                      sort_keys=True) + "\n")
        return EXIT_OK
    if args.refine < 1 or not args.tolerance_scale > 0:
        print("error: --refine must be >= 1 and --tolerance-scale > 0", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = cfgmod.load_config(args.scenario)
        out = args.out or cfg.get("output", {}).get("dir") or "dirac_moutard_out"
        rep = run_scenario(args.command, cfg, out, args.refine, args.tolerance_scale)
    except cfgmod.ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (cfgmod.ConfigValidationError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SingularMatrixError, moebius.SingularityError, ZeroDivisionError) as exc:
        print(f"error: singular configuration: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    failed = [c.name for c in rep.checks if not c.passed]
    print(f"{args.command}: {len(rep.checks) - len(failed)}/{len(rep.checks)} checks passed"
          + (f"; failed: {', '.join(failed)}" if failed else "") + f" -> {Path(out) / 'report.json'}")
    return EXIT_OK if not failed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
