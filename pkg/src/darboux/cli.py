"""Scenario-driven command line front end.

    darboux <command> <scenario.json> [--out DIR] [--tol FLOAT] [--grid-steps INT]

Commands: validate, propagate, transform, weyl, dynamic, indef-model.  Every
command writes ``report.json`` (the invariants checked, their residuals and
pass/fail) next to its CSV output.

Exit codes: 0 ok, 1 schema/usage error, 2 triple identity violated,
3 singular S where the command needs an invertible one, 4 a residual
exceeded its tolerance.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import gbdt, model_indef, weyl
from . import dynamics as dyn
from .errors import (DarbouxError, DialectError, DimensionError, SingularMatrixError,
                     TripleIdentityError, UsageError)
from .matcore import J_STANDARD, adjoint, is_nonneg_definite, min_eig, norm, symplectic_J
from .systems import (HamiltonianSystem, ShinZettlSystem, SturmLiouvilleSystem,
                      hamiltonian_form, matrix_from_json, system_from_dict)
from ._ode import make_grid

MODEL_FD_STEP = 1e-3
MODEL_FD_MIN_X = 0.1
# FD-based checks skip stencils whose S condition number exceeds this
FD_COND_LIMIT = 1e6

EXIT_OK, EXIT_SCHEMA, EXIT_TRIPLE, EXIT_SINGULAR, EXIT_RESIDUAL = 0, 1, 2, 3, 4
COMMANDS = ("validate", "propagate", "transform", "weyl", "dynamic", "indef-model")

DEFAULT_TOLS = {
    "triple_identity": 1e-10,
    "identity_drift": 1e-7,
    "s_hermitian": 1e-9,
    "s_monotone": 1e-9,
    "intertwining": 1e-3,
    "h0_hermitian": 1e-9,
    "lagrange_closure": 1e-9,
    "q_breve_real": 1e-9,
    "j_form_identity": 1e-9,
    "j_form_monotone": 1e-9,
    "weyl_transformed_disk": 1e-7,
    "dynamic_pde": 1e-3,
    "energy_vs_quadrature": 1e-5,
    "energy_radicand": 1e-9,
    "model_x12_real": 1e-9,
    "model_pi0_identity": 1e-12,
    "model_closed_vs_propagated": 1e-6,
    "model_s_positive": 0.0,
    "model_sl_residual": 1e-3,
}

_CMATRIX = {
    "oneOf": [
        {"type": "object", "required": ["re"],
         "properties": {"re": {"type": "array"}, "im": {"type": "array"}}},
        {"type": "array"},
        {"type": "number"},
    ]
}
_CSCALAR = {"oneOf": [{"type": "number"},
                      {"type": "array", "items": {"type": "number"}, "minItems": 1,
                       "maxItems": 2}]}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name"],
    "properties": {
        "name": {"type": "string"},
        "commands": {"type": "array", "items": {"enum": list(COMMANDS)}},
        "system": {
            "type": "object",
            "required": ["dialect"],
            "properties": {
                "dialect": {"enum": ["General", "Hamiltonian", "ShinZettl", "SturmLiouville"]},
                "interval": {"type": "array", "items": {"type": "number"},
                             "minItems": 2, "maxItems": 2},
            },
        },
        "triple": {
            "type": "object",
            "required": ["mode"],
            "oneOf": [
                {"properties": {"mode": {"const": "general"}},
                 "required": ["A1", "A2", "S0", "Pi1_0", "Pi2_0"]},
                {"properties": {"mode": {"const": "symmetric"}},
                 "required": ["A", "S0", "Pi0"]},
            ],
            "properties": {k: _CMATRIX for k in ("A1", "A2", "S0", "Pi1_0", "Pi2_0", "A", "Pi0")},
        },
        "grid": {
            "type": "object",
            "required": ["x_min", "x_max", "steps"],
            "properties": {"x_min": {"type": "number"}, "x_max": {"type": "number"},
                           "steps": {"type": "integer", "minimum": 1}},
        },
        "lambdas": {"type": "array", "items": _CSCALAR},
        "times": {"type": "array", "items": {"type": "number"}},
        "weyl": {
            "type": "object",
            "required": ["ell"],
            "properties": {"E": _CMATRIX, "ell": {"type": "number", "exclusiveMinimum": 0},
                           "M": {"type": "array", "items": _CMATRIX}},
        },
        "dynamics": {
            "type": "object",
            "required": ["h", "a"],
            "properties": {"h": _CMATRIX, "a": {"type": "number", "exclusiveMinimum": 0},
                           "dt": {"type": "number", "exclusiveMinimum": 0}},
        },
        "model": {
            "type": "object",
            "required": ["alpha", "mu", "g"],
            "properties": {"alpha": _CMATRIX, "mu": _CSCALAR, "g": _CMATRIX,
                           "h": {"type": "number", "exclusiveMinimum": 0},
                           "N": {"type": "integer", "minimum": 1},
                           "y0": {"type": "array", "items": _CSCALAR,
                                  "minItems": 2, "maxItems": 2}},
        },
    },
}


def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1] if len(v) > 1 else 0.0)
    return complex(v)


def _fmt(v) -> str:
    if v is None:
        return "NA"
    v = float(v)
    if not math.isfinite(v):
        return "NA"
    return format(v, ".17g")


def _json_num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


class Report:
    def __init__(self, scenario: str, command: str, tol_override=None):
        self.scenario, self.command = scenario, command
        self.tol_override = tol_override
        self.checks = []
        self.info = {}
        self.error = None

    def tol(self, name):
        return DEFAULT_TOLS[name] if self.tol_override is None else self.tol_override

    def check(self, name, residual, passed=None, tolerance=None, note=""):
        tol = self.tol(name) if tolerance is None else tolerance
        residual = float(residual)
        if passed is None:
            passed = bool(math.isfinite(residual) and residual <= tol)
        entry = {"name": name, "residual": _json_num(residual), "tolerance": tol,
                 "passed": bool(passed)}
        if note:
            entry["note"] = note
        self.checks.append(entry)
        return passed

    @property
    def all_passed(self):
        return all(c["passed"] for c in self.checks)

    def write(self, out_dir: Path, exit_code: int):
        doc = {"scenario": self.scenario, "command": self.command, "version": __version__,
               "exit_code": exit_code, "checks": self.checks, "info": self.info}
        if self.error:
            doc["error"] = self.error
        (out_dir / "report.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


def _cells(prefix, m, valid=True):
    """Header names and values for the re/im parts of a matrix."""
    m = np.atleast_2d(m)
    names, vals = [], []
    for (i, j), v in np.ndenumerate(m):
        names += [f"{prefix}{i + 1}{j + 1}_re", f"{prefix}{i + 1}{j + 1}_im"]
        vals += [v.real, v.imag] if valid else [None, None]
    return names, vals


# ---------------------------------------------------------------------------
# scenario loading
# ---------------------------------------------------------------------------

def load_scenario(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    jsonschema.validate(doc, SCENARIO_SCHEMA)
    return doc


def _system(doc):
    if "system" not in doc:
        raise UsageError("scenario has no system block")
    return system_from_dict(doc["system"])


def _triple(doc, sys):
    if "triple" not in doc:
        raise UsageError("scenario has no triple block")
    d = doc["triple"]
    if d["mode"] == "symmetric":
        ham = hamiltonian_form(sys)
        return gbdt.GBDTTriple.symmetric(matrix_from_json(d["A"]), matrix_from_json(d["S0"]),
                                         matrix_from_json(d["Pi0"]), ham.J)
    return gbdt.GBDTTriple.general(*(matrix_from_json(d[k])
                                     for k in ("A1", "A2", "S0", "Pi1_0", "Pi2_0")))


def _grid(doc, sys, steps_override):
    g = dict(doc.get("grid") or {"x_min": sys.interval[0], "x_max": sys.interval[1],
                                  "steps": 1000})
    if steps_override:
        g["steps"] = steps_override
    return make_grid(g["x_min"], g["x_max"], g["steps"])


def _lambdas(doc):
    return [_cplx(v) for v in doc.get("lambdas", [[0.0, 1.0]])]


def _validated_triple(doc, sys, rep):
    t = _triple(doc, sys)
    r = gbdt.validate_triple(t, tol=rep.tol("triple_identity"))
    ok = rep.check("triple_identity", r.relative, passed=r.relative <= rep.tol("triple_identity"),
                   note="A1 S0 - S0 A2 = Pi1_0 Pi2_0*; residual is relative")
    rep.info["triple_identity_absolute"] = _json_num(r.residual)
    if t.mode == "symmetric":
        ok &= rep.check("s0_hermitian", r.hermitian_residual / (1 + norm(t.S0)),
                        tolerance=rep.tol("triple_identity"))
    if not ok:
        raise TripleIdentityError(r.message or "triple identity violated", r.residual)
    return t


def _propagated(doc, sys, rep, steps):
    t = _validated_triple(doc, sys, rep)
    x = _grid(doc, sys, steps)
    path = gbdt.propagate(t, sys, x, check=False)
    rep.check("identity_drift", float(np.max(path.identity_residual)))
    if path.hermitian_residual is not None:
        rep.check("s_hermitian", float(np.max(path.hermitian_residual)))
    rep.info["nodes"] = len(path)
    rep.info["singular_nodes"] = int(np.sum(~path.invertible))
    if (t.mode == "symmetric" and isinstance(sys, HamiltonianSystem) and sys.h1_nonneg
            and is_nonneg_definite(t.S0) and min_eig(t.S0) > 0):
        s0 = min_eig(t.S0)
        worst = max(s0 - min_eig(path.S[i]) for i in np.flatnonzero(path.x >= 0))
        rep.check("s_monotone", max(worst, 0.0))
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(doc, out, rep, args):
    sys_ = _system(doc)
    _validated_triple(doc, sys_, rep)


def cmd_propagate(doc, out, rep, args):
    sys_ = _system(doc)
    path = _propagated(doc, sys_, rep, args.grid_steps)
    n, m = path.triple.n, path.triple.m
    header = ["x", "identity_residual", "s_cond", "s_invertible"]
    header += _cells("S", np.zeros((n, n)))[0] + _cells("Pi1_", np.zeros((n, m)))[0]
    header += _cells("Pi2_", np.zeros((n, m)))[0] + _cells("X", np.zeros((m, m)))[0]
    rows = []
    for i in range(len(path)):
        inv = bool(path.invertible[i])
        row = [path.x[i], path.identity_residual[i], path.s_cond[i], "1" if inv else "0"]
        row += _cells("S", path.S[i])[1] + _cells("P", path.Pi1[i])[1]
        row += _cells("P", path.Pi2[i])[1] + _cells("X", path.X[i], inv)[1]
        rows.append(row)
    _write_csv(out / "path.csv", header, rows)


def _interior_sample(path, count=9):
    cand = [i for i in range(1, len(path) - 1)
            if path.invertible[i - 1:i + 2].all()
            and (path.s_cond[i - 1:i + 2] <= FD_COND_LIMIT).all()
            and all(float(path.x[k]) not in path.system.exceptional() for k in (i - 1, i, i + 1))]
    if not cand:
        return []
    pick = np.unique(np.linspace(0, len(cand) - 1, min(count, len(cand))).round().astype(int))
    return [cand[k] for k in pick]


def cmd_transform(doc, out, rep, args):
    sys_ = _system(doc)
    path = _propagated(doc, sys_, rep, args.grid_steps)
    tr = gbdt.transform_coefficients(sys_, path)
    worst = 0.0
    for lam in _lambdas(doc):
        for i in _interior_sample(path):
            worst = max(worst, gbdt.intertwining_residual(path, lam, i))
    rep.check("intertwining", worst, note="central-difference residual of w' = F~ w - w F")
    keys = {"General": ["Q0"], "Hamiltonian": ["H0"],
            "ShinZettl": ["r1", "r2", "q"], "SturmLiouville": ["r1", "r2", "q", "q_breve"]}[
        sys_.dialect]
    if sys_.dialect == "Hamiltonian":
        h = tr.hermitian_residual[tr.valid]
        rep.check("h0_hermitian", float(np.max(h)) if h.size else 0.0)
    if isinstance(sys_, (ShinZettlSystem, SturmLiouvilleSystem)):
        base = sys_.first_order if isinstance(sys_, SturmLiouvilleSystem) else sys_
        if base.lagrange_symmetric and path.mode == "symmetric":
            rep.check("lagrange_closure", 0.0, passed=tr.lagrange_symmetric(
                rep.tol("lagrange_closure")))
        if base.lagrange_j_symmetric:
            rep.check("lagrange_j_closure", 0.0, passed=tr.lagrange_j_symmetric(),
                      tolerance=rep.tol("lagrange_closure"))
    if "q_breve" in tr.fields:
        qb = tr.fields["q_breve"][tr.valid]
        rep.check("q_breve_real", float(np.max(np.abs(qb.imag))) if qb.size else 0.0)
    header = ["x", "valid"]
    for k in keys:
        f = tr.fields[k]
        if f.ndim == 3:
            header += _cells(k + "_", f[0])[0]
        else:
            header += [f"{k}_re", f"{k}_im"]
    rows = []
    for i in range(len(path)):
        ok = bool(tr.valid[i])
        row = [path.x[i], "1" if ok else "0"]
        for k in keys:
            f = tr.fields[k]
            if f.ndim == 3:
                row += _cells(k, f[i], ok)[1]
            else:
                row += [f[i].real, f[i].imag] if ok else [None, None]
        rows.append(row)
    _write_csv(out / "transformed.csv", header, rows)


def cmd_weyl(doc, out, rep, args):
    sys_ = _system(doc)
    ham = hamiltonian_form(sys_)
    if "weyl" not in doc:
        raise UsageError("scenario has no weyl block")
    wd = doc["weyl"]
    ell = float(wd["ell"])
    m = ham.m
    r = m // 2
    if m % 2 or not np.allclose(ham.J, symplectic_J(r)):
        raise DialectError("Weyl disks need J = [[0, I], [-I, 0]]")
    E = weyl.check_normalization(matrix_from_json(wd["E"]), ham.J) if "E" in wd else np.eye(m)
    t = _validated_triple(doc, sys_, rep)
    if t.mode != "symmetric" or min_eig(t.S0) <= 0:
        raise UsageError("Weyl transforms need a symmetric triple with S0 > 0")
    steps = args.grid_steps or (doc.get("grid") or {}).get("steps", 1000)
    x = make_grid(0.0, ell, steps)
    path = gbdt.propagate(t, sys_, x, check=False)
    rep.check("identity_drift", float(np.max(path.identity_residual)))
    if not path.invertible.all():
        raise SingularMatrixError("S(x) is singular on [0, l']")
    Ms = [matrix_from_json(M) for M in wd.get("M", [])]
    rows, urows = [], []
    worst_j, worst_mono, worst_disk = 0.0, 0.0, 0.0
    i0, il = 0, len(path) - 1
    for lam in _lambdas(doc):
        if lam.imag <= 0:
            raise UsageError("Weyl disks are computed for Im(lambda) > 0 only")
        for i in (i0, len(path) // 2, il):
            node = path.node(i)
            worst_j = max(worst_j, weyl.j_form_identity_residual(node, lam))
            w = gbdt.darboux_matrix(node, lam)
            gap = 1j * (ham.J - adjoint(w) @ ham.J @ w)
            worst_mono = max(worst_mono, -min_eig(gap))
        Y = weyl.fundamental_solution(ham, lam, ell, E, grid=x)
        Yt = weyl.transformed_fundamental(path, Y)
        U = weyl.moebius_blocks(path.node(i0), lam, E)
        urows.append([lam.real, lam.imag] + _cells("U", U.U)[1])
        for k, M in enumerate(Ms):
            form = weyl.weyl_disk_form(Y.Y[-1], ham.J, M)
            fmax, member = weyl.disk_membership(form)
            den = U.U11 + U.U12 @ M
            try:
                Mt = weyl.moebius_map(U, M)
            except SingularMatrixError:
                rows.append([lam.real, lam.imag, str(k), fmax, "1" if member else "0",
                             abs(np.linalg.det(den))] + _cells("Mt", np.zeros((r, r)), False)[1]
                            + [None, "NA"])
                continue
            tform = weyl.weyl_disk_form(Yt.Y[-1], ham.J, Mt)
            tmax, tmember = weyl.disk_membership(tform, rep.tol("weyl_transformed_disk"))
            if member:
                worst_disk = max(worst_disk, tmax / (1.0 + norm(tform)))
            rows.append([lam.real, lam.imag, str(k), fmax, "1" if member else "0",
                         abs(np.linalg.det(den))] + _cells("Mt", Mt)[1]
                        + [tmax, "1" if tmember else "0"])
    rep.check("j_form_identity", worst_j)
    rep.check("j_form_monotone", max(worst_mono, 0.0))
    if Ms:
        rep.check("weyl_transformed_disk", max(worst_disk, 0.0),
                  note="max eigenvalue of the transformed disk form for in-disk candidates")
    header = ["lambda_re", "lambda_im", "candidate", "form_max_eig", "member", "abs_det_den"]
    header += _cells("Mt", np.zeros((r, r)))[0] + ["transformed_form_max_eig",
                                                  "transformed_member"]
    _write_csv(out / "weyl.csv", header, rows)
    _write_csv(out / "moebius_blocks.csv",
               ["lambda_re", "lambda_im"] + _cells("U", np.zeros((m, m)))[0], urows)


def cmd_dynamic(doc, out, rep, args):
    sys_ = _system(doc)
    if "dynamics" not in doc:
        raise UsageError("scenario has no dynamics block")
    dd = doc["dynamics"]
    path = _propagated(doc, sys_, rep, args.grid_steps)
    if path.mode != "symmetric":
        raise UsageError("dynamic needs a symmetric triple")
    h = matrix_from_json(dd["h"]).reshape(-1)
    a = float(dd["a"])
    times = [float(t) for t in doc.get("times", [0.0, 0.5, 1.0])]
    dx = float(np.min(np.diff(path.x)))
    dt = float(dd.get("dt", dx))
    sol = dyn.dynamical_solution(path, h, times)
    res, mask = dyn.dynamical_residual(sol, dt=dt)
    good = path.s_cond <= FD_COND_LIMIT
    good = good & np.roll(good, 1) & np.roll(good, -1)
    mask = mask & good[:, None]
    rep.check("dynamic_pde", float(np.nanmax(np.where(mask, res, np.nan))) if mask.any() else 0.0,
              note="relative central-difference residual of the transformed dynamical system")
    ham = hamiltonian_form(sys_)
    m = path.triple.m
    header = ["x", "t"] + [f"z{j + 1}_{p}" for j in range(m) for p in ("re", "im")] + ["residual"]
    rows = []
    for i in range(len(path)):
        for k, tk in enumerate(times):
            ok = bool(sol.valid[i])
            vals = [v for j in range(m) for v in (sol.z[i, k, j].real, sol.z[i, k, j].imag)] \
                if ok else [None] * (2 * m)
            rows.append([path.x[i], tk] + vals + [res[i, k] if mask[i, k] else None])
    _write_csv(out / "dynamic.csv", header, rows)
    if ham.h1_nonneg and min_eig(path.triple.S0) > 0:
        erows, worst, worst_rad = [], 0.0, 0.0
        for tk in times:
            rad = dyn._radicand(path, h, tk, a)
            worst_rad = max(worst_rad, -rad)
            ef = dyn.energy_formula(path, h, tk, a)
            eq = dyn.energy_quadrature(path, h, tk, a)
            rel = abs(ef - eq) / max(abs(eq), 1e-300)
            worst = max(worst, rel)
            erows.append([tk, ef, eq, rel])
        rep.check("energy_radicand", max(worst_rad, 0.0))
        rep.check("energy_vs_quadrature", worst)
        _write_csv(out / "energy.csv", ["t", "energy_formula", "energy_quadrature", "rel_diff"],
                   erows)
    else:
        rep.info["energy"] = "skipped: needs H1 >= 0 and S0 > 0"


def _model_params(doc):
    md = doc["model"]
    g = matrix_from_json(md["g"]).reshape(-1)
    return model_indef.IndefModelParams(matrix_from_json(md["alpha"]), _cplx(md["mu"]), g)


def cmd_indef_model(doc, out, rep, args):
    if "model" not in doc:
        raise UsageError("scenario has no model block")
    md = doc["model"]
    params = _model_params(doc)
    h = float(md.get("h", 0.01))
    N = int(args.grid_steps or md.get("N", 100))
    ks = np.arange(1, N + 1)
    x = np.concatenate([-(ks[::-1] * h), ks * h])
    tr = model_indef.transformed_indefinite(params, x)
    controllable = model_indef.controllability_check(params)
    rep.info["controllable"] = controllable
    rep.info["singular_nodes"] = int(np.sum(~tr.valid))
    Pi0 = params.Pi0
    rep.check("model_pi0_identity", norm(Pi0 @ J_STANDARD @ adjoint(Pi0)))
    ok = tr.valid
    rep.check("q_breve_real", float(np.max(np.abs(tr.q_breve[ok].imag))) if ok.any() else 0.0)
    rep.check("model_x12_real", float(np.max(np.abs(tr.X[ok, 0, 1].imag) /
                                             (1 + np.abs(tr.X[ok, 0, 1])))) if ok.any() else 0.0)
    if controllable:
        far = np.abs(x) >= 0.01
        worst = float(np.min(tr.min_eig_S[far])) if far.any() else 1.0
        rep.check("model_s_positive", -worst, passed=worst > 0,
                  note="negated min eigenvalue of S(x) for |x| >= 0.01")
    # closed form against ODE propagation
    path = gbdt.propagate(params.triple(), model_indef.model_system((x[0], x[-1])),
                          make_grid(x[0], x[-1], 2 * N * 4), check=False)
    rep.check("identity_drift", float(np.max(path.identity_residual)))
    worst = 0.0
    for i, xi in enumerate(x):
        j = path.index_of(xi, tol=1e-9)
        worst = max(worst, norm(path.Pi[j] - tr.Pi[i]), norm(path.S[j] - tr.S[i]))
    rep.check("model_closed_vs_propagated", worst)
    # transformed indefinite equation -y'' + q_breve y = lam sign(x) y, checked off
    # the origin with a local second-order stencil of width MODEL_FD_STEP
    y0 = [_cplx(v) for v in md.get("y0", [1.0, 0.0])]
    far = x[np.abs(x) >= MODEL_FD_MIN_X]
    d = MODEL_FD_STEP
    worst = 0.0
    if far.size:
        loc = model_indef.transformed_indefinite(params, np.concatenate([far - d, far, far + d]))
        k = far.size
        for lam in _lambdas(doc):
            yt = loc.y_tilde(lam, y0)[:, 0]
            ym, yc, yp = yt[:k], yt[k:2 * k], yt[2 * k:]
            d2 = (yp - 2 * yc + ym) / d**2
            pot = loc.q_breve[k:2 * k] * yc
            rhs = lam * np.sign(far) * yc
            r = np.abs(-d2 + pot - rhs) / (1 + np.maximum(np.abs(d2),
                                                          np.maximum(np.abs(pot), np.abs(rhs))))
            worst = max(worst, float(np.nanmax(r)))
    rep.check("model_sl_residual", worst)
    header = ["x", "r_tilde_re", "r_tilde_im", "q_tilde_re", "q_tilde_im", "q_breve_re",
              "q_breve_im", "det_S_re", "det_S_im", "min_eig_S"]
    rows = []
    det = tr.det_S
    me = tr.min_eig_S
    for i in range(len(x)):
        v = bool(ok[i])
        row = [x[i]]
        for arr in (tr.r_tilde, tr.q_tilde, tr.q_breve):
            row += [arr[i].real, arr[i].imag] if v else [None, None]
        row += [det[i].real, det[i].imag, me[i]]
        rows.append(row)
    _write_csv(out / "model.csv", header, rows)
    _write_csv(out / "near_origin.csv", ["x", "x2_abs_q_breve"],
               [list(r) for r in model_indef.near_origin_report(params)])


HANDLERS = {
    "validate": cmd_validate,
    "propagate": cmd_propagate,
    "transform": cmd_transform,
    "weyl": cmd_weyl,
    "dynamic": cmd_dynamic,
    "indef-model": cmd_indef_model,
}


def run(command: str, scenario_path, out_dir, tol=None, grid_steps=None) -> int:
    """Run one command; write outputs and ``report.json`` to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    args = argparse.Namespace(tol=tol, grid_steps=grid_steps)
    rep = Report(str(scenario_path), command, tol)
    try:
        doc = load_scenario(scenario_path)
        rep.scenario = doc["name"]
        HANDLERS[command](doc, out, rep, args)
        code = EXIT_OK if rep.all_passed else EXIT_RESIDUAL
    except (jsonschema.ValidationError, json.JSONDecodeError, KeyError, OSError) as exc:
        rep.error = f"schema: {exc.__class__.__name__}: {getattr(exc, 'message', exc)}"
        code = EXIT_SCHEMA
    except TripleIdentityError as exc:
        rep.error = str(exc)
        code = EXIT_TRIPLE
    except SingularMatrixError as exc:
        rep.error = str(exc)
        code = EXIT_SINGULAR
    except (UsageError, DialectError, DimensionError) as exc:
        rep.error = f"{exc.__class__.__name__}: {exc}"
        code = EXIT_SCHEMA
    except DarbouxError as exc:
        rep.error = f"{exc.__class__.__name__}: {exc}"
        code = EXIT_RESIDUAL
    rep.write(out, code)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="darboux", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scenario", type=Path, help="scenario JSON file")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--tol", type=float, default=None,
                   help="override every residual tolerance in the report")
    p.add_argument("--grid-steps", type=int, default=None, help="override grid.steps")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = run(args.command, args.scenario, args.out, args.tol, args.grid_steps)
    report = json.loads((args.out / "report.json").read_text(encoding="utf-8"))
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}  residual={c['residual']}")
    if "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
