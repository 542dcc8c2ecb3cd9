"""
Scenario runner: the library's verification suites as shell commands.

Each command loads a JSON config (defaults built in), runs its checks,
and writes into the output directory:
  report.json   {"checks": [{name, value, tolerance, pass}], ...}
  *.csv         plot-ready data series (header row, '.' decimal)
  *.png         rendered figures for the same series
Reports embed the convention sheet (FFT kernel signs, metric signature,
Theta(0), spinor branch ordering) so numbers are self-describing, and
runs are deterministic: same config + seed => byte-identical reports.

Exit codes: 0 all checks pass, 1 some check failed, 2 invalid config.
"""

import argparse
import copy
import json
import os
import sys
import tempfile

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .grids import AxisGrid, Grid3D, Grid4D
from .minkowski import METRIC, LorentzTransform
from .states import EventState, random_band_limited
from .poincare import (PoincareElement, commutator_check,
                       generator_exponential_check,
                       scalar_product_invariance)
from .constraints import (build_onshell_kg, build_onshell_dirac, kg_residual,
                          kg_symbol, dirac_matrix, dirac_eigensystem,
                          dirac_residual, onshell_boost, slice_state,
                          OnShellState, KG_PLUS, KG_MINUS)
from .correspondence import (QMTrajectory, lift_trajectory, slice_at_time,
                             schrodinger_evolve, dirac_evolve,
                             two_path_boost_check,
                             current_conservation_residual)
from .multievent import (ModeSet, FockState, NBodyConstraint, NEventState,
                         AnnihilatedStateError, kernel_intersection_check,
                         lift_product_form, symmetrize, nbody_apply,
                         fock_constraint_apply, SYM_S, SYM_A)
from .multievent import _projector_apply

CONVENTIONS = {
    "metric_signature": "(+,-,-,-)",
    "fft_time_kernel": "exp(+i E t)/sqrt(2 pi)",
    "fft_space_kernel": "exp(-i p x)/sqrt(2 pi)",
    "theta_at_zero": 1.0,
    "spinor_branch_order": ["-E h=+", "+E h=+", "-E h=-", "+E h=-"],
    "mode_ordering": "row-major over the momentum grid, FFT sample order",
    "fermionic_sign": "(-1)^(occupied modes preceding the acted-on mode)",
}

DEFAULTS = {
    "algebra-check": {
        "n": 28, "delta": 0.62, "sigma": 1.3,
        "carrier": [0.25, 0.2, -0.15, 0.1],
        "tolerance": 1e-6,
    },
    "uncertainty": {
        "n": 24, "delta": 0.7,
        "sigma_sweep": [0.8, 1.0, 1.3, 1.6],
        "random_states": 40, "random_n": 12, "random_delta": 0.9,
        "gaussian_tolerance": 1e-4, "bound_slack": 1e-6,
    },
    "boost-demo": {
        "n": 24, "delta": 0.62, "sigma": 1.35,
        "velocity": 0.5, "rotation_angle": 0.7,
        "translation": [0.4, -0.3, 0.25, 0.0],
        "compose_velocities": [0.2, 0.25],
        "invariance_tolerance": 1e-6,
        "covariance_tolerance": 1e-5,
        "composition_tolerance": 2e-6,
    },
    "constraint-residual": {
        "n": 24, "delta": 0.6, "mass": 1.0, "sigma_p": 0.5,
        "random_momenta": 50,
        "onshell_tolerance": 1e-6,
        "eigen_tolerance": 1e-10,
        "unitarity_tolerance": 1e-12,
        "current_tolerance": 1e-6,
    },
    "correspondence": {
        "n": 32, "delta": 0.5, "mass": 1.0, "sigma": 1.6,
        "times": [0.0, 0.5, 1.0],
        "velocity": 0.4,
        "boost_n": 48, "boost_delta": 0.5, "boost_nt": 64,
        "boost_dt": 0.5, "boost_sigma": 1.4,
        "window_flat": 4.8, "window_taper": 0.9,
        "oracle_tolerance": 1e-10,
        "norm_tolerance": 1e-10,
        "two_path_tolerance": 1e-4,
        "leakage_tolerance": 1e-8,
    },
    "multievent": {
        "toy_symbol": [0.0, 0.7, 1.3],
        "events": 3,
        "projector_tolerance": 1e-12,
        "fock_modes": [0.0, 0.3, 0.0, 1.2],
    },
}

_COMMON_KEYS = {"seed", "tolerance_scale"}


class ConfigError(Exception):
    pass


def _validate(command, cfg):
    """Schema check: known keys, matching types, positive tolerances."""
    base = DEFAULTS[command]
    problems = []
    for key, val in cfg.items():
        if key in _COMMON_KEYS:
            if not isinstance(val, (int, float)) or val < 0:
                problems.append(f"{key}: must be a nonnegative number")
            continue
        if key not in base:
            problems.append(f"unknown key {key!r} for {command}")
            continue
        ref = base[key]
        if isinstance(ref, (int, float)) and not isinstance(val, (int, float)):
            problems.append(f"{key}: expected a number")
        if isinstance(ref, list) and not isinstance(val, list):
            problems.append(f"{key}: expected a list")
        if "tolerance" in key and isinstance(val, (int, float)) and val <= 0:
            problems.append(f"{key}: tolerances must be > 0")
    for key in ("n", "boost_n", "boost_nt", "random_n"):
        if key in cfg and (not isinstance(cfg[key], int) or cfg[key] < 2):
            problems.append(f"{key}: need an integer >= 2")
    for key in ("velocity",):
        if key in cfg and abs(cfg[key]) >= 1:
            problems.append(f"{key}: |v| must be < 1")
    if problems:
        raise ConfigError("; ".join(problems))


def _merged_config(command, path):
    cfg = copy.deepcopy(DEFAULTS[command])
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        _validate(command, user)
        cfg.update(user)
    return cfg


def _check(name, value, tolerance):
    return {"name": name, "value": float(value),
            "tolerance": float(tolerance),
            "pass": bool(abs(value) <= tolerance or value <= tolerance)}


def _bound_check(name, value, bound):
    """Pass iff value >= bound (lower-bound style checks)."""
    return {"name": name, "value": float(value), "tolerance": float(bound),
            "pass": bool(value >= bound)}


def _write_atomic(path, data):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d)
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            repr(float(c)) if isinstance(c, (int, float, np.floating))
            and not isinstance(c, bool) else str(c) for c in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _save_figure(fig, path):
    fig.savefig(path, dpi=110, metadata={"Software": "eventqm"})
    plt.close(fig)


def _bar_figure(names, values, tolerances, title, path, logscale=True):
    fig, ax = plt.subplots(figsize=(7, 3.2))
    x = np.arange(len(names))
    ax.bar(x, values, color="#35678f")
    ax.plot(x, tolerances, "r_", markersize=18, label="tolerance")
    if logscale and min(values) > 0:
        ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save_figure(fig, path)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_algebra_check(cfg, out, rng, scale):
    g = Grid4D.cubic(cfg["n"], cfg["delta"])
    st = EventState.gaussian_packet(g, widths=[cfg["sigma"]] * 4,
                                    momentum=cfg["carrier"])
    tol = cfg["tolerance"] * scale
    checks, rows = [], []
    # canonical pairs, including the +i eta^{00} time case
    for mu in range(4):
        for nu in range(4):
            r = commutator_check(st, ("X", mu), ("P", nu))
            rows.append((f"X{mu}", f"P{nu}", r))
            checks.append(_check(f"ccr_X{mu}_P{nu}", r, tol))
    # generator-momentum and generator-generator relations (sampled)
    for (mu, nu, rho) in [(0, 1, 0), (0, 1, 1), (1, 2, 2), (2, 3, 1)]:
        r = commutator_check(st, ("M", mu, nu), ("P", rho))
        rows.append((f"M{mu}{nu}", f"P{rho}", r))
        checks.append(_check(f"mp_M{mu}{nu}_P{rho}", r, tol))
    for (a, b) in [((0, 1), (1, 2)), ((1, 2), (2, 3)), ((0, 1), (0, 2)),
                   ((0, 1), (2, 3))]:
        r = commutator_check(st, ("M",) + a, ("M",) + b)
        rows.append((f"M{a[0]}{a[1]}", f"M{b[0]}{b[1]}", r))
        checks.append(_check(f"mm_M{a[0]}{a[1]}_M{b[0]}{b[1]}", r, tol))
    # finite transforms agree with exponentiated generators
    for mu, nu, theta, label in [(0, 1, 0.35, "boost"), (1, 2, 0.6, "rotation")]:
        r = generator_exponential_check(st, mu, nu, theta)
        rows.append((f"exp_M{mu}{nu}", label, r))
        checks.append(_check(f"exp_M{mu}{nu}_{label}", r, tol))
    _write_csv(os.path.join(out, "residuals.csv"),
               ["operator_a", "operator_b", "residual"], rows)
    _bar_figure([c["name"] for c in checks], [c["value"] for c in checks],
                [c["tolerance"] for c in checks],
                "commutator and exponential-map residuals",
                os.path.join(out, "residuals.png"))
    return checks, {"residuals": "residuals.csv"}, ["residuals.png"]


def cmd_uncertainty(cfg, out, rng, scale):
    g = Grid4D.cubic(cfg["n"], cfg["delta"])
    tol = cfg["gaussian_tolerance"] * scale
    slack = cfg["bound_slack"] * scale
    checks, rows = [], []
    worst = 0.0
    for sigma in cfg["sigma_sweep"]:
        st = EventState.gaussian_packet(g, widths=[sigma] * 4)
        for mu in range(4):
            dx, dp, prod = st.uncertainty_product(mu)
            rows.append((sigma, mu, dx, dp, prod))
            worst = max(worst, abs(prod - 0.5))
    checks.append(_check("gaussian_product_minus_half_max", worst, tol))
    gr = Grid4D.cubic(cfg["random_n"], cfg["random_delta"])
    min_prod = np.inf
    rand_rows = []
    for k in range(cfg["random_states"]):
        st = random_band_limited(gr, rng)
        for mu in range(4):
            _, _, prod = st.uncertainty_product(mu)
            min_prod = min(min_prod, prod)
        rand_rows.append((k, min_prod))
    checks.append(_bound_check("random_state_min_product", min_prod,
                               0.5 - slack))
    _write_csv(os.path.join(out, "gaussian_sweep.csv"),
               ["sigma", "mu", "delta_x", "delta_p", "product"], rows)
    _write_csv(os.path.join(out, "random_states.csv"),
               ["state", "running_min_product"], rand_rows)
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    arr = np.array([(r[0], r[4]) for r in rows if r[1] == 1])
    ax.plot(arr[:, 0], arr[:, 1], "o-", label="axis 1 Gaussian")
    ax.axhline(0.5, color="r", lw=0.8, label="lower bound 1/2")
    ax.set_xlabel("packet width sigma")
    ax.set_ylabel("dX dP")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save_figure(fig, os.path.join(out, "uncertainty.png"))
    return checks, {"gaussian_sweep": "gaussian_sweep.csv",
                    "random_states": "random_states.csv"}, ["uncertainty.png"]


def cmd_boost_demo(cfg, out, rng, scale):
    g = Grid4D.cubic(cfg["n"], cfg["delta"])
    st = EventState.gaussian_packet(
        g, centers=[0.3, -0.2, 0.25, 0.0], widths=[cfg["sigma"]] * 4,
        momentum=[0.2, 0.25, -0.15, 0.1])
    other = EventState.gaussian_packet(
        g, centers=[-0.2, 0.3, 0.0, 0.2], widths=[cfg["sigma"]] * 4,
        momentum=[0.15, -0.2, 0.2, 0.0])
    checks, rows = [], []
    inv_tol = cfg["invariance_tolerance"] * scale
    cov_tol = cfg["covariance_tolerance"] * scale
    elements = {
        "boost": PoincareElement(LorentzTransform.boost(1, cfg["velocity"])),
        "rotation": PoincareElement(
            LorentzTransform.rotation(3, cfg["rotation_angle"])),
        "boost+shift": PoincareElement(
            LorentzTransform.boost(2, -cfg["velocity"] / 2),
            cfg["translation"]),
    }
    boosted = None
    for name, el in elements.items():
        before, after = scalar_product_invariance(el, st, other, "position")
        rows.append((name, "scalar_product", abs(after - before)))
        checks.append(_check(f"invariance_{name}", abs(after - before),
                             inv_tol))
        tst = el.apply_position(st)
        if name == "boost":
            boosted = tst
        want_x = el.lorentz.matrix @ st.four_position_mean() + np.asarray(
            el.translation)
        want_p = el.lorentz.matrix @ st.four_momentum_mean()
        got_x = tst.four_position_mean()
        got_p = tst.four_momentum_mean()
        rows.append((name, "mean_x", float(np.max(np.abs(got_x - want_x)))))
        rows.append((name, "mean_p", float(np.max(np.abs(got_p - want_p)))))
        checks.append(_check(f"covariance_x_{name}",
                             np.max(np.abs(got_x - want_x)), cov_tol))
        checks.append(_check(f"covariance_p_{name}",
                             np.max(np.abs(got_p - want_p)), cov_tol))
    v1, v2 = cfg["compose_velocities"]
    one = PoincareElement(LorentzTransform.boost(1, v1))
    two = PoincareElement(LorentzTransform.boost(1, v2))
    combined = two.compose(one)
    a = two.apply_position(one.apply_position(st))
    b = combined.apply_position(st)
    comp = float(np.max(np.abs(a.field - b.field)) * np.sqrt(g.cell_volume))
    rows.append(("composition", "field_gap", comp))
    checks.append(_check("composition_two_boosts", comp,
                         cfg["composition_tolerance"] * scale))
    _write_csv(os.path.join(out, "transforms.csv"),
               ["transform", "quantity", "value"], rows)
    fig, axes = plt.subplots(1, 2, figsize=(7, 3))
    mid = cfg["n"] // 2
    for ax, state, title in ((axes[0], st, "original"),
                             (axes[1], boosted, "boosted")):
        ax.imshow(state.density()[:, :, mid, mid].T, origin="lower",
                  extent=[g.axes[0].coords[0], g.axes[0].coords[-1],
                          g.axes[1].coords[0], g.axes[1].coords[-1]])
        ax.set_xlabel("t")
        ax.set_ylabel("x1")
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    _save_figure(fig, os.path.join(out, "boost_density.png"))
    return checks, {"transforms": "transforms.csv"}, ["boost_density.png"]


def cmd_constraint_residual(cfg, out, rng, scale):
    m = cfg["mass"]
    g = Grid3D.cubic(cfg["n"], cfg["delta"])
    p = np.stack(np.broadcast_arrays(
        *[g.dual_mesh(a) for a in range(3)]), axis=-1)
    f = np.exp(-np.sum((p - np.array([0.2, 0.0, -0.1])) ** 2, axis=-1)
               / (2 * cfg["sigma_p"] ** 2))
    checks, rows = [], []
    pos = build_onshell_kg(f, g, m)
    r_pos = kg_residual(pos, m)
    checks.append(_check("onshell_kg_residual", r_pos,
                         cfg["onshell_tolerance"] * scale))
    # the wrong-branch penalty: a negative-energy packet scored by the
    # positive-branch symbol sits at the -m^2 plateau
    neg = build_onshell_kg(f, g, m, branch="negative")
    e = neg.energies()
    p4 = np.stack([-e] + [np.broadcast_to(g.dual_mesh(a), e.shape)
                          for a in range(3)], axis=-1)
    penalty = float(np.sqrt(
        np.sum(np.abs(kg_symbol(p4, m) * neg.psi) ** 2)
        / np.sum(np.abs(neg.psi) ** 2)))
    checks.append(_bound_check("negative_branch_penalty", penalty,
                               0.9 * m * m))
    rows.append(("onshell_kg_residual", r_pos))
    rows.append(("negative_branch_penalty", penalty))
    worst_vec, worst_unit = 0.0, 0.0
    for _ in range(cfg["random_momenta"]):
        p4r = rng.normal(scale=2.0, size=4)
        lam, u, _ = dirac_eigensystem(p4r, m)
        mat = dirac_matrix(p4r, m)
        worst_vec = max(worst_vec, float(np.max(np.abs(
            mat @ u - u * lam[None, :]))))
        worst_unit = max(worst_unit, float(np.max(np.abs(
            u.conj().T @ u - np.eye(4)))))
    checks.append(_check("dirac_eigensystem_residual", worst_vec,
                         cfg["eigen_tolerance"] * scale))
    checks.append(_check("dirac_unitarity", worst_unit,
                         cfg["unitarity_tolerance"] * scale))
    rows.append(("dirac_eigensystem_residual", worst_vec))
    rows.append(("dirac_unitarity", worst_unit))
    jres = current_conservation_residual(pos, 0.4)
    checks.append(_check("current_conservation", jres,
                         cfg["current_tolerance"] * scale))
    rows.append(("current_conservation", jres))
    _write_csv(os.path.join(out, "residuals.csv"), ["check", "value"], rows)
    _bar_figure([c["name"] for c in checks],
                [max(c["value"], 1e-18) for c in checks],
                [c["tolerance"] for c in checks],
                "constraint-kernel residuals",
                os.path.join(out, "residuals.png"))
    return checks, {"residuals": "residuals.csv"}, ["residuals.png"]


def cmd_correspondence(cfg, out, rng, scale):
    m = cfg["mass"]
    g = Grid3D.cubic(cfg["n"], cfg["delta"])
    x = [g.coord_mesh(a) for a in range(3)]
    psi0 = np.exp(-(x[0] ** 2 + x[1] ** 2 + x[2] ** 2)
                  / (2 * cfg["sigma"] ** 2) + 1j * 0.4 * x[0])
    traj = QMTrajectory(g, psi0, m, times=cfg["times"])
    st = lift_trajectory(traj)
    checks, rows = [], []
    tol = cfg["oracle_tolerance"] * scale
    worst, worst_norm = 0.0, 0.0
    for t in cfg["times"]:
        sl = slice_at_time(st, t)
        oracle = schrodinger_evolve(traj.psi0, g, m, t)
        gap = float(np.max(np.abs(sl - oracle)))
        nrm = float(np.sqrt(np.sum(np.abs(sl) ** 2) * g.cell_volume))
        rows.append((t, gap, nrm))
        worst = max(worst, gap)
        worst_norm = max(worst_norm, abs(nrm - 1.0))
    checks.append(_check("slice_vs_schrodinger_oracle", worst, tol))
    checks.append(_check("slice_norm_drift", worst_norm,
                         cfg["norm_tolerance"] * scale))
    # spinor path against its own oracle
    spinor = np.zeros((4,) + g.shape, dtype=complex)
    spinor[0] = psi0
    spinor[3] = 0.4 * np.exp(-(x[0] ** 2 + x[1] ** 2 + x[2] ** 2)
                             / (2 * cfg["sigma"] ** 2))
    trajd = QMTrajectory(g, spinor, m, kind="Dirac", times=cfg["times"])
    std = lift_trajectory(trajd)
    worst_d = 0.0
    for t in cfg["times"]:
        gap = float(np.max(np.abs(slice_at_time(std, t)
                                  - dirac_evolve(trajd.psi0, g, m, t))))
        worst_d = max(worst_d, gap)
    checks.append(_check("slice_vs_dirac_oracle", worst_d, tol))
    # boosted two-path comparison (spinless invariant)
    gb = Grid3D.cubic(cfg["boost_n"], cfg["boost_delta"])
    pb = np.stack(np.broadcast_arrays(
        *[gb.dual_mesh(a) for a in range(3)]), axis=-1)
    fb = np.exp(-np.sum(pb ** 2, axis=-1) * cfg["boost_sigma"] ** 2 / 2)
    stb = build_onshell_kg(fb, gb, m)
    taxis = AxisGrid.centered(cfg["boost_nt"], cfg["boost_dt"])
    rep = two_path_boost_check(stb, cfg["velocity"], taxis,
                               cfg["window_flat"], cfg["window_taper"])
    checks.append(_check("two_path_boost", rep["rel_err"],
                         cfg["two_path_tolerance"] * scale))
    checks.append(_check("branch_leakage", rep["leakage"],
                         cfg["leakage_tolerance"] * scale))
    rows_boost = [(cfg["velocity"], rep["rel_err"], rep["leakage"],
                   rep["clearance"])]
    _write_csv(os.path.join(out, "slices.csv"),
               ["time", "oracle_gap", "slice_norm"], rows)
    _write_csv(os.path.join(out, "boost.csv"),
               ["velocity", "two_path_err", "leakage", "clearance"],
               rows_boost)
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    mid = cfg["n"] // 2
    xc = g.axes[0].coords
    for t in cfg["times"]:
        ax.plot(xc, np.abs(slice_at_time(st, t))[:, mid, mid],
                label=f"t = {t}")
    ax.set_xlabel("x1")
    ax.set_ylabel("|psi|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save_figure(fig, os.path.join(out, "slices.png"))
    return checks, {"slices": "slices.csv", "boost": "boost.csv"}, [
        "slices.png"]


def cmd_multievent(cfg, out, rng, scale):
    checks, rows = [], []
    sym = np.asarray(cfg["toy_symbol"], dtype=float)
    n = cfg["events"]
    rep = kernel_intersection_check([sym] * n, n)
    checks.append({"name": "kernel_equals_intersection",
                   "value": float(rep["subspace_gap"]),
                   "tolerance": 1e-8, "pass": bool(rep["equal"])})
    rows.append(("kernel_dim_sum", rep["dim_kernel_sum"]))
    rows.append(("kernel_dim_intersection", rep["dim_kernel_intersection"]))
    bad = kernel_intersection_check([np.array([1.0, -1.0])] * 2, 2,
                                    allow_indefinite=True)
    checks.append({"name": "indefinite_counterexample_detected",
                   "value": float(bad["dim_kernel_sum"]
                                  - bad["dim_kernel_intersection"]),
                   "tolerance": 0.0, "pass": bool(not bad["equal"])})
    rows.append(("indefinite_kernel_dim_sum", bad["dim_kernel_sum"]))
    ptol = cfg["projector_tolerance"] * scale
    t3 = rng.normal(size=(4, 4, 4)) + 1j * rng.normal(size=(4, 4, 4))
    s3 = _projector_apply(t3, SYM_S)
    a3 = _projector_apply(t3, SYM_A)
    idem = max(float(np.max(np.abs(_projector_apply(s3, SYM_S) - s3))),
               float(np.max(np.abs(_projector_apply(a3, SYM_A) - a3))))
    ortho = float(np.max(np.abs(_projector_apply(a3, SYM_S))))
    checks.append(_check("projector_idempotence", idem, ptol))
    checks.append(_check("projector_orthogonality", ortho, ptol))
    rows.append(("projector_idempotence", idem))
    rows.append(("projector_orthogonality", ortho))
    vec = rng.normal(size=5) + 1j * rng.normal(size=5)
    try:
        symmetrize(lift_product_form([1.0], [[vec, vec]]), "A")
        pauli_ok = False
    except AnnihilatedStateError:
        pauli_ok = True
    checks.append({"name": "pauli_annihilation", "value": 0.0,
                   "tolerance": 0.0, "pass": pauli_ok})
    modes = ModeSet(cfg["fock_modes"])
    vac_res = fock_constraint_apply(FockState.vacuum(modes))[1]
    kernel_occ = {}
    onshell = [k for k, kap in enumerate(modes.kappas) if kap == 0.0]
    base = [0] * modes.dim
    occ1 = list(base)
    occ1[onshell[0]] = 1
    occ2 = list(base)
    occ2[onshell[-1]] = 2
    mix = FockState(modes, {tuple(base): 0.5, tuple(occ1): 0.6,
                            tuple(occ2): 0.62}, "bose")
    mix_res = fock_constraint_apply(mix)[1]
    checks.append(_check("fock_vacuum_residual", vac_res, 1e-15))
    checks.append(_check("fock_onshell_superposition_residual", mix_res,
                         1e-15))
    rows.append(("fock_vacuum_residual", vac_res))
    rows.append(("fock_superposition_residual", mix_res))
    _write_csv(os.path.join(out, "multievent.csv"), ["quantity", "value"],
               rows)
    _bar_figure([c["name"] for c in checks],
                [max(c["value"], 1e-18) for c in checks],
                [max(c["tolerance"], 1e-18) for c in checks],
                "multi-event checks", os.path.join(out, "multievent.png"))
    return checks, {"multievent": "multievent.csv"}, ["multievent.png"]


COMMANDS = {
    "algebra-check": cmd_algebra_check,
    "uncertainty": cmd_uncertainty,
    "boost-demo": cmd_boost_demo,
    "constraint-residual": cmd_constraint_residual,
    "correspondence": cmd_correspondence,
    "multievent": cmd_multievent,
}


def run_command(command, config_path=None, out=None, seed=1234,
                tolerance_scale=1.0):
    """Run one scenario; returns (exit_code, report dict)."""
    try:
        cfg = _merged_config(command, config_path)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return 2, None
    if tolerance_scale <= 0:
        sys.stderr.write("invalid config: --tolerance-scale must be > 0\n")
        return 2, None
    out = out or os.path.join("reports", command)
    os.makedirs(out, exist_ok=True)
    rng = np.random.default_rng(seed)
    checks, series, figures = COMMANDS[command](cfg, out, rng,
                                               tolerance_scale)
    report = {
        "command": command,
        "seed": int(seed),
        "tolerance_scale": float(tolerance_scale),
        "config": cfg,
        "conventions": CONVENTIONS,
        "checks": checks,
        "series": series,
        "figures": figures,
        "all_pass": all(c["pass"] for c in checks),
    }
    _write_atomic(os.path.join(out, "report.json"),
                  json.dumps(report, sort_keys=True, indent=1) + "\n")
    for c in checks:
        status = "pass" if c["pass"] else "FAIL"
        print(f"{status}  {c['name']}: {c['value']:.3e} "
              f"(tolerance {c['tolerance']:.3e})")
    return (0 if report["all_pass"] else 1), report


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="eventqm",
        description="verification scenarios for event wavefunctions "
                    "on spacetime grids")
    parser.add_argument("command", choices=sorted(COMMANDS) + ["suite"],
                        help="scenario to run ('suite' runs all)")
    parser.add_argument("--config", default=None,
                        help="JSON config overriding the defaults")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=1234)
    parser.add_argument("--tolerance-scale", type=float, default=1.0)
    args = parser.parse_args(argv)
    if args.command == "suite":
        worst = 0
        base = args.out or "reports"
        for name in sorted(COMMANDS):
            code, _ = run_command(name, args.config, os.path.join(base, name),
                                  args.seed, args.tolerance_scale)
            worst = max(worst, code)
        return worst
    code, _ = run_command(args.command, args.config, args.out, args.seed,
                          args.tolerance_scale)
    return code


if __name__ == "__main__":
    sys.exit(main())
