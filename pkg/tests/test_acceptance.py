"""
End-to-end acceptance checks, one per core guarantee, each printing a
single pass/fail line (run pytest with -s to see them).  Configurations
here are frozen: grid sizes, packet widths and tolerances were chosen
so every quantity meets its stated tolerance with margin on a single
CPU within the stated time budget.
"""

import json
import os
import time

import numpy as np

from eventqm import (AxisGrid, Grid3D, Grid4D, EventState, LorentzTransform,
                     PoincareElement, commutator_check,
                     scalar_product_invariance, random_band_limited,
                     build_onshell_kg, kg_symbol, kg_residual, dirac_matrix,
                     dirac_eigensystem, QMTrajectory, lift_trajectory,
                     slice_at_time, schrodinger_evolve, dirac_evolve,
                     two_path_boost_check, current_conservation_residual,
                     kernel_intersection_check, lift_product_form,
                     symmetrize, FockState, ModeSet, fock_constraint_apply,
                     AnnihilatedStateError)
from eventqm.multievent import _projector_apply, SYM_S, SYM_A
from eventqm.cli import main as cli_main


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_commutators():
    t0 = time.time()
    g = Grid4D.cubic(32, 0.55)
    st = EventState.gaussian_packet(g, widths=[1.3] * 4,
                                    momentum=[0.25, 0.2, -0.15, 0.1])
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            worst = max(worst, commutator_check(st, ("X", mu), ("P", nu)))
    for args in ((("M", 0, 1), ("P", 0)), (("M", 0, 1), ("P", 1)),
                 (("M", 1, 2), ("P", 3)), (("M", 0, 1), ("M", 1, 2)),
                 (("M", 1, 2), ("M", 2, 3)), (("M", 0, 1), ("M", 2, 3))):
        worst = max(worst, commutator_check(st, *args))
    dt = time.time() - t0
    _report("criterion 1 (commutators on 32-point axes)",
            worst < 1e-6 and dt < 10,
            f"max residual {worst:.2e} < 1e-6, {dt:.1f}s < 10s")


def test_criterion_2_uncertainty():
    t0 = time.time()
    g = Grid4D.cubic(32, 0.55)
    worst = 0.0
    for sigma in (0.9, 1.1, 1.3, 1.6):
        st = EventState.gaussian_packet(g, widths=[sigma] * 4)
        for mu in range(4):
            _, _, prod = st.uncertainty_product(mu)
            worst = max(worst, abs(prod - 0.5))
    rng = np.random.default_rng(42)
    gr = Grid4D.cubic(16, 0.8)
    min_prod = np.inf
    for _ in range(200):
        st = random_band_limited(gr, rng)
        for mu in range(4):
            _, _, prod = st.uncertainty_product(mu)
            min_prod = min(min_prod, prod)
    dt = time.time() - t0
    ok = worst < 1e-4 and min_prod >= 0.5 - 1e-6 and dt < 30
    _report("criterion 2 (uncertainty products)", ok,
            f"Gaussian |product-1/2| {worst:.2e} < 1e-4, random-state "
            f"min {min_prod:.6f} >= 0.5-1e-6, {dt:.1f}s < 30s")


def test_criterion_3_poincare_unitarity():
    t0 = time.time()
    g = Grid4D.cubic(32, 0.55)
    a = EventState.gaussian_packet(g, centers=[0.3, -0.2, 0.25, 0.0],
                                   widths=[1.3] * 4,
                                   momentum=[0.2, 0.25, -0.15, 0.1])
    b = EventState.gaussian_packet(g, centers=[-0.2, 0.3, 0.0, 0.2],
                                   widths=[1.3] * 4,
                                   momentum=[0.15, -0.2, 0.2, 0.0])
    inv_worst = 0.0
    cov_worst = 0.0
    for el in (PoincareElement(LorentzTransform.boost(1, 0.6)),
               PoincareElement(LorentzTransform.boost(2, -0.5)),
               PoincareElement(LorentzTransform.rotation(3, 0.8),
                               [0.4, -0.3, 0.25, 0.0]),
               PoincareElement(LorentzTransform.boost(3, 0.35),
                               [0.0, 0.5, 0.0, -0.4])):
        before, after = scalar_product_invariance(el, a, b, "position")
        inv_worst = max(inv_worst, abs(after - before))
        out = el.apply_position(a)
        lam = el.lorentz.matrix
        want_x = lam @ a.four_position_mean() + el.translation
        want_p = lam @ a.four_momentum_mean()
        cov_worst = max(cov_worst,
                        np.max(np.abs(out.four_position_mean() - want_x)),
                        np.max(np.abs(out.four_momentum_mean() - want_p)))
    one = PoincareElement(LorentzTransform.boost(1, 0.2))
    two = PoincareElement(LorentzTransform.boost(1, 0.25))
    seq = two.apply_position(one.apply_position(a))
    once = two.compose(one).apply_position(a)
    comp = float(np.max(np.abs(seq.field - once.field))
                 * np.sqrt(g.cell_volume))
    dt = time.time() - t0
    ok = inv_worst < 1e-6 and cov_worst < 1e-5 and comp < 2e-6 and dt < 120
    _report("criterion 3 (Poincare transforms, |v| <= 0.6, 32^4)", ok,
            f"invariance {inv_worst:.2e} < 1e-6, covariance "
            f"{cov_worst:.2e} < 1e-5, composition {comp:.2e} < 2e-6, "
            f"{dt:.1f}s < 120s")


def test_criterion_4_constraint_operators():
    t0 = time.time()
    m = 1.0
    g = Grid3D.cubic(24, 0.6)
    p = np.stack(np.broadcast_arrays(
        *[g.dual_mesh(ax) for ax in range(3)]), axis=-1)
    f = np.exp(-np.sum((p - np.array([0.2, 0.0, -0.1])) ** 2, axis=-1)
               / (2 * 0.5 ** 2))
    pos = build_onshell_kg(f, g, m)
    res_pos = kg_residual(pos, m)
    neg = build_onshell_kg(f, g, m, branch="negative")
    e = neg.energies()
    p4 = np.stack([-e] + [np.broadcast_to(g.dual_mesh(ax), e.shape)
                          for ax in range(3)], axis=-1)
    penalty = float(np.sqrt(
        np.sum(np.abs(kg_symbol(p4, m) * neg.psi) ** 2)
        / np.sum(np.abs(neg.psi) ** 2)))
    rng = np.random.default_rng(1)
    vec_worst, unit_worst = 0.0, 0.0
    for _ in range(200):
        p4r = rng.normal(scale=2.0, size=4)
        lam, u, _ = dirac_eigensystem(p4r, m)
        mat = dirac_matrix(p4r, m)
        lam_oracle = np.linalg.eigvalsh(mat)
        vec_worst = max(vec_worst,
                        float(np.max(np.abs(np.sort(lam) - lam_oracle))),
                        float(np.max(np.abs(mat @ u - u * lam[None, :]))))
        unit_worst = max(unit_worst, float(np.max(np.abs(
            u.conj().T @ u - np.eye(4)))))
    dt = time.time() - t0
    ok = (res_pos < 1e-6 and penalty >= 0.9 * m * m
          and vec_worst < 1e-10 and unit_worst < 1e-12 and dt < 60)
    _report("criterion 4 (constraint operators)", ok,
            f"on-shell residual {res_pos:.2e} < 1e-6, wrong-branch "
            f"penalty {penalty:.3f} >= 0.9 m^2, Dirac eigensolver "
            f"{vec_worst:.2e} < 1e-10, unitarity {unit_worst:.2e} "
            f"< 1e-12, {dt:.1f}s < 60s")


def test_criterion_5_qm_correspondence():
    t0 = time.time()
    m = 1.0
    g = Grid3D.cubic(64, 0.4)
    x = [g.coord_mesh(a) for a in range(3)]
    psi0 = np.exp(-(x[0] ** 2 + x[1] ** 2 + x[2] ** 2) / (2 * 1.6 ** 2)
                  + 1j * 0.4 * x[0])
    traj = QMTrajectory(g, psi0, m)
    st = lift_trajectory(traj)
    worst, norm_worst = 0.0, 0.0
    for t in (0.0, 0.5, 1.0, 5.0):
        sl = slice_at_time(st, t)
        worst = max(worst, float(np.max(np.abs(
            sl - schrodinger_evolve(traj.psi0, g, m, t)))))
        nrm = float(np.sqrt(np.sum(np.abs(sl) ** 2) * g.cell_volume))
        norm_worst = max(norm_worst, abs(nrm - 1.0))
    spinor = np.zeros((4,) + g.shape, dtype=complex)
    spinor[0] = psi0
    spinor[3] = 0.4 * np.abs(psi0)
    trajd = QMTrajectory(g, spinor, m, kind="Dirac")
    std = lift_trajectory(trajd)
    for t in (0.0, 0.5, 1.0, 5.0):
        worst = max(worst, float(np.max(np.abs(
            slice_at_time(std, t) - dirac_evolve(trajd.psi0, g, m, t)))))
    dt = time.time() - t0
    ok = worst < 1e-10 and norm_worst < 1e-10 and dt < 60
    _report("criterion 5 (time-slice correspondence, 64^3)", ok,
            f"max pointwise gap {worst:.2e} < 1e-10, norm drift "
            f"{norm_worst:.2e} < 1e-10, {dt:.1f}s < 60s")


def test_criterion_6_two_path_boost():
    t0 = time.time()
    m = 1.0
    g = Grid3D(axes=[AxisGrid.centered(96, 0.42),
                     AxisGrid.centered(48, 0.5),
                     AxisGrid.centered(48, 0.5)])
    p = np.stack(np.broadcast_arrays(
        *[g.dual_mesh(a) for a in range(3)]), axis=-1)
    f = np.exp(-np.sum(p ** 2, axis=-1) * 1.4 ** 2 / 2)
    st = build_onshell_kg(f, g, m)
    taxis = AxisGrid.centered(96, 0.45)
    worst_err, worst_leak = 0.0, 0.0
    for v in (0.2, 0.4, 0.6):
        rep = two_path_boost_check(st, v, taxis, 8.0, 0.85)
        worst_err = max(worst_err, rep["rel_err"])
        worst_leak = max(worst_leak, rep["leakage"])
    dt = time.time() - t0
    ok = worst_err < 1e-4 and worst_leak < 1e-8 and dt < 120
    _report("criterion 6 (two-path boost, v in {0.2, 0.4, 0.6})", ok,
            f"max relative gap {worst_err:.2e} < 1e-4, positive-branch "
            f"leakage {worst_leak:.2e} < 1e-8, {dt:.1f}s < 120s")


def test_criterion_7_multievent_kernels():
    t0 = time.time()
    # kernel(sum) == intersection for positive constraints, up to the
    # densifiable cap
    sym = np.array([0.0, 0.7, 1.3, 0.0])
    ok_equal = True
    for n in (2, 3):
        rep = kernel_intersection_check([sym] * n, n)
        ok_equal = ok_equal and rep["equal"] and rep["all_positive"]
    rep6 = kernel_intersection_check(
        [np.array([0.0, 0.5, 0.0, 1.0, 0.25, 2.0])] * 4, 4)
    ok_equal = ok_equal and rep6["equal"]  # 6^4 = 1296 product dims
    try:  # the dense build is capped at 4096 product dimensions
        kernel_intersection_check([np.zeros(9)] * 4, 4)
        ok_cap = False
    except ValueError:
        ok_cap = True
    ok_equal = ok_equal and ok_cap
    bad = kernel_intersection_check([np.array([1.0, -1.0])] * 2, 2,
                                    allow_indefinite=True)
    ok_counter = (not bad["equal"]
                  and bad["dim_kernel_sum"] > bad["dim_kernel_intersection"])
    rng = np.random.default_rng(12)
    t3 = rng.normal(size=(4, 4, 4)) + 1j * rng.normal(size=(4, 4, 4))
    s3 = _projector_apply(t3, SYM_S)
    a3 = _projector_apply(t3, SYM_A)
    proj_worst = max(
        float(np.max(np.abs(_projector_apply(s3, SYM_S) - s3))),
        float(np.max(np.abs(_projector_apply(a3, SYM_A) - a3))),
        float(np.max(np.abs(_projector_apply(a3, SYM_S)))))
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    try:
        symmetrize(lift_product_form([1.0], [[v, v]]), "antisymmetric")
        ok_pauli = False
    except AnnihilatedStateError:
        ok_pauli = True
    modes = ModeSet([0.0, 0.3, 0.0, 1.2])
    _, vac_res = fock_constraint_apply(FockState.vacuum(modes))
    mix = FockState(modes, {(0, 0, 0, 0): 0.5, (1, 0, 0, 0): 0.6,
                            (0, 0, 2, 0): 0.62}, "bose")
    _, mix_res = fock_constraint_apply(mix)
    dt = time.time() - t0
    ok = (ok_equal and ok_counter and proj_worst < 1e-12 and ok_pauli
          and vac_res == 0.0 and mix_res < 1e-14 and dt < 60)
    _report("criterion 7 (multi-event constraint kernels)", ok,
            f"kernel equality + counterexample ok, projector algebra "
            f"{proj_worst:.2e} < 1e-12, Pauli annihilation ok, Fock "
            f"residuals {vac_res:.1e}/{mix_res:.1e}, {dt:.1f}s < 60s")


def test_criterion_8_current_conservation():
    t0 = time.time()
    g = Grid3D.cubic(48, 0.5)
    x = [g.coord_mesh(a) for a in range(3)]
    psi0 = np.exp(-(x[0] ** 2 + x[1] ** 2 + x[2] ** 2) / (2 * 1.5 ** 2)
                  + 1j * 0.4 * x[0])
    st = lift_trajectory(QMTrajectory(g, psi0, 1.0))
    worst = max(current_conservation_residual(st, t) for t in (0.0, 0.8))
    dt = time.time() - t0
    ok = worst < 1e-6 and dt < 30
    _report("criterion 8 (current conservation)", ok,
            f"max |d_mu j^mu| / max |j| = {worst:.2e} < 1e-6, "
            f"{dt:.1f}s < 30s")


def test_criterion_9_cli_determinism(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    code_a = cli_main(["suite", "--out", a, "--seed", "11"])
    code_b = cli_main(["suite", "--out", b, "--seed", "11"])
    identical = True
    n_files = 0
    for sub in sorted(os.listdir(a)):
        for name in sorted(os.listdir(os.path.join(a, sub))):
            n_files += 1
            with open(os.path.join(a, sub, name), "rb") as fh:
                bytes_a = fh.read()
            with open(os.path.join(b, sub, name), "rb") as fh:
                bytes_b = fh.read()
            identical = identical and bytes_a == bytes_b
    with open(os.path.join(a, "multievent", "report.json")) as fh:
        report = json.load(fh)
    ok = (code_a == 0 and code_b == 0 and identical and n_files > 0
          and report["conventions"]["theta_at_zero"] == 1.0)
    _report("criterion 9 (deterministic CLI reports)", ok,
            f"exit codes {code_a}/{code_b}, {n_files} files "
            f"byte-identical across reruns")
