"""
Dictionary between 4D event states and time-conditioned 3D wavefunctions.

A constraint-kernel state, restricted to a constant-time surface,
reproduces an ordinary quantum wavefunction whose phases advance with
the dispersion energy: psi_t~(p) = e^{-i E^(sigma)_p t} psi_0~(p).
The maps here go both ways — lift an initial 3D wavefunction onto the
kernel, slice a kernel state at any t — and the spectral Schrödinger /
Dirac evolutions are implemented as independent oracles so the two code
paths can be compared pointwise.

The time-t 3D restriction of the scalar current
    j^mu = i (psi* d^mu psi - psi d^mu psi*)
is conserved on-shell; note j^0 is a charge-type density (it changes
sign on the negative branch), not a probability density.
"""

import json
import os

import numpy as np

from .grids import Grid3D, grid_from_dict
from .spectral import fft3, ifft3
from .states import EventState, POSITION
from .constraints import (OnShellState, dispersion, dirac_u, slice_state,
                          onshell_boost, lift_windowed, lift_nearest_plane,
                          KG_PLUS, KG_MINUS, DIRAC)
from .minkowski import LorentzTransform
from .poincare import PoincareElement

slice_at_time = slice_state


def _norm3(field, grid):
    return float(np.sqrt(np.sum(np.abs(field) ** 2) * grid.cell_volume))


class QMTrajectory:
    """Initial 3D (spinor) wavefunction plus the times to evaluate at."""

    def __init__(self, grid, psi0, m, kind=KG_PLUS, times=()):
        psi0 = np.asarray(psi0, dtype=complex)
        if kind == DIRAC:
            if psi0.shape != (4,) + grid.shape:
                raise ValueError("Dirac trajectory needs a 4-spinor field")
        elif psi0.shape != grid.shape:
            raise ValueError("field shape does not match grid")
        n = _norm3(psi0, grid)
        if n == 0:
            raise ValueError("zero initial wavefunction")
        self.grid = grid
        self.psi0 = psi0 / n
        self.m = float(m)
        self.kind = kind
        self.times = list(times)

    def save(self, path):
        """JSON descriptor at `path`, raw field at `path + '.field'`."""
        with open(path + ".field", "wb") as fh:
            fh.write(np.ascontiguousarray(self.psi0).astype("<c16").tobytes())
        doc = {
            "mass": self.m,
            "kind": self.kind,
            "branch": {KG_PLUS: "positive", KG_MINUS: "negative",
                       DIRAC: "spinor"}[self.kind],
            "times": self.times,
            "psi0": os.path.basename(path) + ".field",
            "shape": list(self.psi0.shape),
            "grid": self.grid.to_dict(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        grid = grid_from_dict(doc["grid"])
        field_path = os.path.join(os.path.dirname(path), doc["psi0"])
        count = int(np.prod(doc["shape"]))
        psi0 = np.fromfile(field_path, dtype="<c16", count=count)
        return cls(grid, psi0.reshape(doc["shape"]), doc["mass"],
                   doc["kind"], doc["times"])


def lift_trajectory(traj):
    """Constraint-kernel state whose t=0 slice is the trajectory's
    initial wavefunction.

    Scalar kinds: the slice amplitude is just the 3D FFT of psi0 (every
    3D mode pairs with exactly one branch energy, so nothing is
    rejected).  Dirac: the momentum spinor is rotated into the helicity
    branch basis by u+(p_vec).
    """
    if traj.kind == DIRAC:
        tilde = np.stack([fft3(traj.psi0[c], traj.grid) for c in range(4)])
        u = dirac_u(np.stack(np.broadcast_arrays(
            *[traj.grid.dual_mesh(a) for a in range(3)]), axis=-1), traj.m)
        alpha = np.einsum("...cs,c...->s...", np.conj(u), tilde)
        return OnShellState(traj.grid, alpha, traj.m, DIRAC)
    return OnShellState(traj.grid, fft3(traj.psi0, traj.grid), traj.m,
                        traj.kind)


def schrodinger_evolve(psi0, grid, m, t, branch="positive"):
    """Spectral evolution with H = +sqrt(m^2 - laplacian) (branch
    'positive') or -H ('negative'); exactly unitary on the grid."""
    p = np.stack(np.broadcast_arrays(
        *[grid.dual_mesh(a) for a in range(3)]), axis=-1)
    e = dispersion(m, p)
    sign = -1.0 if branch == "positive" else 1.0
    return ifft3(np.exp(sign * 1j * e * t) * fft3(psi0, grid), grid)


def dirac_evolve(psi0, grid, m, t):
    """Spectral Dirac evolution of a 4-spinor field: rotate each p_vec
    into the helicity branch basis, advance each branch with its own
    energy phase, rotate back; exactly unitary."""
    psi0 = np.asarray(psi0, dtype=complex)
    tilde = np.stack([fft3(psi0[c], grid) for c in range(4)])
    pmesh = np.stack(np.broadcast_arrays(
        *[grid.dual_mesh(a) for a in range(3)]), axis=-1)
    u = dirac_u(pmesh, m)
    e = dispersion(m, pmesh)
    eb = np.stack([-e, e, -e, e], axis=0)
    alpha = np.einsum("...cs,c...->s...", np.conj(u), tilde)
    alpha = np.exp(-1j * eb * t) * alpha
    tilde = np.einsum("...cs,s...->c...", u, alpha)
    return np.stack([ifft3(tilde[c], grid) for c in range(4)])


def check_initial_condition(state, tau, target):
    """Relative L2 distance between the time-tau slice and `target`."""
    target = np.asarray(target, dtype=complex)
    sl = slice_at_time(state, tau)
    den = np.sqrt(np.sum(np.abs(target) ** 2))
    return float(np.sqrt(np.sum(np.abs(sl - target) ** 2)) / den)


def norm_modulation(state):
    """3D norm of each constant-time plane of a 4D position-rep state.

    Flat (up to the lift's smearing profile) for constraint-kernel
    states; genuinely non-constant for generic 4D packets.
    """
    if state.grid.ndim != 4:
        raise ValueError("needs a 4D state")
    st = state.to_position_rep()
    d = st.density()
    vol3 = st.grid.spatial.cell_volume
    return np.sqrt(d.sum(axis=(1, 2, 3)) * vol3)


def kg_current(state, t=0.0):
    """Conserved scalar current of a KG kernel state at time t.

    Returns (j0, jvec, divergence) where divergence is the pointwise
    d_t j^0 + div j_vec, evaluated spectrally.  j^0 = 2 Im(psi* psi_dot)
    changes sign between the branches (charge density, not probability).
    """
    if state.kind == DIRAC:
        raise ValueError("kg_current acts on KG kinds")
    g = state.grid
    e = state.energies()
    sign = -1.0 if state.kind == KG_PLUS else 1.0
    phase = np.exp(sign * 1j * e * t)
    tilde = phase * state.psi
    psi = ifft3(tilde, g)
    psid = ifft3(sign * 1j * e * tilde, g)          # d_t psi
    psidd = ifft3(-(e ** 2) * tilde, g)             # d_t^2 psi
    j0 = (1j * (np.conj(psi) * psid - psi * np.conj(psid))).real
    dj0 = (1j * (np.conj(psi) * psidd - psi * np.conj(psidd))).real
    jvec = []
    div = dj0.copy()
    for a in range(3):
        pa = g.dual_mesh(a)
        da = ifft3(1j * pa * fft3(psi, g), g)       # d_a psi
        # raised spatial index flips the sign: j^a = -i(psi* d_a psi - cc)
        ja = (-1j * (np.conj(psi) * da - psi * np.conj(da))).real
        jvec.append(ja)
        div += ifft3(1j * pa * fft3(ja, g), g).real
    return j0, jvec, div


def current_conservation_residual(state, t=0.0):
    """max |d_mu j^mu| relative to the sup of the current magnitude."""
    j0, jvec, div = kg_current(state, t)
    mag = np.sqrt(j0 ** 2 + sum(ja ** 2 for ja in jvec))
    return float(np.max(np.abs(div)) / np.max(mag))


def boost_pair_element(v, axis=1):
    """Spacetime transform matching onshell_boost(state, v, axis).

    The slice-space formula is the pull-back Phi(B_v x); in the active
    convention used by PoincareElement that is the transform with
    matrix B_{-v}.
    """
    return PoincareElement(LorentzTransform.boost(axis, -v))


def two_path_boost_check(state, v, taxis, flat_halfwidth=None,
                         taper_sigma=None, axis=1):
    """Compare the two routes to the boosted time-zero slice.

    Path A: boost in the on-shell parametrization, slice at t = 0.
    Path B: lift to a windowed 4D event state, resample under the
    matching spacetime boost, extract the t = 0 plane.
    Returns a dict with the relative sup-norm discrepancy (after a
    global-phase alignment), the wrong-branch leakage of path A (mass
    where the boosted p^0 crosses zero, identically 0 for |v| < 1
    because orthochronous boosts preserve the energy sign), and the 3D
    norms of both slices.
    """
    boosted = onshell_boost(state, v, axis)
    a = slice_state(boosted, 0.0)
    a = a / _norm3(a, state.grid)

    s = 1.0 if state.kind == KG_PLUS else -1.0
    e = boosted.energies()
    p1 = np.broadcast_to(state.grid.dual_mesh(axis - 1), state.grid.shape)
    gamma = 1.0 / np.sqrt(1 - v * v)
    p0 = gamma * (e + s * v * p1) * s
    wrong = (p0 * s) <= 0
    leakage = float(np.sum(np.abs(boosted.psi[wrong]) ** 2)
                    / np.sum(np.abs(boosted.psi) ** 2))

    lift = lift_windowed(state, taxis, flat_halfwidth, taper_sigma)
    out = boost_pair_element(v, axis).apply_position(lift)
    jzero = int(np.argmin(np.abs(taxis.coords)))
    b = out.field[jzero]
    b = b / _norm3(b, state.grid)
    phase = np.vdot(b, a)
    phase = phase / abs(phase)
    rel_err = float(np.max(np.abs(a - phase * b)) / np.max(np.abs(a)))
    return {
        "rel_err": rel_err,
        "leakage": leakage,
        "norm_slice_onshell": _norm3(slice_state(boosted, 0.0), state.grid),
        "norm_slice_4d": _norm3(out.field[jzero], state.grid),
        "clearance": out.edge_clearance(),
    }
