"""
Mass-shell constraint operators and their kernel states.

Dynamics enters as a positive operator condition K|Psi> = 0 rather than
an evolution law.  In momentum space the scalar (Klein-Gordon) symbol is

    j_+(p) = Theta(p^0) (p.p) - m^2        (positive branch)
    j_-(p) = Theta(-p^0) (p.p) - m^2       (negative branch)

with the Minkowski square p.p = (p^0)^2 - |p_vec|^2 and Theta(0) := 1.
On the wrong-sign half-space the symbol is pinned at -m^2, so negative
energy content can never sneak into the positive kernel.  K = j^2 is the
positive-semidefinite (squared) form.

The spin-1/2 constraint is built from the Hermitian matrix

    M(p) = gamma^0 (gamma.p - m)
         = [[(p^0 - m) 1,  -sigma.p], [-sigma.p, (p^0 + m) 1]]

whose eigenvalues are lambda_sigma = p^0 - E^(sigma) with
E^(1,3) = -E_p and E^(2,4) = +E_p, and whose eigenvectors are
helicity spinors in closed form (unit-normalised here; see
dirac_eigensystem).

Kernel states are stored in the on-shell 3D parametrization (amplitudes
over p_vec with p^0 fixed to the branch energy), never as literal 4D
delta distributions.  Lifts onto finite 4D grids are provided for
diagnostics and the boost two-path comparison.
"""

import json

import numpy as np

from .grids import Grid3D, Grid4D, AxisGrid, grid_from_dict
from .minkowski import PAULI
from .spectral import axis_to_dual, ifft3, SQRT_2PI
from .states import EventState, POSITION, MOMENTUM

KG_PLUS = "KG+"
KG_MINUS = "KG-"
DIRAC = "Dirac"


def dispersion(m, p3):
    """E_p = +sqrt(|p_vec|^2 + m^2); p3 is a 3-vector or stacked array
    whose last axis has length 3."""
    p3 = np.asarray(p3, dtype=float)
    return np.sqrt(np.sum(p3 * p3, axis=-1) + m * m)


def _theta(x):
    # Heaviside with Theta(0) := 1 (half-plane on the positive branch)
    return np.where(np.asarray(x) >= 0, 1.0, 0.0)


def kg_symbol(p4, m, branch="positive", squared=False):
    """Constraint symbol at four-momentum p4 (stacked: last axis 4).

    positive: Theta(p^0)(p.p) - m^2;  negative: Theta(-p^0)(p.p) - m^2;
    full: (p.p) - m^2 with no branch projector.
    """
    p4 = np.asarray(p4, dtype=float)
    square = p4[..., 0] ** 2 - np.sum(p4[..., 1:] ** 2, axis=-1)
    if branch == "positive":
        val = _theta(p4[..., 0]) * square - m * m
    elif branch == "negative":
        val = _theta(-p4[..., 0]) * square - m * m
    elif branch == "full":
        val = square - m * m
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return val ** 2 if squared else val


class KGSymbol:
    """Scalar constraint symbol with fixed mass and branch."""

    def __init__(self, m, branch="positive"):
        if m <= 0:
            raise ValueError("mass must be positive")
        self.m = m
        self.branch = branch

    def __call__(self, p4, squared=False):
        return kg_symbol(p4, self.m, self.branch, squared)

    def on_grid(self, grid, squared=False):
        """Symbol sampled over the momentum lattice of a Grid4D."""
        meshes = np.stack(np.broadcast_arrays(
            *[grid.dual_mesh(a) for a in range(4)]), axis=-1)
        return kg_symbol(meshes, self.m, self.branch, squared)


def kg_residual(state, m, branch="positive", squared=False):
    """Relative constraint residual ||symbol * Phi~|| / ||Phi~||.

    Accepts a 4D EventState (symbol evaluated on the momentum lattice;
    for nearest-plane lifted states this is limited by the O(dp^0)
    energy snapping) or an OnShellState (symbol evaluated at the exact
    branch energies, where kernel membership is exact).
    """
    if isinstance(state, OnShellState):
        if state.kind == DIRAC:
            raise ValueError("use dirac_residual for Dirac states")
        sign = 1.0 if state.kind == KG_PLUS else -1.0
        e = state.energies()
        p4 = np.stack([sign * e] + [np.broadcast_to(state.grid.dual_mesh(a), e.shape)
                                    for a in range(3)], axis=-1)
        sym = kg_symbol(p4, m, branch, squared)
        amp = state.psi
        return float(np.sqrt(np.sum(np.abs(sym * amp) ** 2)
                             / np.sum(np.abs(amp) ** 2)))
    st = state.to_momentum_rep()
    sym = KGSymbol(m, branch).on_grid(st.grid, squared)
    num = np.sum(np.abs(sym * st.field) ** 2)
    den = np.sum(np.abs(st.field) ** 2)
    if den == 0:
        raise ValueError("zero state")
    return float(np.sqrt(num / den))


# ---------------------------------------------------------------------------
# Dirac sector
# ---------------------------------------------------------------------------


def dirac_matrix(p4, m):
    """Hermitian matrix gamma^0(gamma.p - m) at a single four-momentum:
    [[(p^0-m) 1, -sigma.p], [-sigma.p, (p^0+m) 1]]."""
    p4 = np.asarray(p4, dtype=float)
    sp = sum(p4[1 + i] * PAULI[i] for i in range(3))
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = (p4[0] - m) * np.eye(2)
    out[2:, 2:] = (p4[0] + m) * np.eye(2)
    out[:2, 2:] = -sp
    out[2:, :2] = -sp
    return out


def _helicity_pair(n):
    """Helicity eigenspinors chi_+(n), chi_-(n) of sigma.n for unit
    vectors n (stacked, last axis 3).  Two charts keep the square roots
    away from zero: the usual 1+n3 form for n3 >= 0 and a rephased
    1-n3 form for n3 < 0."""
    n = np.asarray(n, dtype=float)
    n1, n2, n3 = n[..., 0], n[..., 1], n[..., 2]
    up = n3 >= 0
    rp = np.sqrt(np.where(up, 1.0 + n3, 1.0))
    rm = np.sqrt(np.where(up, 1.0, 1.0 - n3))
    plus_a = np.where(up, rp, (n1 - 1j * n2) / rm)
    plus_b = np.where(up, (n1 + 1j * n2) / rp, rm)
    minus_a = np.where(up, -(n1 - 1j * n2) / rp, rm)
    minus_b = np.where(up, rp, -(n1 + 1j * n2) / rm)
    s = 1.0 / np.sqrt(2.0)
    chi_p = np.stack([plus_a, plus_b], axis=-1) * s
    chi_m = np.stack([minus_a, minus_b], axis=-1) * s
    return chi_p, chi_m


def _unit_momentum(p3):
    p3 = np.asarray(p3, dtype=float)
    mag = np.sqrt(np.sum(p3 * p3, axis=-1))
    safe = np.where(mag > 0, mag, 1.0)
    n = p3 / safe[..., None]
    # p_vec = 0 has no direction; default n = (0,0,1)
    n[..., 2] = np.where(mag > 0, n[..., 2], 1.0)
    n[..., 0] = np.where(mag > 0, n[..., 0], 0.0)
    n[..., 1] = np.where(mag > 0, n[..., 1], 0.0)
    return n


def branch_energies(m, p3):
    """E^(sigma) for sigma = 1..4: (-E_p, +E_p, -E_p, +E_p)."""
    e = dispersion(m, p3)
    return np.stack([-e, e, -e, e], axis=-1)


def dirac_u(p3, m):
    """Unitary u(p_vec) whose columns phi_sigma diagonalise M(p).

    Columns (helicity h, upper/lower coefficients, all over sqrt(2E)):
      phi_1: h=+, ( sqrt(E-m), -sqrt(E+m))   E^(1) = -E_p
      phi_2: h=+, ( sqrt(E+m), +sqrt(E-m))   E^(2) = +E_p
      phi_3: h=-, ( sqrt(E-m), +sqrt(E+m))   E^(3) = -E_p
      phi_4: h=-, ( sqrt(E+m), -sqrt(E-m))   E^(4) = +E_p
    Column phases fixed by making the largest-magnitude component
    real-positive.  Stacked: p3 (..., 3) -> u (..., 4, 4).
    """
    p3 = np.asarray(p3, dtype=float)
    e = dispersion(m, p3)
    n = _unit_momentum(p3)
    chi_p, chi_m = _helicity_pair(n)
    a = np.sqrt(np.maximum(e - m, 0.0) / (2 * e))
    b = np.sqrt((e + m) / (2 * e))
    cols = []
    for chi, (ca, cb) in ((chi_p, (a, -b)), (chi_p, (b, a)),
                          (chi_m, (a, b)), (chi_m, (b, -a))):
        col = np.concatenate([ca[..., None] * chi, cb[..., None] * chi],
                             axis=-1)
        cols.append(col)
    u = np.stack(cols, axis=-1)  # (..., component 4, sigma 4)
    # phase convention: largest-|.| component of each column real-positive
    idx = np.argmax(np.abs(u), axis=-2, keepdims=True)
    anchor = np.take_along_axis(u, idx, axis=-2)
    phase = anchor / np.where(np.abs(anchor) > 0, np.abs(anchor), 1.0)
    return u * np.conj(phase)


def dirac_eigensystem(p4, m):
    """(lambda, u, phi) at a single p4: eigenvalues
    lambda_sigma = p^0 - E^(sigma), unitary u with columns phi_sigma,
    and the column list itself."""
    p4 = np.asarray(p4, dtype=float)
    u = dirac_u(p4[1:], m)
    lam = p4[0] - branch_energies(m, p4[1:])
    return lam, u, [u[:, s] for s in range(4)]


class DiracSystem:
    """Spin-1/2 constraint bundle at fixed mass."""

    def __init__(self, m):
        if m <= 0:
            raise ValueError("mass must be positive")
        self.m = m

    def matrix(self, p4):
        return dirac_matrix(p4, self.m)

    def eigensystem(self, p4):
        return dirac_eigensystem(p4, self.m)

    def u(self, p3):
        return dirac_u(p3, self.m)

    def singular_values(self, p4):
        """Singular values of M(p) = |lambda_sigma| (K = M^2 identity)."""
        lam, _, _ = self.eigensystem(p4)
        return np.sort(np.abs(lam))


# ---------------------------------------------------------------------------
# on-shell kernel states
# ---------------------------------------------------------------------------


class OnShellState:
    """Constraint-kernel state in on-shell 3D momentum parametrization.

    kind KG+/KG-: scalar amplitude psi(p_vec) (the t=0 slice in
    momentum space, FFT sample order) with p^0 pinned to +E_p / -E_p.
    kind Dirac: amplitudes alpha_sigma(p_vec) over the four phi_sigma
    branches.  Always normalised to unit 3D L2 norm.
    """

    def __init__(self, grid, amplitudes, m, kind=KG_PLUS, normalize=True):
        if grid.ndim != 3:
            raise ValueError("on-shell states live on a Grid3D")
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if kind == DIRAC:
            if amplitudes.shape != (4,) + grid.shape:
                raise ValueError("Dirac state needs 4 branch amplitudes")
        elif amplitudes.shape != grid.shape:
            raise ValueError("amplitude shape does not match grid")
        self.grid = grid
        self.m = float(m)
        self.kind = kind
        self.psi = amplitudes
        if normalize:
            n = self.norm()
            if n == 0:
                raise ValueError("zero amplitude")
            self.psi = self.psi / n

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2)
                             * self.grid.dual_cell_volume))

    def momentum_mesh(self):
        return np.stack(np.broadcast_arrays(
            *[self.grid.dual_mesh(a) for a in range(3)]), axis=-1)

    def energies(self):
        """E_p over the momentum lattice (always the positive root)."""
        return dispersion(self.m, self.momentum_mesh())

    def copy(self):
        return OnShellState(self.grid, self.psi.copy(), self.m, self.kind,
                            normalize=False)

    # -- serialisation (binary field(s) + JSON sidecar) -------------------

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(np.ascontiguousarray(self.psi).astype("<c16").tobytes())
        sidecar = {
            "format": "interleaved-re-im-float64-little-endian",
            "shape": list(self.psi.shape),
            "mass": self.m,
            "kind": self.kind,
            "branch": {KG_PLUS: "positive", KG_MINUS: "negative",
                       DIRAC: "spinor"}[self.kind],
            "grid": self.grid.to_dict(),
        }
        with open(path + ".json", "w") as fh:
            json.dump(sidecar, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path + ".json") as fh:
            sidecar = json.load(fh)
        grid = grid_from_dict(sidecar["grid"])
        count = int(np.prod(sidecar["shape"]))
        psi = np.fromfile(path, dtype="<c16", count=count)
        return cls(grid, psi.reshape(sidecar["shape"]), sidecar["mass"],
                   sidecar["kind"], normalize=False)


def build_onshell_kg(f, grid, m, branch="positive"):
    """Kernel state from a covariant amplitude f(p_vec) on the momentum
    lattice of `grid`.  The stored slice amplitude carries the on-shell
    weight: psi(p_vec) = f(p_vec) / (sqrt(8 pi) E_p), then unit-norm."""
    f = np.asarray(f, dtype=complex)
    e = dispersion(m, np.stack(np.broadcast_arrays(
        *[grid.dual_mesh(a) for a in range(3)]), axis=-1))
    psi = f / (np.sqrt(8 * np.pi) * e)
    kind = KG_PLUS if branch == "positive" else KG_MINUS
    return OnShellState(grid, psi, m, kind)


def build_onshell_dirac(alpha, grid, m):
    """Kernel state from branch amplitudes alpha_sigma(p_vec), sigma in
    1..4 (helicity/energy basis of dirac_u)."""
    return OnShellState(grid, np.asarray(alpha, dtype=complex), m, DIRAC)


def dirac_residual(state):
    """Relative Dirac-equation residual of an on-shell spinor state:
    assemble the momentum-space spinor on each energy branch and apply
    M(p) at that branch's p^0.  Zero (to rounding) iff the helicity
    construction really diagonalises M."""
    if state.kind != DIRAC:
        raise ValueError("needs a Dirac on-shell state")
    u = dirac_u(state.momentum_mesh(), state.m)  # (..., comp, sigma)
    e = state.energies()
    alpha = np.moveaxis(state.psi, 0, -1)  # (..., sigma)
    total = 0.0
    norm = float(np.sum(np.abs(alpha) ** 2))
    for p0sign, sigmas in ((-1.0, (0, 2)), (1.0, (1, 3))):
        sel = np.zeros(4)
        sel[list(sigmas)] = 1.0
        spinor = np.einsum("...cs,...s->...c", u, alpha * sel)
        p0 = p0sign * e
        # M(p) applied pointwise
        sp = np.einsum("i...,iab->...ab",
                       np.stack([state.grid.dual_mesh(a) *
                                 np.ones(state.grid.shape) for a in range(3)]),
                       PAULI)
        mp = np.zeros(state.grid.shape + (4, 4), dtype=complex)
        mp[..., 0, 0] = mp[..., 1, 1] = p0 - state.m
        mp[..., 2, 2] = mp[..., 3, 3] = p0 + state.m
        mp[..., :2, 2:] = -sp
        mp[..., 2:, :2] = -sp
        res = np.einsum("...ab,...b->...a", mp, spinor)
        total += float(np.sum(np.abs(res) ** 2))
    return float(np.sqrt(total / norm))


# ---------------------------------------------------------------------------
# lifts onto 4D grids and the on-shell boost
# ---------------------------------------------------------------------------


def slice_state(state, t):
    """Position-space wavefunction of the time-t slice (3D array, or
    (4,)+shape for Dirac), unit 3D norm.  KG+ phases advance as
    e^{-i E_p t}, KG- as e^{+i E_p t}, Dirac per branch energy."""
    e = state.energies()
    if state.kind == DIRAC:
        eb = np.stack(
            [-e, e, -e, e], axis=0)  # E^(sigma) over leading axis
        rotated = np.einsum("...cs,s...->c...",
                            dirac_u(state.momentum_mesh(), state.m),
                            np.exp(-1j * eb * t) * state.psi)
        return ifft3(rotated, state.grid)
    sign = -1.0 if state.kind == KG_PLUS else 1.0
    return ifft3(np.exp(sign * 1j * e * t) * state.psi, state.grid)


def lift_nearest_plane(state, taxis):
    """4D momentum-representation EventState with all weight of each
    p_vec column on the p^0 grid plane nearest the branch energy.

    This is the minimal finite stand-in for the delta(p^0 -+ E_p)
    kernel states; the energy snapping is O(dp^0) and dominates 4D
    residual diagnostics (the on-shell parametrization is exact).
    """
    if state.kind == DIRAC:
        raise ValueError("nearest-plane lift implemented for KG kinds")
    grid4 = Grid4D((taxis,) + state.grid.axes)
    sign = 1.0 if state.kind == KG_PLUS else -1.0
    target = sign * state.energies()
    p0 = taxis.dual_coords
    plane = np.argmin(np.abs(p0[:, None, None, None] - target[None]), axis=0)
    field = np.zeros(grid4.shape, dtype=complex)
    np.put_along_axis(field, plane[None], state.psi[None], axis=0)
    return EventState(grid4, field, MOMENTUM)


def erf_window(taxis, flat_halfwidth, taper_sigma):
    """Smooth flat-top window on the time axis: erf-smoothed indicator
    of |t| <= flat_halfwidth, taper scale taper_sigma.  Its spectrum is
    the boxcar's times a Gaussian e^{-taper_sigma^2 E^2 / 2}, so energy
    smearing tails die off fast."""
    from scipy.special import erf
    t = taxis.coords
    s = taper_sigma * np.sqrt(2.0)
    return 0.5 * (erf((t + flat_halfwidth) / s)
                  - erf((t - flat_halfwidth) / s))


def lift_windowed(state, taxis, flat_halfwidth=None, taper_sigma=None):
    """4D position-representation EventState Phi(t, x) = w(t) psi_t(x)
    built by slicing at every time plane and applying a smooth flat-top
    window w (unit 4D norm).

    Unlike the nearest-plane lift this keeps the exact dispersion
    phases, so transforms of the 4D state can be compared pointwise
    against on-shell formulas wherever w = 1.
    """
    if flat_halfwidth is None:
        flat_halfwidth = 0.15 * taxis.length
    if taper_sigma is None:
        taper_sigma = 0.12 * taxis.length
    grid4 = Grid4D((taxis,) + state.grid.axes)
    w = erf_window(taxis, flat_halfwidth, taper_sigma)
    field = np.empty(grid4.shape, dtype=complex)
    for j, t in enumerate(taxis.coords):
        field[j] = slice_state(state, t)
    field *= w[:, None, None, None]
    return EventState(grid4, field, POSITION)


def boost_onshell_field(psi, grid, m, kind, v, axis=1, edge_tol=1e-8):
    """Raw on-shell boost of amplitude samples (no normalisation):

        psi'(p) = psi(gamma(p1 + s v E_p), p2, p3) * gamma(E_p + s v p1)/E_p

    with s = +1 on KG+ and s = -1 on KG- (branches never mix).  The
    grid axes are the trailing three of psi; leading axes are batch.
    The resampling is exact band-limited interpolation along the
    boosted momentum axis.
    """
    if kind == DIRAC:
        raise ValueError("the on-shell boost acts on KG kinds")
    if not abs(v) < 1:
        raise ValueError("|v| must be < 1")
    psi = np.asarray(psi, dtype=complex)
    if v == 0:
        return psi.copy()
    s = 1.0 if kind == KG_PLUS else -1.0
    gamma = 1.0 / np.sqrt(1 - v * v)
    ax = grid.axes[axis - 1]
    fax = psi.ndim - 3 + (axis - 1)
    pmesh = np.stack(np.broadcast_arrays(
        *[grid.dual_mesh(a) for a in range(3)]), axis=-1)
    e = dispersion(m, pmesh)
    p1 = np.broadcast_to(grid.dual_mesh(axis - 1), grid.shape)
    targets = gamma * (p1 + s * v * e)
    # Where the pull-back momentum leaves the grid band the periodic
    # interpolant would wrap around into the packet core; the true
    # amplitude there is the (off-grid) tail of psi, so that region is
    # zeroed below — legitimate only if psi has no band-edge mass.
    shifted_d = np.abs(np.fft.fftshift(psi, axes=fax)) ** 2
    sl = [slice(None)] * psi.ndim
    sl[fax] = slice(0, 2)
    lo = shifted_d[tuple(sl)].sum()
    sl[fax] = slice(-2, None)
    edge = float((lo + shifted_d[tuple(sl)].sum()) / shifted_d.sum())
    if edge > edge_tol:
        raise ValueError(
            f"boosted support escapes the momentum grid "
            f"(band-edge mass fraction {edge:.2e})")
    # 1D trig interpolation along the boosted axis: expand the samples
    # (FFT order along fax) in their conjugate-variable series and
    # evaluate at the target momenta.
    shifted = np.fft.fftshift(psi, axes=fax)
    dual_ax = AxisGrid(ax.n, ax.dual_delta, origin=-ax.nyquist)
    coeff = axis_to_dual(shifted, dual_ax, fax, -1)
    chi = dual_ax.dual_coords  # conjugate (position-like) frequencies
    coeff = np.moveaxis(coeff, fax, -1)                     # (..., k)
    tgt = np.moveaxis(targets, axis - 1, -1)                # (..., j)
    kernel = np.exp(1j * tgt[..., :, None] * chi[None, :])
    out = (dual_ax.dual_delta / SQRT_2PI) * np.einsum(
        "...jk,...k->...j", kernel, coeff)
    out = np.moveaxis(out, -1, fax)
    weight = gamma * (e + s * v * p1) / e
    out = out * weight
    out[..., np.abs(targets) > ax.nyquist] = 0.0
    return out


def onshell_boost(state, v, axis=1, edge_tol=1e-8):
    """Boost of a KG kernel state along a spatial axis, acting directly
    on the on-shell amplitude (see boost_onshell_field).  The result is
    renormalised to the unit-3D-norm contract of OnShellState (the bare
    weight is the slice Jacobian, which is not itself norm-preserving).
    """
    if v == 0:
        return state.copy()
    out = boost_onshell_field(state.psi, state.grid, state.m, state.kind,
                              v, axis, edge_tol)
    return OnShellState(state.grid, out, state.m, state.kind)
